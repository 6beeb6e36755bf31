use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::evaluation::{ForestConfig, RandomForest};
use crate::numerics::{median, pearson_matrix, Matrix, RngStream};
use crate::synth::Synthesizer;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MiaConfig {
    pub n_iter: usize,
    pub size_raw_a: usize,
    pub n_shadows: usize,
    pub n_syn_a: usize,
    pub size_raw_t: usize,
    pub size_syn_t: usize,
    pub n_syn_t: usize,
}

impl Default for MiaConfig {
    fn default() -> Self {
        Self {
            n_iter: 10,
            size_raw_a: 500,
            n_shadows: 10,
            n_syn_a: 10,
            size_raw_t: 400,
            size_syn_t: 400,
            n_syn_t: 50,
        }
    }
}

impl MiaConfig {
    pub fn validate(&self) -> Result<()> {
        let sizes = [
            self.n_iter,
            self.size_raw_a,
            self.n_shadows,
            self.n_syn_a,
            self.size_raw_t,
            self.size_syn_t,
            self.n_syn_t,
        ];
        if sizes.contains(&0) {
            return Err(Error::Domain("attack sizes must all be positive".into()));
        }
        if self.n_shadows < 2 {
            return Err(Error::Domain("need at least two shadow models".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiaReport {
    pub target: usize,
    /// P(ŝ = 1 | target in training data).
    pub p_guess_in: f64,
    /// P(ŝ = 1 | target not in training data).
    pub p_guess_out: f64,
    pub privacy_gain: f64,
}

/// 1 minus the attacker's advantage.
pub fn privacy_gain(p_guess_in: f64, p_guess_out: f64) -> f64 {
    1.0 - (p_guess_in - p_guess_out)
}

/// Summary features of one synthetic set: per column (covariates and
/// response) mean, sd, median, min, max, then the lower triangle of the
/// Pearson correlation matrix with undefined entries as 0.
pub fn set_features(set: &Dataset) -> Vec<f64> {
    let m = set.full_matrix();
    let mut out = Vec::new();
    for col in m.columns() {
        let n = col.len() as f64;
        let mean = col.iter().sum::<f64>() / n;
        let var = if col.len() > 1 {
            col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        let (lo, hi) = col.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        out.extend([mean, var.sqrt(), median(col), lo, hi]);
    }
    let r = pearson_matrix(&m);
    for i in 1..r.nrows() {
        for j in 0..i {
            let v = r.get(i, j);
            out.push(if v.is_nan() { 0.0 } else { v });
        }
    }
    out
}

/// Splits the non-target rows into attacker and evaluation pools,
/// proportionally to `size_raw_a : size_raw_t`.
fn partition_pools(n: usize, target: usize, cfg: &MiaConfig, stream: &RngStream) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut rest: Vec<usize> = (0..n).filter(|&i| i != target).collect();
    rest.shuffle(&mut stream.rng());
    let share = cfg.size_raw_a as f64 / (cfg.size_raw_a + cfg.size_raw_t) as f64;
    let n_a = (share * rest.len() as f64).round() as usize;
    let (a, t) = rest.split_at(n_a);
    if a.len() < 2 || t.len() < 2 {
        return Err(Error::Data(format!("{n} rows are too few to split into attacker and evaluation pools")));
    }
    Ok((a.to_vec(), t.to_vec()))
}

/// `size` rows drawn without replacement from `pool` (all of it if smaller),
/// with the target appended when `include` is set.
fn training_rows(pool: &[usize], size: usize, target: usize, include: bool, stream: &RngStream) -> Vec<usize> {
    let mut rng = stream.rng();
    let k = size.min(pool.len());
    let mut rows: Vec<usize> = rand::seq::index::sample(&mut rng, pool.len(), k).iter().map(|i| pool[i]).collect();
    if include {
        rows.push(target);
    }
    rows.sort_unstable();
    rows
}

/// Membership inference on one target row, one report per variant.
///
/// The attacker's shadow data and the challenger's data come from disjoint
/// pools of the other rows. Membership in both phases is balanced: exactly
/// half of the shadows and (rounding down) half of the challenges contain
/// the target.
pub fn run_mia<S: Synthesizer>(
    real: &Dataset,
    synth: &S,
    target: usize,
    cfg: &MiaConfig,
    forest: &ForestConfig,
    stream: &RngStream,
) -> Result<Vec<MiaReport>> {
    cfg.validate()?;
    let n = real.n_rows();
    if target >= n {
        return Err(Error::Domain(format!("target row {target} out of range")));
    }
    let (pool_a, pool_t) = partition_pools(n, target, cfg, &stream.derive(0))?;
    let n_var = synth.n_variants();

    // attacker phase: features[variant] rows with labels
    let shadow_stream = stream.derive(1);
    let shadows: Vec<Vec<Vec<Vec<f64>>>> = (0..cfg.n_shadows)
        .into_par_iter()
        .map(|s| {
            let st = shadow_stream.derive(s as u64);
            let rows = training_rows(&pool_a, cfg.size_raw_a, target, s % 2 == 0, &st.derive(0));
            let fitted = synth.fit(&real.select_rows(&rows), &st.derive(1))?;
            (0..n_var)
                .map(|v| {
                    (0..cfg.n_syn_a)
                        .map(|l| {
                            synth
                                .sample(&fitted, v, cfg.size_syn_t, &st.derive2(2 + v as u64, l as u64))
                                .map(|d| set_features(&d))
                        })
                        .collect()
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let labels: Vec<u8> = (0..cfg.n_shadows)
        .flat_map(|s| std::iter::repeat_n(u8::from(s % 2 == 0), cfg.n_syn_a))
        .collect();
    let classifiers: Vec<RandomForest> = (0..n_var)
        .map(|v| {
            let rows: Vec<Vec<f64>> = shadows.iter().flat_map(|sh| sh[v].iter().cloned()).collect();
            RandomForest::fit(&Matrix::from_rows(&rows)?, &labels, forest)
        })
        .collect::<Result<_>>()?;

    // evaluation phase
    let eval_stream = stream.derive(2);
    let mut membership: Vec<bool> = (0..cfg.n_iter).map(|m| m < cfg.n_iter.div_ceil(2)).collect();
    membership.shuffle(&mut eval_stream.derive(u64::MAX).rng());
    let votes: Vec<Vec<(usize, usize)>> = (0..cfg.n_iter)
        .into_par_iter()
        .map(|m| {
            let st = eval_stream.derive(m as u64);
            let rows = training_rows(&pool_t, cfg.size_raw_t, target, membership[m], &st.derive(0));
            let fitted = synth.fit(&real.select_rows(&rows), &st.derive(1))?;
            (0..n_var)
                .map(|v| {
                    let mut yes = 0;
                    for l in 0..cfg.n_syn_t {
                        let set = synth.sample(&fitted, v, cfg.size_syn_t, &st.derive2(2 + v as u64, l as u64))?;
                        if classifiers[v].predict_proba_row(&set_features(&set)) > 0.5 {
                            yes += 1;
                        }
                    }
                    Ok((yes, cfg.n_syn_t))
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    Ok((0..n_var)
        .map(|v| {
            let tally = |inside: bool| -> f64 {
                let (yes, total) = votes
                    .iter()
                    .zip(&membership)
                    .filter(|(_, &s)| s == inside)
                    .fold((0, 0), |(a, b), (vt, _)| (a + vt[v].0, b + vt[v].1));
                if total == 0 {
                    f64::NAN
                } else {
                    yes as f64 / total as f64
                }
            };
            let (p_in, p_out) = (tally(true), tally(false));
            MiaReport {
                target,
                p_guess_in: p_in,
                p_guess_out: p_out,
                privacy_gain: privacy_gain(p_in, p_out),
            }
        })
        .collect())
}

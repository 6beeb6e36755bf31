use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::numerics::{median, ols_fit, quantile_sorted, ColumnStats, RngStream};
use crate::synth::Synthesizer;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AiaConfig {
    pub n_iter: usize,
    pub size_raw_t: usize,
    pub size_syn_t: usize,
    pub n_synth: usize,
    pub bootstrap_size: usize,
}

impl Default for AiaConfig {
    fn default() -> Self {
        Self {
            n_iter: 10,
            size_raw_t: 500,
            size_syn_t: 500,
            n_synth: 50,
            bootstrap_size: 500,
        }
    }
}

impl AiaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_iter == 0 || self.size_raw_t == 0 || self.size_syn_t == 0 || self.n_synth == 0 || self.bootstrap_size == 0 {
            return Err(Error::Domain("attack sizes must all be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetMse {
    pub row: usize,
    /// Mean squared error of guesses from synthetic data.
    pub synthetic: f64,
    /// Same attack run on bootstrap samples of the real data.
    pub real: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AiaReport {
    pub sensitive: usize,
    /// `beta[m][l]`: regression coefficients (no intercept) of iteration
    /// `m`, synthetic set `l`; `None` for sets skipped as collinear.
    pub beta: Vec<Vec<Option<Vec<f64>>>>,
    pub mab: f64,
    pub wcab: f64,
    /// Mean |β| of each completed set, for spread summaries.
    pub set_mab: Vec<f64>,
    pub mab_median: f64,
    pub mab_q25: f64,
    pub mab_q75: f64,
    pub skipped: usize,
    pub mse: Vec<TargetMse>,
}

struct SetFit {
    coefficients: Vec<f64>,
    intercept: f64,
}

/// Regress standardized column `j` on the other standardized covariates and
/// the response. Every column is standardized with the set's own statistics.
fn regress_sensitive(set: &Dataset, j: usize) -> Result<SetFit> {
    let full = set.full_matrix();
    let z = ColumnStats::of(&full)?.apply(&full);
    let others: Vec<usize> = (0..z.ncols()).filter(|&k| k != j).collect();
    let fit = ols_fit(&z.select_columns(&others), z.column(j))?;
    Ok(SetFit {
        coefficients: fit.coefficients,
        intercept: fit.intercept,
    })
}

fn is_skippable(e: &Error) -> bool {
    matches!(e, Error::RankDeficient { .. } | Error::ZeroVariance(_))
}

/// Guess for each target on the standardized scale; `rows[t]` already
/// excludes the sensitive column.
fn squared_errors(fit: &SetFit, rows: &[Vec<f64>], truth: &[f64], acc: &mut [f64]) {
    for ((row, t), a) in rows.iter().zip(truth).zip(acc.iter_mut()) {
        let guess = fit.intercept + fit.coefficients.iter().zip(row).map(|(b, x)| b * x).sum::<f64>();
        *a += (guess - t) * (guess - t);
    }
}

/// Attribute inference against sensitive covariate `sensitive`, one report
/// per synthesizer variant.
///
/// Each iteration trains the synthesizer on the targets plus a random
/// subsample of the remaining rows (`size_raw_t` rows in total) and attacks
/// `n_synth` synthetic sets per variant.
pub fn run_aia<S: Synthesizer>(
    real: &Dataset,
    synth: &S,
    sensitive: usize,
    targets: &[usize],
    cfg: &AiaConfig,
    stream: &RngStream,
) -> Result<Vec<AiaReport>> {
    cfg.validate()?;
    let (n, d) = (real.n_rows(), real.n_covariates());
    if sensitive >= d {
        return Err(Error::Domain(format!("sensitive column {sensitive} out of range")));
    }
    if targets.iter().any(|&t| t >= n) {
        return Err(Error::Domain("target row out of range".into()));
    }
    if targets.len() > cfg.size_raw_t || cfg.size_raw_t > n {
        return Err(Error::Domain(format!(
            "training size {} must hold {} targets and fit in {n} rows",
            cfg.size_raw_t,
            targets.len()
        )));
    }
    let full = real.full_matrix();
    let real_stats = ColumnStats::of(&full)?;
    let target_rows: Vec<Vec<f64>> = targets.iter().map(|&t| real_stats.apply_row(&full.row(t))).collect();
    let truth: Vec<f64> = target_rows.iter().map(|r| r[sensitive]).collect();
    let regressors: Vec<Vec<f64>> = target_rows
        .iter()
        .map(|r| r.iter().enumerate().filter(|&(k, _)| k != sensitive).map(|(_, v)| *v).collect())
        .collect();
    let non_targets: Vec<usize> = (0..n).filter(|i| !targets.contains(i)).collect();
    let n_var = synth.n_variants();

    // per iteration: per variant (per-set fits, summed squared errors, count)
    type IterOut = Vec<(Vec<Option<Vec<f64>>>, Vec<f64>, usize)>;
    let iterations: Vec<IterOut> = (0..cfg.n_iter)
        .into_par_iter()
        .map(|m| -> Result<IterOut> {
            let it = stream.derive(m as u64);
            let mut rng = it.derive(0).rng();
            let extra = sample_indices(&mut rng, non_targets.len(), cfg.size_raw_t - targets.len());
            let mut rows: Vec<usize> = targets.to_vec();
            rows.extend(extra.iter().map(|k| non_targets[k]));
            rows.sort_unstable();
            let fitted = synth.fit(&real.select_rows(&rows), &it.derive(1))?;
            (0..n_var)
                .map(|v| {
                    let mut sets = Vec::with_capacity(cfg.n_synth);
                    let mut sq = vec![0.0; targets.len()];
                    let mut used = 0;
                    for l in 0..cfg.n_synth {
                        let syn = synth.sample(&fitted, v, cfg.size_syn_t, &it.derive2(2 + v as u64, l as u64))?;
                        match regress_sensitive(&syn, sensitive) {
                            Ok(fit) => {
                                squared_errors(&fit, &regressors, &truth, &mut sq);
                                used += 1;
                                sets.push(Some(fit.coefficients));
                            }
                            Err(e) if is_skippable(&e) => sets.push(None),
                            Err(e) => return Err(e),
                        }
                    }
                    Ok((sets, sq, used))
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let real_mse = real_baseline(real, sensitive, cfg, &regressors, &truth, &stream.derive(u64::MAX))?;

    (0..n_var)
        .map(|v| {
            let beta: Vec<Vec<Option<Vec<f64>>>> = iterations.iter().map(|it| it[v].0.clone()).collect();
            let used: usize = iterations.iter().map(|it| it[v].2).sum();
            let mut sq = vec![0.0; targets.len()];
            for it in &iterations {
                for (a, b) in sq.iter_mut().zip(&it[v].1) {
                    *a += b;
                }
            }
            let mse = targets
                .iter()
                .zip(&sq)
                .zip(&real_mse)
                .map(|((&row, s), r)| TargetMse {
                    row,
                    synthetic: if used > 0 { s / used as f64 } else { f64::NAN },
                    real: *r,
                })
                .collect();
            summarize(sensitive, beta, mse)
        })
        .collect()
}

/// The same regression attack on bootstrap resamples of the real data.
fn real_baseline(
    real: &Dataset,
    sensitive: usize,
    cfg: &AiaConfig,
    regressors: &[Vec<f64>],
    truth: &[f64],
    stream: &RngStream,
) -> Result<Vec<f64>> {
    let n = real.n_rows();
    let fits: Vec<Option<SetFit>> = (0..cfg.n_synth)
        .into_par_iter()
        .map(|l| {
            let mut rng = stream.derive(l as u64).rng();
            let idx: Vec<usize> = (0..cfg.bootstrap_size).map(|_| rng.random_range(0..n)).collect();
            match regress_sensitive(&real.select_rows(&idx), sensitive) {
                Ok(f) => Ok(Some(f)),
                Err(e) if is_skippable(&e) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;
    let mut sq = vec![0.0; truth.len()];
    let mut used = 0;
    for f in fits.iter().flatten() {
        squared_errors(f, regressors, truth, &mut sq);
        used += 1;
    }
    Ok(sq.into_iter().map(|s| if used > 0 { s / used as f64 } else { f64::NAN }).collect())
}

/// MAB, WCAB and per-set spread from a coefficient tensor.
pub fn summarize(sensitive: usize, beta: Vec<Vec<Option<Vec<f64>>>>, mse: Vec<TargetMse>) -> Result<AiaReport> {
    let done: Vec<&Vec<f64>> = beta.iter().flatten().flatten().collect();
    let skipped = beta.iter().flatten().filter(|s| s.is_none()).count();
    if done.is_empty() {
        return Err(Error::Data("every synthetic set was collinear; no coefficients".into()));
    }
    let abs: Vec<f64> = done.iter().flat_map(|b| b.iter().map(|v| v.abs())).collect();
    let mab = abs.iter().sum::<f64>() / abs.len() as f64;
    let wcab = abs.iter().copied().fold(0.0, f64::max);
    let set_mab: Vec<f64> = done
        .iter()
        .map(|b| b.iter().map(|v| v.abs()).sum::<f64>() / b.len() as f64)
        .collect();
    let mab_median = median(&set_mab);
    let mut sorted = set_mab.clone();
    sorted.sort_by(f64::total_cmp);
    let (mab_q25, mab_q75) = (quantile_sorted(&sorted, 0.25), quantile_sorted(&sorted, 0.75));
    Ok(AiaReport {
        sensitive,
        beta,
        mab,
        wcab,
        set_mab,
        mab_median,
        mab_q25,
        mab_q75,
        skipped,
        mse,
    })
}

/// Convenience: OLS coefficients of column `j` in one standardized set.
pub fn set_coefficients(set: &Dataset, j: usize) -> Result<Vec<f64>> {
    regress_sensitive(set, j).map(|f| f.coefficients)
}

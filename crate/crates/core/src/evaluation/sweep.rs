use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{spread, utility_tstr, ForestConfig};
use crate::cvine::{fit_cvine_with, CVineModel, FitOptions};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::numerics::RngStream;
use crate::privacy::{run_aia, run_mia, AiaConfig, MiaConfig};
use crate::synth::CVineSynthesizer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrivacyMetric {
    Mab,
    Pg,
}

impl PrivacyMetric {
    pub fn name(self) -> &'static str {
        match self {
            Self::Mab => "mab",
            Self::Pg => "pg",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SweepPrivacy {
    /// Attribute inference on covariate `sensitive`; the score is the
    /// median over synthetic sets of their mean |β|.
    Mab {
        sensitive: usize,
        targets: Vec<usize>,
        aia: AiaConfig,
    },
    /// Membership inference; the score is the median privacy gain over
    /// targets.
    Pg {
        targets: Vec<usize>,
        mia: MiaConfig,
        forest: ForestConfig,
    },
}

impl SweepPrivacy {
    pub fn metric(&self) -> PrivacyMetric {
        match self {
            Self::Mab { .. } => PrivacyMetric::Mab,
            Self::Pg { .. } => PrivacyMetric::Pg,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub truncations: Vec<usize>,
    /// Synthetic replicates per level for the utility score.
    pub n_rep: usize,
    pub forest: ForestConfig,
    pub privacy: SweepPrivacy,
    pub fit: FitOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub truncation: usize,
    pub utility_median: f64,
    pub utility_q25: f64,
    pub utility_q75: f64,
    pub privacy_metric: PrivacyMetric,
    pub privacy_median: f64,
    pub privacy_q25: f64,
    pub privacy_q75: f64,
}

/// TSTR AUCs of `n_rep` synthetic sets, each the size of the model's
/// training data. Replicate `r` draws from `stream.derive(r)`.
pub fn utility_replicates(
    model: &CVineModel,
    test: &Dataset,
    n_rep: usize,
    forest: &ForestConfig,
    stream: &RngStream,
) -> Result<Vec<f64>> {
    (0..n_rep)
        .into_par_iter()
        .map(|r| {
            let syn = model.sample(model.n_train(), &stream.derive(r as u64))?;
            utility_tstr(&syn, test, forest)
        })
        .collect()
}

/// One record per requested truncation level, in the order given.
///
/// The vine is fitted to `real` once at the largest level and truncated
/// for each utility evaluation; the attacks likewise fit once per game and
/// attack every level from that fit.
pub fn sweep(real: &Dataset, test: &Dataset, order: &[usize], cfg: &SweepConfig, stream: &RngStream) -> Result<Vec<SweepRecord>> {
    let d = real.n_covariates();
    if cfg.truncations.is_empty() || cfg.truncations.iter().any(|&t| t == 0 || t > d) {
        return Err(Error::Domain(format!("truncation levels must lie in 1..={d}")));
    }
    if cfg.n_rep == 0 {
        return Err(Error::Domain("need at least one synthetic replicate".into()));
    }
    let t_max = *cfg.truncations.iter().max().expect("nonempty");
    let full = fit_cvine_with(real, order, t_max, &stream.derive(0), &cfg.fit)?;
    let utility: Vec<Vec<f64>> = cfg
        .truncations
        .iter()
        .map(|&t| utility_replicates(&full.truncate(t)?, test, cfg.n_rep, &cfg.forest, &stream.derive2(1, t as u64)))
        .collect::<Result<_>>()?;

    let mut synth = CVineSynthesizer::new(order.to_vec(), cfg.truncations.clone())?;
    synth.options = cfg.fit.clone();
    let privacy: Vec<(f64, f64, f64)> = match &cfg.privacy {
        SweepPrivacy::Mab { sensitive, targets, aia } => run_aia(real, &synth, *sensitive, targets, aia, &stream.derive(2))?
            .iter()
            .map(|r| (r.mab_median, r.mab_q25, r.mab_q75))
            .collect(),
        SweepPrivacy::Pg { targets, mia, forest } => {
            if targets.is_empty() {
                return Err(Error::Domain("membership inference needs at least one target".into()));
            }
            let per_target: Vec<Vec<f64>> = targets
                .iter()
                .map(|&t| {
                    run_mia(real, &synth, t, mia, forest, &stream.derive2(3, t as u64))
                        .map(|rs| rs.iter().map(|r| r.privacy_gain).collect())
                })
                .collect::<Result<_>>()?;
            (0..cfg.truncations.len())
                .map(|v| spread(&per_target.iter().map(|p| p[v]).collect::<Vec<_>>()))
                .collect()
        }
    };

    Ok(cfg
        .truncations
        .iter()
        .zip(utility)
        .zip(privacy)
        .map(|((&truncation, u), (pm, p25, p75))| {
            let (um, u25, u75) = spread(&u);
            SweepRecord {
                truncation,
                utility_median: um,
                utility_q25: u25,
                utility_q75: u75,
                privacy_metric: cfg.privacy.metric(),
                privacy_median: pm,
                privacy_q25: p25,
                privacy_q75: p75,
            }
        })
        .collect())
}

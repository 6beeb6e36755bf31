//! Downstream utility (train on synthetic, test on real), statistical
//! fidelity, and the truncation sweep that pairs utility with privacy.

mod fidelity;
mod forest;
mod sweep;

pub use fidelity::{fidelity, FidelityReport, GRID_POINTS};
pub use forest::{train_forest, ForestConfig, RandomForest};
pub use sweep::{sweep, utility_replicates, PrivacyMetric, SweepConfig, SweepPrivacy, SweepRecord};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::numerics::{auc, median, quantile_sorted};

fn check_columns(train: &Dataset, test: &Dataset) -> Result<()> {
    if train.names() != test.names() {
        return Err(Error::Dimension(format!(
            "training columns {:?} differ from test columns {:?}",
            train.names(),
            test.names()
        )));
    }
    Ok(())
}

/// AUC on `test` of a forest trained on `train`.
fn train_and_score(train: &Dataset, test: &Dataset, cfg: &ForestConfig) -> Result<f64> {
    check_columns(train, test)?;
    let forest = train_forest(train, cfg)?;
    auc(test.response(), &forest.predict_proba(test.covariates()))
}

/// Train on synthetic, test on real.
pub fn utility_tstr(synthetic: &Dataset, test: &Dataset, cfg: &ForestConfig) -> Result<f64> {
    train_and_score(synthetic, test, cfg)
}

/// Train on real, test on real: the reference for [`utility_tstr`].
pub fn utility_trtr(real: &Dataset, test: &Dataset, cfg: &ForestConfig) -> Result<f64> {
    train_and_score(real, test, cfg)
}

/// (median, 25% quantile, 75% quantile), NaN for an empty sample.
pub fn spread(values: &[f64]) -> (f64, f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN, f64::NAN);
    }
    let mut s = values.to_vec();
    s.sort_by(f64::total_cmp);
    (median(values), quantile_sorted(&s, 0.25), quantile_sorted(&s, 0.75))
}

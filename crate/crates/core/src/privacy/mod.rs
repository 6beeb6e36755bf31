//! Attribute and membership inference games, plus the closed-form
//! regression coefficients of truncated Gaussian vines.

mod aia;
mod mia;
mod targets;
mod theory;

pub use aia::{run_aia, set_coefficients, summarize, AiaConfig, AiaReport, TargetMse};
pub use mia::{privacy_gain, run_mia, set_features, MiaConfig, MiaReport};
pub use targets::{select_targets, TargetMode};
pub use theory::{
    block_privacy_check, gaussian_vine_correlation, regression_beta, theoretical_beta, truncated_correlation,
    BetaTheory, BlockCheck,
};

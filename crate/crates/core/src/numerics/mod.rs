//! Scalar and matrix primitives shared by the rest of the crate.
//!
//! Everything here is a pure function of its inputs. Randomness goes through
//! [`RngStream`], which names a reproducible, independent stream.

mod linalg;
pub(crate) mod normal;
mod optim;
mod quadrature;
mod rank;
mod rng;

pub use linalg::{ols_fit, pearson_matrix, standardize, ColumnStats, Matrix, OlsFit};
pub use normal::{std_normal_cdf, std_normal_log_pdf, std_normal_pdf, std_normal_quantile};
pub use optim::{bisect, brent_minimize, BrentResult};
pub use quadrature::{gauss_legendre, GaussLegendre};
pub use rank::{
    auc, average_ranks, empirical_pit, empirical_quantile, kendall_tau, mean, median,
    quantile_sorted, sample_sd, QuantileTable,
};
pub use rng::RngStream;

//! Truncated C-vine: the star-shaped pair-copula construction whose first
//! tree is rooted at the response.

mod copula;
mod model;

pub use copula::{CVineCopula, FitOptions};
pub use model::{fit_cvine, fit_cvine_with, CVineModel, Marginal, PsiDecomposition, SCHEMA_VERSION};

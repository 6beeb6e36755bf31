use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("column `{0}` has zero variance")]
    ZeroVariance(String),

    #[error("design matrix is rank deficient; collinear columns {columns:?}")]
    RankDeficient { columns: Vec<usize> },

    #[error("parameter {theta} outside admissible range for {family}")]
    InvalidParameter { family: String, theta: f64 },

    #[error("optimizer failed to converge for {0}")]
    NoConvergence(String),

    #[error("invalid data: {0}")]
    Data(String),

    #[error("invalid model: {0}")]
    Model(String),

    #[error("unknown copula family `{0}`")]
    UnknownFamily(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by numerical breakdown rather than bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::RankDeficient { .. } | Error::NoConvergence(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Errors produced by the selection library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("{what} did not converge after {iterations} iterations")]
    NonConvergence { what: &'static str, iterations: usize },

    #[error("rank-deficient covariate matrix: numerical rank {rank}, expected {expected}")]
    RankDeficient { rank: usize, expected: usize },

    #[error("invalid dataset: {0}")]
    InvalidData(String),

    #[error("no candidate covariates remain")]
    Exhausted,

    #[error("singular least-squares fit: {0}")]
    Singular(String),

    #[error("robust scale is zero: {0}")]
    ZeroScale(String),

    #[error("residuals are identically zero")]
    PerfectFit,

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: u64,
        column: usize,
        message: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures caused by bad input (files, flags, shapes) rather than numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidData(_)
                | Error::Parse { .. }
                | Error::Config(_)
                | Error::Io(_)
                | Error::Json(_)
                | Error::Csv(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

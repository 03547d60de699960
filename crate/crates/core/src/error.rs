use thiserror::Error;

use crate::opmodel::SpaceDescriptor;

#[derive(Debug, Error)]
pub enum Error {
    #[error("index {index} lies outside {space}")]
    IndexOutOfRange { index: i64, space: SpaceDescriptor },

    #[error("space mismatch: {0}")]
    SpaceMismatch(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is not invertible at {at} (sigma_min = {sigma_min:e})")]
    NotInvertible { at: String, sigma_min: f64 },

    #[error("pencil carries no dissipative-Hamiltonian metadata")]
    MissingDh,

    #[error("verification failed: {0}")]
    VerificationFailed(String),

    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),

    #[error("quadrature did not reach tolerance {tol:e} (Richardson estimate {estimate:e})")]
    Quadrature { tol: f64, estimate: f64 },

    #[error("growth certificate violated at k = {k}: {detail}")]
    GrowthCertificate { k: usize, detail: String },

    #[error("t = {t} lies outside the certified radius {radius} (10% margin)")]
    OutsideRadius { t: f64, radius: f64 },

    #[error("decomposition failed: {0}")]
    Decomposition(String),

    #[error("malformed pencil description: {0}")]
    Json(#[from] serde_json::Error),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

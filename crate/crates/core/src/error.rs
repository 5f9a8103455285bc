use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (max |m - m†| = {defect:e})")]
    NotHermitian { defect: f64 },

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("invalid state: {0}")]
    StateInvalid(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("correlation matrix is not diagonal (largest off-diagonal |c_ij| = {offdiag:e})")]
    NotDiagonalCorrelation { offdiag: f64 },

    #[error("closed-form fidelity MIN {closed} disagrees with the spectral form {spectral}")]
    ConventionMismatch { closed: f64, spectral: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

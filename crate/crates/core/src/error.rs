use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum NskError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("insufficient resolution: {0}")]
    Resolution(String),
    #[error("field is not Hermitian: imaginary residue {residue:.3e} relative to the real part")]
    NonHermitian { residue: f64 },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("inadmissible density: minimum {min_density:.6} at t = {time:.6}")]
    InadmissibleDensity { min_density: f64, time: f64 },
    #[error("non-finite value encountered in {0}")]
    NonFinite(String),
    #[error("malformed input: {0}")]
    Format(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, NskError>;

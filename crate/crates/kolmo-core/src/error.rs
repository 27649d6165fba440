use thiserror::Error;

/// Errors raised by the numerical modules.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("invalid data: {0}")]
    InvalidData(String),
    #[error("degenerate measure: {0}")]
    DegenerateMeasure(String),
    #[error("numerical failure in {what} after {iterations} iterations (residual {residual:e})")]
    NumericalFailure {
        what: String,
        iterations: usize,
        residual: f64,
    },
    #[error("empty surface band: {0}")]
    EmptySurface(String),
    #[error("assembly error: {0}")]
    Assembly(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("blow-up: state norm {norm:e} exceeds limit (dt = {dt}, alpha = {alpha:?})")]
    BlowUp { norm: f64, dt: f64, alpha: Option<f64> },
    #[error("unreliable estimate: {0}")]
    Reliability(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("unsupported potential: {0}")]
    UnsupportedPotential(String),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Errors raised by the numerical kernels, experiments and config layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("eigensolver failure ({0})")]
    Eigen(String),
    #[error("function not finite at eigenvalue {lambda}")]
    Evaluation { lambda: f64 },
    #[error("negative eigenvalue {0} after clamping")]
    NegativeSpectrum(f64),
    #[error("trajectory reached the boundary at s = {time}")]
    BoundaryHit { time: f64 },
    #[error("phase-space inversion failed: {0}")]
    Inversion(String),
    #[error("caustic: a + ib vanishes at s = {0}")]
    Caustic(f64),
    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("unknown experiment `{name}`; valid names: {valid}")]
    UnknownExperiment { name: String, valid: String },
    #[error("cache file: {0}")]
    Cache(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn precondition(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Precondition(msg()))
    }
}

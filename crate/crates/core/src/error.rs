use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// The parameters leave the Morrey regime `s·p > n`.
    #[error("parameters outside the Morrey regime: s·p = {sp} must exceed n = {n}")]
    Regime { n: usize, sp: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("grid functions or weights live on different lattices")]
    Mismatch,

    #[error("no lattice node falls in the ball of radius {rho} around {center:?}")]
    EmptyRegion { center: [f64; 2], rho: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("solver did not converge after {iterations} iterations (gradient max-norm {grad_norm:e})")]
    NonConvergence { iterations: usize, grad_norm: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("Hölder-attaining pair ({0}, {1}) cannot be mapped onto lattice pins")]
    UnmappablePair(usize, usize),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

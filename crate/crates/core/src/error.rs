use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A drive quantity is undefined or diverges at the given dimensionless time.
    #[error("domain error at x = {x}: {reason}")]
    Domain { x: f64, reason: String },

    /// The adaptive integrator ran out of steps before reaching the end of the span.
    #[error("integrator did not converge: reached x = {reached} of {target} after {steps} steps")]
    Convergence {
        reached: f64,
        target: f64,
        steps: usize,
    },

    /// A caller violated an input contract (bad config, bad area, shape mismatch, ...).
    #[error("contract violated: {0}")]
    Contract(String),

    /// Unknown catalog entry.
    #[error("no catalog row {0} (rows are 1..=16)")]
    UnknownRow(u8),

    /// The local series start of the detuning-first construction is singular.
    #[error("singular start: {0}")]
    Singularity(String),

    /// A landscape file could not be parsed.
    #[error("parse error on line {line}: {reason}")]
    Parse { line: usize, reason: String },

    /// Scan failure at a specific grid point.
    #[error("scan failed at alpha = {alpha}, beta = {beta}: {source}")]
    ScanPoint {
        alpha: f64,
        beta: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

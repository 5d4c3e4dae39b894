use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("bad parameters: {0}")]
    BadParameters(String),

    /// The zero Fourier mode of a Poisson right-hand side is not zero.
    #[error("Poisson right-hand side has non-zero mean {mean:e}")]
    NonZeroMean { mean: f64 },

    #[error("degenerate marker loop: points {index} and {next} coincide")]
    DegenerateLoop { index: usize, next: usize },

    #[error("time step {dt:e} exceeds CFL bound {limit:e}")]
    CflViolation { dt: f64, limit: f64 },

    #[error("non-finite values in {what}")]
    NonFinite { what: String },

    #[error("pressure needs at least 3 samples of n_A, got {got}")]
    InsufficientHistory { got: usize },

    /// Picard residuals stopped decreasing.
    #[error("successive approximations failed to contract after {iterations} iterations")]
    NoContraction {
        iterations: usize,
        residuals: Vec<f64>,
    },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("time mismatch: {a} vs {b}")]
    TimeMismatch { a: f64, b: f64 },

    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

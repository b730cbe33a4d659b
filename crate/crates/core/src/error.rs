//! Error type shared by every module in the crate.

use std::fmt;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong across the matrix, solver, signal, field
/// and I/O layers.
#[derive(Debug)]
pub enum Error {
    /// Matrix with zero rows or zero columns.
    EmptyMatrix,
    /// A NaN or infinite value where finite data is required.
    NonFinite,
    /// Requested a rank-0 truncation.
    ZeroRank,
    /// Two operands disagree on dimensions.
    ShapeMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    /// Index outside the matrix extent.
    OutOfBounds {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },
    /// The same (row, col) position listed twice in an observation set.
    DuplicateObservation { row: usize, col: usize },
    /// Observation set with no entries (sampling fraction must be > 0).
    EmptyObservations,
    /// A configuration value violates its documented range.
    InvalidConfig(String),
    /// Azimuth-miss mask where the fully dwelled columns alone already
    /// exceed the requested sampling fraction.
    InfeasibleFraction { dwell_ratio: f64, fraction: f64 },
    /// The solver residual blew up (bad step size).
    Divergence { iteration: usize, residual: f64 },
    /// Jacobi sweeps did not settle within the sweep budget.
    NoConvergence { sweeps: usize },
    /// Gaussian spectrum with zero width.
    ZeroWidth,
    /// Too few pulses for the requested estimate.
    TooFewSamples { got: usize, need: usize },
    /// Lag-1 autocorrelation below the reliability floor; the spectral
    /// moments cannot be trusted.
    WeakSignal,
    /// Range must be strictly positive.
    NonPositiveRange,
    /// Scatterer scene with no scatterers.
    EmptyScene,
    /// Underlying I/O failure.
    Io(std::io::Error),
    /// Malformed file contents.
    Format(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::EmptyMatrix => write!(f, "matrix has zero rows or columns"),
            Error::NonFinite => write!(f, "non-finite value (NaN or infinity)"),
            Error::ZeroRank => write!(f, "truncation rank must be at least 1"),
            Error::ShapeMismatch { expected, got } => write!(
                f,
                "shape mismatch: expected {}x{}, got {}x{}",
                expected.0, expected.1, got.0, got.1
            ),
            Error::OutOfBounds {
                row,
                col,
                rows,
                cols,
            } => write!(
                f,
                "index ({row}, {col}) out of bounds for {rows}x{cols} matrix"
            ),
            Error::DuplicateObservation { row, col } => {
                write!(f, "duplicate observation at ({row}, {col})")
            }
            Error::EmptyObservations => write!(f, "observation set is empty"),
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::InfeasibleFraction {
                dwell_ratio,
                fraction,
            } => write!(
                f,
                "dwell ratio {dwell_ratio} already exceeds sampling fraction {fraction}"
            ),
            Error::Divergence {
                iteration,
                residual,
            } => write!(
                f,
                "solver diverged at iteration {iteration} (residual {residual:.3e}); \
                 reduce the step size"
            ),
            Error::NoConvergence { sweeps } => {
                write!(f, "Jacobi sweeps did not converge within {sweeps} sweeps")
            }
            Error::ZeroWidth => write!(f, "spectrum width must be strictly positive"),
            Error::TooFewSamples { got, need } => {
                write!(f, "need at least {need} samples, got {got}")
            }
            Error::WeakSignal => write!(
                f,
                "lag-1 autocorrelation below the reliability floor; \
                 moment estimates would be meaningless"
            ),
            Error::NonPositiveRange => write!(f, "range must be strictly positive"),
            Error::EmptyScene => write!(f, "scatterer scene is empty"),
            Error::Io(e) => write!(f, "I/O error: {e}"),
            Error::Format(msg) => write!(f, "malformed file: {msg}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}

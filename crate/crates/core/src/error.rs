use std::fmt;

use serde::{Deserialize, Serialize};

/// Wave parameters `(k, M, P)` a failure refers to.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub k: f64,
    pub mass: f64,
    pub momentum: f64,
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(k={}, M={}, P={})", self.k, self.mass, self.momentum)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("value out of numeric range: {0}")]
    NumericRange(String),

    #[error("unsupported symbol: {0}")]
    UnsupportedSymbol(String),

    #[error("assumption violated: {0}")]
    AssumptionViolated(String),

    #[error("Newton iteration did not converge at {point} after {iterations} iterations (last residual {residual:.3e})")]
    ConvergenceFailure {
        point: Point,
        iterations: usize,
        residual: f64,
    },

    #[error("Jacobian ill-conditioned at {point}: cond = {cond:.3e}")]
    IllConditioned { point: Point, cond: f64 },

    #[error("wave under-resolved at {point}: trailing coefficient ratio {ratio:.3e}")]
    UnderResolved { point: Point, ratio: f64 },

    #[error("degenerate (k, M, P) parametrization at {point}: {reason}")]
    DegenerateParametrization { point: Point, reason: String },

    #[error("continuation stalled at amplitude {amplitude} (step below {min_step:e}); {} waves computed", partial.len())]
    ContinuationStalled {
        amplitude: f64,
        min_step: f64,
        partial: Vec<crate::wave::TravelingWave>,
    },

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("schema `{schema}` version {found} is not supported (expected {expected}); migrate the file")]
    SchemaVersion {
        schema: String,
        found: u32,
        expected: u32,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// The wave parameters attached to the error, if any.
    pub fn point(&self) -> Option<Point> {
        match self {
            Error::ConvergenceFailure { point, .. }
            | Error::IllConditioned { point, .. }
            | Error::UnderResolved { point, .. }
            | Error::DegenerateParametrization { point, .. } => Some(*point),
            _ => None,
        }
    }
}

use std::path::PathBuf;

use thiserror::Error;

use crate::stokes::SolveStats;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("assumption {assumption} violated at cell {k:?}: {detail}")]
    AssumptionViolated {
        k: [i64; 3],
        assumption: &'static str,
        detail: String,
    },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fluid region is disconnected ({components} components)")]
    DisconnectedFluid { components: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("resolution mismatch: cell field has n = {cell}, macro grid has n = {macro_n}")]
    ResolutionMismatch { cell: usize, macro_n: usize },

    #[error("no stencil-complete fluid points inside the interior region")]
    EmptyInteriorRegion,

    #[error("solver did not converge after {} iterations (residual {:.3e})", .0.iterations, .0.final_residual())]
    NonConvergence(Box<SolveStats>),

    #[error("incompatible data: fluid mean {mean:.3e} exceeds tolerance {tol:.3e}")]
    IncompatibleData { mean: f64, tol: f64 },

    #[error("singular system: {0}")]
    SingularSystem(String),

    #[error("inconsistent grids: {0}")]
    InconsistentGrids(String),

    #[error("override at cell {k:?} lies outside the truncation box")]
    OverridesOutsideTruncation { k: [i64; 3] },

    #[error("need at least two data points, got {0}")]
    InsufficientData(usize),

    #[error("log-log fit requires positive values, got ({x}, {y})")]
    NonPositiveValue { x: f64, y: f64 },

    #[error("{}", fmt_config(.path, .line, .message))]
    Config {
        path: Option<PathBuf>,
        line: Option<usize>,
        message: String,
    },

    #[error("malformed field file: {0}")]
    FieldFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn fmt_config(path: &Option<PathBuf>, line: &Option<usize>, message: &str) -> String {
    match (path, line) {
        (Some(p), Some(l)) => format!("config error in {}:{}: {}", p.display(), l, message),
        (Some(p), None) => format!("config error in {}: {}", p.display(), message),
        (None, Some(l)) => format!("config error at line {}: {}", l, message),
        (None, None) => format!("config error: {}", message),
    }
}

impl Error {
    pub(crate) fn config(message: impl Into<String>) -> Self {
        Error::Config {
            path: None,
            line: None,
            message: message.into(),
        }
    }

    /// Process exit code: 2 for non-convergence, 3 for configuration and
    /// input errors, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonConvergence(_) => 2,
            Error::Config { .. } | Error::FieldFormat(_) | Error::Io(_) | Error::Csv(_) => 3,
            _ => 1,
        }
    }
}

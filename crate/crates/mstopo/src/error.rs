//! Crate-wide error type.

use std::path::PathBuf;
use thiserror::Error;

/// Errors produced by any stage of the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// A rod thickness outside the half-open interval `(0, 1]`.
    #[error("thickness {0} is outside (0, 1]")]
    ThicknessOutOfRange(f64),

    /// A target volume fraction that no thickness of the class can reach.
    #[error(
        "volume fraction {target} is unreachable for class {class_id} \
         (attainable range is [{lo:.4}, {hi:.4}])"
    )]
    InfeasibleTarget {
        class_id: usize,
        target: f64,
        lo: f64,
        hi: f64,
    },

    /// A unit cell with no solid pixels.
    #[error("unit cell has no solid pixels")]
    DegenerateCell,

    /// A homogenized tensor with significant normal/shear coupling.
    #[error("cell is not orthotropic: |C16|={c16:.3e}, |C26|={c26:.3e} exceed {limit:.3e}")]
    NonOrthotropicCell { c16: f64, c26: f64, limit: f64 },

    /// A failure while processing one sample of a library sweep.
    #[error("sample (class {class_id}, vf {vf:.4}) failed: {source}")]
    Sample {
        class_id: usize,
        vf: f64,
        #[source]
        source: Box<Error>,
    },

    /// A correlation matrix that cannot be factorized.
    #[error("correlation matrix is not positive definite (nugget {nugget:.1e}); \
             inputs may be duplicated or nearly coincident")]
    IllConditionedData { nugget: f64 },

    /// Every optimizer start failed to produce a finite objective.
    #[error("all {0} optimizer starts failed")]
    FitFailure(usize),

    /// Stiffness components that do not form a positive-definite tensor.
    #[error("stiffness [{0:.4e}, {1:.4e}, {2:.4e}, {3:.4e}] is not positive definite")]
    InvalidStiffness(f64, f64, f64, f64),

    /// A macro system whose stiffness matrix is singular.
    #[error("macro system is singular; check supports and element stiffness")]
    Mechanism,

    /// Non-finite values passed to the design update.
    #[error("non-finite value passed to the design update")]
    RejectedIterate,

    /// A failure inside one iteration of an optimization stage.
    #[error("stage {stage} iteration {iter}: {source}")]
    Stage {
        stage: usize,
        iter: usize,
        #[source]
        source: Box<Error>,
    },

    /// An invalid configuration value or combination.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// An invalid argument to a library routine.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An operating-system level I/O failure.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A file that exists but cannot be interpreted.
    #[error("malformed file {path}: {reason}")]
    Parse { path: PathBuf, reason: String },
}

impl Error {
    /// Wraps an I/O error with the path it occurred on.
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Wraps a parse failure with the offending path.
    pub fn parse(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            reason: reason.into(),
        }
    }
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

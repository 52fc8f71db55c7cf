use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = GeuError> = std::result::Result<T, E>;

/// Coarse grouping of errors, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    /// Bad input data or mismatched shapes.
    Data,
    /// The numerical problem could not be solved as posed.
    Numerical,
    /// Invalid parameter values.
    Parameter,
}

#[derive(Debug, Error)]
pub enum GeuError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not symmetric (max asymmetry {asymmetry:e}, scale {scale:e})")]
    NotSymmetric { asymmetry: f64, scale: f64 },
    #[error("constraint matrix is not positive definite with ridge {ridge:e}; raise the ridge")]
    NotPositiveDefinite { ridge: f64 },
    #[error("only one class present; at least two are required")]
    SingleClass,
    #[error("neighborhood size {k} too large (limit {limit})")]
    KTooLarge { k: usize, limit: usize },
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("negative variance {value} at sample {row}, feature {col}")]
    NegativeVariance { row: usize, col: usize, value: f64 },
    #[error("shape mismatch: expected {expected:?}, got {got:?}")]
    ShapeMismatch { expected: (usize, usize), got: (usize, usize) },
    #[error("requested {requested} projection directions but only {available} eigenvalues are positive")]
    InsufficientPositiveEigenvalues { requested: usize, available: usize },
    #[error("k-NN model has no training points")]
    EmptyModel,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("parse error at line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error("label column {0} not found")]
    MissingLabelColumn(String),
    #[error("non-numeric value at line {line}, column {column}")]
    NonNumericFeature { line: usize, column: String },
    #[error("class {class} has {count} members, fewer than the {k} folds requested")]
    ClassTooSmall { class: usize, count: usize, k: usize },
    #[error("expected 2-dimensional input, got {0} dimensions")]
    NotTwoDimensional(usize),
    #[error("training size {size} exceeds available pool of {available}")]
    SizeTooLarge { size: usize, available: usize },
    #[error("training size {size} is below the class count {classes}")]
    SizeTooSmall { size: usize, classes: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("malformed model file: {0}")]
    MalformedModel(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl GeuError {
    pub fn category(&self) -> ErrorCategory {
        use GeuError::*;
        match self {
            NotSymmetric { .. }
            | NotPositiveDefinite { .. }
            | InsufficientPositiveEigenvalues { .. } => ErrorCategory::Numerical,
            KTooLarge { .. } | InvalidParameter(_) => ErrorCategory::Parameter,
            _ => ErrorCategory::Data,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        GeuError::Io { path: path.into(), source }
    }
}

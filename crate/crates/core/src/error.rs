use thiserror::Error;

/// Errors raised by the kernel toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid algebra shape: {0}")]
    InvalidShape(String),

    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: String, found: String },

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid tolerance: rel_eps={rel_eps}, abs_floor={abs_floor}")]
    InvalidTolerance { rel_eps: f64, abs_floor: f64 },

    #[error("element is not positive (most negative eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("not hermitian (defect {defect:e})")]
    NotHermitian { defect: f64 },

    #[error("kernel is not positive definite (most negative eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("unknown point label `{0}`")]
    UnknownPoint(String),

    #[error("duplicate point label `{0}`")]
    DuplicatePoint(String),

    #[error("a kernel sample needs at least {needed} points, found {found}")]
    TooFewPoints { needed: usize, found: usize },

    #[error("range inclusion violated: column {column} has residual {residual:e}")]
    RangeViolation { column: usize, residual: f64 },

    #[error("elements belong to different kernels")]
    KernelMismatch,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("hypothesis of the bounded extension fails: gap kernel has eigenvalue {min_eigenvalue:e}")]
    GapNotPositive { min_eigenvalue: f64 },

    #[error("Riesz solve over the span failed (residual {residual:e})")]
    DegenerateSpan { residual: f64 },

    #[error("{path}: {message}")]
    Malformed { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

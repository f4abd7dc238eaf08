use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("complete elliptic integral diverges at k = 1")]
    Divergence,

    #[error("matrix is not generating (max minor of the derived matrix {max_minor:.3e} exceeds {bound:.3e})")]
    NotGenerating { max_minor: f64, bound: f64 },

    #[error("inconsistent invariant: {0}")]
    Inconsistent(String),

    #[error("operation not applicable: {0}")]
    NotApplicable(String),

    #[error("degenerate factor vector (p, q, r all zero)")]
    DegenerateFactor,

    #[error("profile equation has no real solution: {0}")]
    NoRealSolution(String),

    #[error("initial condition inconsistent with the profile equation: {0}")]
    InconsistentInit(String),

    #[error("unsupported profile: {0}")]
    Unsupported(String),

    #[error("level value {value} is outside the range of the branch [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("no branch with sheet index {0}")]
    NoBranch(i64),

    #[error("singular point: derivatives undefined at ({x}, {y})")]
    Singular { x: f64, y: f64 },

    #[error("integration step underflow (h = {0:e})")]
    StepUnderflow(f64),

    #[error("root solver failed to converge")]
    NoConvergence,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not {0}")]
    NotStructured(&'static str),

    #[error("condition `{condition}` violated (residual {residual:e})")]
    ConditionViolated { condition: String, residual: f64 },

    #[error("missing parameter `{0}`")]
    MissingParam(String),

    #[error("degenerate inertia: {0}")]
    DegenerateInertia(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("invariant relation violated along trajectory (residual {residual:e})")]
    InvariantViolated { residual: f64 },

    #[error("degenerate curve: {0}")]
    DegenerateCurve(String),

    #[error("K_{index} passes through zero at t = {t}")]
    KZero { index: usize, t: f64 },

    #[error("Newton iteration did not converge (residual {residual:e})")]
    NoConvergence { residual: f64 },

    #[error("Q(lambda) vanishes identically")]
    QIdenticallyZero,

    #[error("relation functions not in involution (residual {residual:e})")]
    InvolutionFailed { residual: f64 },

    #[error("germ inconsistent with branch {branch}: {reason}")]
    BranchInconsistent { branch: usize, reason: String },

    #[error("eigenvector classification ambiguous: {0}")]
    ClassificationAmbiguous(String),

    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("invalid spec: {0}")]
    Spec(String),
}

pub type Result<T> = std::result::Result<T, Error>;

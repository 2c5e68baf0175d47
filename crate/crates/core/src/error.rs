use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("atom count {atoms} exceeds cap {cap}; sample long sequences with the trajectory module instead")]
    CapExceeded { atoms: u128, cap: usize },

    #[error("tensor-grid quadrature over {0} Lindblad operators is not supported (at most 3)")]
    TooManyLindblads(usize),

    #[error("quadrature too coarse: achieved completeness defect {achieved:e} exceeds tolerance {tolerance:e}")]
    InsufficientNodes { achieved: f64, tolerance: f64 },

    #[error("Fock cutoff {cutoff} too small: measured leakage {leakage:e}")]
    CutoffLeakage { cutoff: usize, leakage: f64 },

    #[error("CFL condition violated: kappa*dt = {lhs:e} > {rhs:e}")]
    Cfl { lhs: f64, rhs: f64 },

    #[error("finite-difference step {0:e} outside [1e-6, 1e-2]")]
    StepOutOfRange(f64),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("test function leaks the quadrature window: boundary magnitude {0:e}")]
    SupportLeak(f64),

    #[error("group algebra elements belong to different groups")]
    GroupMismatch,

    #[error("invalid group table: {0}")]
    InvalidGroup(String),

    #[error("representation fails the homomorphism check: residual {0:e}")]
    NotHomomorphism(f64),

    #[error("dagger map rejected: {0}")]
    InvalidDagger(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

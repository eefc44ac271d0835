use thiserror::Error;

/// Errors raised across the laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("digit must be a positive integer, got {0}")]
    InvalidDigit(u64),

    #[error("digit word must be nonempty")]
    EmptyWord,

    #[error("128-bit overflow while composing branches (prefix {prefix:?})")]
    Overflow { prefix: Vec<u64> },

    #[error("(s, w) = ({s_re}+{s_im}i, {w_re}+{w_im}i) lies outside the admissible domain (margin {margin:.4} <= {threshold})")]
    Domain {
        s_re: f64,
        s_im: f64,
        w_re: f64,
        w_im: f64,
        margin: f64,
        threshold: f64,
    },

    #[error("iteration did not converge after {iterations} steps (last residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("precision loss: {0}")]
    Precision(String),

    #[error("moderate-growth certificate fails at m = {m}: c(m) = {value} > {bound}")]
    CertificateFailure { m: u64, value: f64, bound: f64 },

    #[error("empty population")]
    EmptyPopulation,

    #[error("w = {0} was not in the accumulated grid; re-enumerate with it")]
    NotAccumulated(f64),

    #[error("unsupported cost: {0}")]
    UnsupportedCost(String),

    #[error("root not bracketed on [{lo}, {hi}]")]
    RootNotBracketed { lo: f64, hi: f64 },

    #[error("Newton continuation failed at w = {w}: {reason}")]
    Continuation { w: f64, reason: String },

    #[error("trace identity violated at k = {k}: gap {gap:e} exceeds tolerance {tolerance:e}")]
    IdentityViolation { k: usize, gap: f64, tolerance: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;

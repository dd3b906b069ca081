use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("grid dimension {0} is not a power of two >= 32")]
    NonPowerOfTwo(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("lp exponent must satisfy p > 1 (got {0})")]
    BadExponent(f64),
    #[error("frequency ({0}, {1}) outside the lattice [-N/2, N/2)")]
    FrequencyOutOfRange(i64, i64),
    #[error("direction set is empty")]
    EmptySet,
    #[error("direction set carries no lacunarity certificate")]
    MissingCertificate,
    #[error("lambda must lie in (0, 1) (got {0}/{1})")]
    BadLambda(u64, u64),
    #[error("split constant {0}/{1} exceeds the certificate constant")]
    InvalidSplitConstant(u64, u64),
    #[error("angle separation below 1e-13 in generated set")]
    AngleCollision,
    #[error("expected {expected} signs, got {got}")]
    SignCountMismatch { expected: usize, got: usize },
    #[error("family length {lhs} does not match direction count {rhs}")]
    LengthMismatch { lhs: usize, rhs: usize },
    #[error("spectrum not supported in the open second quadrant (offending frequency ({0}, {1}))")]
    SupportViolation(i64, i64),
    #[error("scale chain violated at grid point ({x}, {y}): lambda_{j} = {val:e} > 2^-5 * lambda_{jm1} = {bound:e}")]
    ChainViolation { j: usize, jm1: usize, x: usize, y: usize, val: f64, bound: f64 },
    #[error("sampled Lipschitz quotient {got:e} exceeds declared bound {declared:e} at grid point ({x}, {y})")]
    LipschitzViolation { x: usize, y: usize, got: f64, declared: f64 },
    #[error("lambda_{j} out of range at grid point ({x}, {y}): value {val:e} not in ({lo:e}, {hi:e}]")]
    ValueOutOfRange { j: usize, x: usize, y: usize, val: f64, lo: f64, hi: f64 },
    #[error("unknown operator `{0}`")]
    UnknownOperator(String),
    #[error("unknown ratio suite `{0}`")]
    UnknownSuite(String),
    #[error("need at least 3 rows with positive estimates to fit an exponent (got {0})")]
    TooFewRows(usize),
    #[error("config error: {0}")]
    Config(String),
    #[error("expression error: {0}")]
    Expr(String),
    #[error("bad field file: {0}")]
    BadFileFormat(String),
    #[error("certificate verification failed: {0}")]
    Verify(#[from] VerifyFailure),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Report for a certificate that fails `verify_order`, naming the first
/// offending node.
#[derive(Debug, Clone, Error)]
#[error("{reason} (level {level}, node path {path:?})")]
pub struct VerifyFailure {
    /// Tree depth at which the violation occurred (1 = first generation).
    pub level: u32,
    /// Child indices from the root down to the offending node.
    pub path: Vec<usize>,
    pub reason: String,
}

pub type Result<T> = std::result::Result<T, CoreError>;

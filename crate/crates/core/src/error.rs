use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("N must be even (got {0})")]
    OddSites(usize),
    #[error("N must be at least 4 (got {0})")]
    TooFewSites(usize),
    #[error("r0 must be at least 1")]
    TruncationTooSmall,
    #[error("r0 exceeds {} (r0 = {r0}, N = {sites})", if *ring { "N/2" } else { "N-1" })]
    TruncationTooLarge { r0: usize, sites: usize, ring: bool },
    #[error("operation requires a ring topology")]
    RingOnly,
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("site index {index} out of range for {sites} sites")]
    SiteOutOfRange { index: usize, sites: usize },
    #[error("momentum index {n} outside [-N/2, N/2 - 1] for N = {sites}")]
    MomentumOutOfRange { n: i64, sites: usize },
    #[error("sites must differ (got {0} twice)")]
    SameSite(usize),
    #[error("state has zero norm")]
    ZeroVector,
    #[error("state is not normalized (norm^2 = {0})")]
    NotNormalized(f64),
    #[error("t = {t} is not a discrete instant (N t / 2pi = {shift} is not an integer)")]
    NotDiscreteInstant { t: f64, shift: f64 },
    #[error("sample 2xi = {0} outside [-N, N]")]
    SampleOutOfDomain(f64),
    #[error("r_max must be odd and positive (got {0})")]
    InvalidCutoff(usize),
    #[error("propagator cross-check failed: max difference {difference:e} exceeds {tolerance:e}")]
    CrossCheck { difference: f64, tolerance: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

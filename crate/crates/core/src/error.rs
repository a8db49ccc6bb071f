use thiserror::Error;

/// Errors raised by the laboratory's operations.
///
/// Quantities are reported as `f64` regardless of the scalar type so the
/// error type stays non-generic.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),
    #[error("unsupported cone/norm pair: {cone} with {norm}")]
    UnsupportedPair { cone: String, norm: String },
    #[error("invalid cone: {0}")]
    InvalidCone(String),
    #[error("invalid norm: {0}")]
    InvalidNorm(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("linear program is unbounded")]
    LpUnbounded,
    #[error("simplex iteration limit reached")]
    IterationLimit,
    #[error("norm is not additive on the cone (residual {residual:e})")]
    NotAdditive { residual: f64 },
    #[error("cone has no finite generator representation: {0}")]
    NoGenerators(String),
    #[error("functional is degenerate on the cone (margin {margin:e})")]
    DegeneratePsi { margin: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("horizon too short: found {found} qualifying times, need {needed}")]
    HorizonTooShort { found: usize, needed: usize },
    #[error("lower-bound oracle returned a non-fixed vector (residual {residual:e})")]
    OracleNotFixed { residual: f64 },
    #[error("dual Cesàro means did not stabilize (last Cauchy gap {gap:e} at t = {t})")]
    NoCesaroLimit { gap: f64, t: f64 },
    #[error("semigroup is not bounded (spectral radius {radius})")]
    Unbounded { radius: f64 },
    #[error("overflow evaluating semigroup at t = {t}")]
    Overflow { t: f64 },
}

pub type Result<T> = std::result::Result<T, LabError>;

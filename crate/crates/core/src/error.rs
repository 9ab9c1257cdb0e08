use thiserror::Error;

pub type Result<T> = std::result::Result<T, SearchError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SearchError {
    #[error("invalid dimension: n = {n} (need n >= 2)")]
    InvalidDimension { n: usize },

    #[error("marked vertex {marked} out of range for n = {n}")]
    MarkedOutOfRange { marked: usize, n: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("state not normalized: |psi|^2 = {norm_sqr}")]
    NotNormalized { norm_sqr: f64 },

    #[error("state is not symmetric across unmarked vertices (max deviation {max_deviation:e})")]
    SymmetryViolation { max_deviation: f64 },

    #[error("unsupported parameter: {0}")]
    UnsupportedParameter(String),

    #[error("derivative is singular at gamma = {gamma}")]
    SingularPoint { gamma: f64 },

    #[error("non-finite amplitudes after step {step}")]
    NumericOverflow { step: usize },

    #[error("integration diverged at t = {t}: norm drift {drift:e} exceeds tolerance; use a smaller dt")]
    IntegrationDiverged { t: f64, drift: f64 },

    #[error("expectation value has imaginary residue {residue:e}")]
    HermiticityViolation { residue: f64 },

    #[error("unknown observable `{0}`")]
    UnknownObservable(String),

    #[error("no peak found: {0}")]
    NoPeak(String),

    #[error("inconsistent threshold search: lambda = {lambda} is below lambda_c = {lambda_c} but did not reach the target")]
    Inconsistency { lambda: f64, lambda_c: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown figure id `{0}`")]
    UnknownFigure(String),
}

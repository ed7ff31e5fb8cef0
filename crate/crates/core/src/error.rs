use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller broke a documented precondition (length mismatch, empty input, ...).
    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A parameter is well-formed but outside the supported range.
    #[error("parameter out of range: {0}")]
    ParameterRange(String),

    #[error("no sign change on [{a}, {b}]: f(a) = {fa}, f(b) = {fb}")]
    NoSignChange { a: f64, fa: f64, b: f64, fb: f64 },

    /// Operation needs a square-integrable state but got a delta/discrete one.
    #[error("improper (non-normalizable) strategy: {0}")]
    ImproperState(String),

    #[error("degenerate strategy: amplitudes have zero norm")]
    DegenerateState,

    #[error("representation mismatch: expected {expected}, found {found}")]
    RepresentationMismatch { expected: &'static str, found: &'static str },

    #[error("degenerate density: {0}")]
    DegenerateDensity(String),

    #[error("basis truncation at {levels} levels captures only {captured} of the norm")]
    Truncation { levels: usize, captured: f64 },

    /// The requested check does not apply to the given inputs.
    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("cannot parse strategy literal `{literal}`: {reason}")]
    Literal { literal: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

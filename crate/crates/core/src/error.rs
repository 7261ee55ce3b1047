use thiserror::Error;

/// Errors raised by the library. Invariant violations of otherwise well-formed
/// inputs are reported through verdicts and reports, not through this type.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("graph is disconnected into {} components: {components:?}", components.len())]
    Disconnected { components: Vec<Vec<usize>> },

    #[error("instance too large: size {size} exceeds limit {limit}")]
    SizeBound { size: usize, limit: usize },

    #[error("model constraint violated: {0}")]
    ModelConstraint(String),

    #[error("comparison angle undefined: {0}")]
    UndefinedAngle(String),

    #[error("outside the supported chart: {0}")]
    UnsupportedRegime(String),

    #[error("reverse triangle inequality violated: c = {c} < a + b = {sum}")]
    ReverseTriangle { c: f64, sum: f64 },

    #[error("causal relation has a cycle through distinct points {0} and {1}")]
    CausalCycle(usize, usize),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("construction failed: {0}")]
    Construction(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Error {
    Error::Parameter { name, reason: reason.into() }
}

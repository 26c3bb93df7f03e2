use crate::expr::{EvalError, ResourceError, ZeroTestError};

/// Errors raised by the web analyses.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WebError {
    #[error("a web needs at least {min} functions, got {got}")]
    TooFewFunctions { min: usize, got: usize },
    #[error("unsupported web size d = {0}")]
    UnsupportedSize(usize),
    #[error("web functions f{i} and f{j} are not in general position (their Jacobian vanishes identically)")]
    DegeneratePair { i: usize, j: usize },
    #[error("chart degeneracy: {0}")]
    ChartDegenerate(String),
    #[error("basic invariant a{index} is identically {value}")]
    InvariantDegenerate { index: usize, value: u8 },
    #[error("web equation does not vanish on its parametrization")]
    InvalidWebEquation,
    #[error("partial derivative W_{0} of the web equation vanishes on the sample box")]
    GaugeDegenerate(usize),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("obstruction reduction left non-basis jets: {0}")]
    ReductionIncomplete(String),
    #[error("leading coefficient of {term} vanishes identically: {coefficient}")]
    VanishingLeading { term: String, coefficient: String },
    #[error("rule not applicable: {0}")]
    InapplicableRule(String),
    #[error("sampling verdicts disagree across seeds: {0}")]
    Indeterminate(String),
    #[error(transparent)]
    Sampling(#[from] ZeroTestError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Resource(#[from] ResourceError),
}

pub type Result<T, E = WebError> = std::result::Result<T, E>;

use thiserror::Error;

/// Errors raised by model construction, the samplers and the oracles.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("argument {s} lies outside the analytic domain {domain}")]
    Domain { s: f64, domain: String },

    #[error(
        "no Cramér–Lundberg root: mellin(s) - 1 never changes sign on the searched domain ({0})"
    )]
    NoRoot(String),

    #[error("root found at alpha = {alpha} but drift mu = {mu} is not positive")]
    NonPositiveDrift { alpha: f64, mu: f64 },

    #[error("sum of C_i^alpha is zero; no spine child can be selected")]
    ZeroSpineWeight,

    #[error("no tilted sampler available for this model: {0}")]
    NoTiltAvailable(String),

    #[error("model does not supply the ingredients for this strategy: {0}")]
    MissingIngredients(String),

    #[error("weight {value} exceeds its declared bound {bound}")]
    NonBoundedModel { value: f64, bound: f64 },

    #[error("sum of C_i^alpha = {d} exceeds the declared bound {bound}")]
    SumBoundViolated { d: f64, bound: f64 },

    #[error(
        "node budget of {budget} exhausted before level crossing (max generation {max_generation})"
    )]
    BudgetExceeded {
        budget: u64,
        nodes_expanded: u64,
        max_generation: usize,
    },

    #[error("expected tree size {expected:.3e} exceeds recursion budget {cap:.3e}")]
    RecursionBudget { expected: f64, cap: f64 },

    #[error("model does not have a degenerate perturbation Q")]
    NotDegenerateQ,

    #[error("estimator variant requires Q independent of (N, C)")]
    DependentQ,

    #[error("empty sample")]
    EmptySample,

    #[error("config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// True for failures of the model mathematics (root, drift, spine weight).
    pub fn is_model_math(&self) -> bool {
        matches!(
            self,
            Error::NoRoot(_) | Error::NonPositiveDrift { .. } | Error::ZeroSpineWeight
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} coordinates, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("window too large: estimated {estimate} points exceeds ceiling {ceiling}")]
    WindowTooLarge { estimate: u128, ceiling: u64 },

    #[error("cannot embed {what} from {from} into smaller target {to}")]
    EmbedTarget {
        what: &'static str,
        from: u32,
        to: u32,
    },

    #[error("metric {metric} cannot be applied to {points}")]
    MetricMismatch { metric: String, points: String },

    #[error("empty point set passed to {0}")]
    EmptySet(&'static str),

    #[error("point index {index} is outside the window ({len} points)")]
    StrayPoint { index: usize, len: usize },

    #[error("invalid set system: {0}")]
    InvalidSystem(String),

    #[error("naive Ord recursion limited to {bound} labels, system has {labels}")]
    NaiveTooLarge { labels: usize, bound: usize },

    #[error("Ord interval precondition violated: definite member {0} is not possible")]
    IntervalNotNested(String),

    #[error("invalid sigma: {0}")]
    InvalidSigma(String),

    #[error("budget must be positive")]
    ZeroBudget,

    #[error("naive enumeration of {assignments} assignments exceeds limit {limit}")]
    NaiveInstanceTooLarge { assignments: u128, limit: u128 },

    #[error("fragment closure contradiction: {0}")]
    ClosureContradiction(String),

    #[error("invalid witness: {0}")]
    InvalidWitness(String),

    #[error("ordinal parse error: {0}")]
    OrdinalParse(String),
}

impl Error {
    /// Stable machine-readable code for the error class.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "E_DIMENSION",
            Error::InvalidPoint(_) => "E_POINT",
            Error::InvalidWindow(_) => "E_WINDOW",
            Error::WindowTooLarge { .. } => "E_WINDOW_CEILING",
            Error::EmbedTarget { .. } => "E_EMBED",
            Error::MetricMismatch { .. } => "E_METRIC",
            Error::EmptySet(_) => "E_EMPTY",
            Error::StrayPoint { .. } => "E_STRAY_POINT",
            Error::InvalidSystem(_) => "E_SYSTEM",
            Error::NaiveTooLarge { .. } => "E_NAIVE_BOUND",
            Error::IntervalNotNested(_) => "E_INTERVAL",
            Error::InvalidSigma(_) => "E_SIGMA",
            Error::ZeroBudget => "E_BUDGET",
            Error::NaiveInstanceTooLarge { .. } => "E_NAIVE_BOUND",
            Error::ClosureContradiction(_) => "E_CONTRADICTION",
            Error::InvalidWitness(_) => "E_WITNESS",
            Error::OrdinalParse(_) => "E_ORDINAL",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

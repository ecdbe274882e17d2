use alloc::string::String;

/// Errors raised by the optimization core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid config field `{field}`: {reason}")]
    InvalidConfig {
        field: &'static str,
        reason: &'static str,
    },

    #[error("degenerate embedding")]
    DegenerateEmbedding,

    #[error("non-finite embedding")]
    NonFiniteEmbedding,

    #[error("embedding row {row} has norm {norm}, expected unit norm")]
    NotUnitNorm { row: usize, norm: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("diversity undefined for a single response")]
    SingleResponse,

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("cannot pick {k} centroids from {n} rows")]
    TooManyGroups { k: usize, n: usize },

    #[error("infeasible size constraint: {k} groups of at least {g_min} from {n} rows")]
    InfeasibleMinSize { n: usize, k: usize, g_min: usize },

    #[error("instance too large for enumeration: {0}")]
    TooLarge(String),

    #[error("step {t_cur} is outside the schedule [0, {t_max}]")]
    StepOutOfRange { t_cur: usize, t_max: usize },

    #[error("advantage undefined in singleton group {group}")]
    SingletonGroup { group: usize },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("malformed trajectory: {0}")]
    MalformedTrajectory(String),

    #[error("invalid landscape: {0}")]
    InvalidLandscape(String),

    #[error("example `{example}` has {have} responses, need at least {k}")]
    InsufficientResponses {
        example: String,
        k: usize,
        have: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = core::result::Result<T, Error>;

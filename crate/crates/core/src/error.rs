use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    MalformedRow { line: u64, message: String },

    #[error("line {line}: non-positive price {price}")]
    NonPositivePrice { line: u64, price: f64 },

    #[error("line {line}: date {date} does not follow the previous row")]
    NonIncreasingDates { line: u64, date: String },

    #[error("series too short: need at least {needed} values, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("zero variance input")]
    ZeroVariance,

    #[error("series contains a non-finite value at index {0}")]
    NonFinite(usize),

    #[error("series carries no timestamps")]
    Undated,

    #[error("period {name} [{start}, {end}] does not overlap the series")]
    EmptyPeriod { name: String, start: String, end: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("degenerate polynomial fit (segment length {len}, order {order})")]
    DegenerateFit { len: usize, order: usize },

    #[error("degenerate segment: zero residual variance with q={q}{}", .s.map(|s| format!(" at s={s}")).unwrap_or_default())]
    DegenerateSegment { q: f64, s: Option<usize> },

    #[error("regression needs at least {needed} points, got {got}")]
    InsufficientPoints { needed: usize, got: usize },

    #[error("regressor has zero variance")]
    DegenerateRegressor,

    #[error("q-grid must be uniformly spaced")]
    NonUniformGrid,

    #[error("optimizer did not converge within {0} iterations")]
    NoConvergence(usize),

    #[error("input is not normalized (mean {mean}, variance {variance})")]
    NotNormalized { mean: f64, variance: f64 },

    #[error("non-positive value {0} in tail")]
    NonPositiveTail(f64),

    #[error("tsv: {0}")]
    Tsv(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

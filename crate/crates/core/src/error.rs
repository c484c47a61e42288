use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point {point} lies outside the carrier {carrier}")]
    OutsideCarrier { point: String, carrier: String },

    #[error("non-finite coordinate in point")]
    NonFinite,

    #[error("invalid metric key `{0}`")]
    BadMetricKey(String),

    #[error("invalid map literal `{0}`")]
    BadMapLiteral(String),

    #[error("invalid word `{0}`")]
    BadWord(String),

    #[error("invalid compact set: {0}")]
    InvalidSet(String),

    #[error("operation not supported: {0}")]
    Unsupported(String),

    #[error("empty sample list")]
    EmptySamples,

    #[error("metric mismatch: {0} vs {1}")]
    MetricMismatch(String, String),

    #[error("map is not a declared contraction (declared Lipschitz constant {0})")]
    NotAContraction(String),

    #[error("map does not send the carrier into itself: {0}")]
    EscapesCarrier(String),

    #[error("condensation set has nonzero self-distance h_p(C,C) = {0}")]
    CondensationNotInClass(f64),

    #[error("iteration did not converge within {max_iter} steps (last gap {last_gap})")]
    MaxIterExhausted { max_iter: usize, last_gap: f64 },

    #[error("fixed point has self-distance {0} above tolerance")]
    SelfDistanceNotVanishing(f64),

    #[error("set size cap {cap} exceeded ({size} points)")]
    SizeCap { cap: usize, size: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("degenerate carrier: all sampled pairs have zero distance")]
    DegenerateCarrier,

    #[error("malformed probe: {0}")]
    MalformedProbe(String),

    #[error("sequence is not Cauchy at this resolution: tail diameter {0}")]
    NotCauchy(f64),

    #[error("letter {letter} out of range for {n} maps")]
    LetterOutOfRange { letter: usize, n: usize },

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

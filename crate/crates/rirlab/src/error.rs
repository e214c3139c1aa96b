use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("geometry infeasible: {0}")]
    GeometryInfeasible(String),
    #[error("degenerate room: total absorption area is zero")]
    DegenerateRoom,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("analysis window spans {0} samples, need at least 32")]
    WindowTooShort(usize),
    #[error("boundary order violation: {0}")]
    BoundaryOrderViolation(String),
    #[error("sample rate mismatch: {0} Hz vs {1} Hz")]
    SampleRateMismatch(u32, u32),
    #[error("empty RIR")]
    EmptyRir,
    #[error("insufficient decay range for Schroeder fit")]
    InsufficientDecay,
    #[error("propagation delay exceeds signal length")]
    DelayExceedsSignal,
    #[error("silent signal")]
    SilentSignal,
    #[error("speech corpus unavailable: {0}")]
    CorpusUnavailable(String),
    #[error("dataset size {0} not divisible by {1} folds")]
    IndivisibleN(usize, usize),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("ground-truth distances must be positive")]
    NonPositiveTruth,
    #[error("too few samples: {0}")]
    TooFewSamples(usize),
    #[error("zero variance input")]
    ZeroVariance,
    #[error("unknown sample id {0}")]
    UnknownSampleId(u64),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("wav: {0}")]
    Wav(#[from] hound::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

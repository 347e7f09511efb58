use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("feature vector must be non-empty")]
    EmptyFeatureVector,

    #[error("feature vector has a non-finite entry at position {0}")]
    NonFiniteFeature(usize),

    #[error("cosine distance is undefined for a zero-norm vector")]
    ZeroNorm,

    #[error("class label must be non-empty")]
    EmptyLabel,

    #[error("weibull tail must be non-empty")]
    EmptyTail,

    #[error("weibull tail contains a non-positive or non-finite value {0}")]
    InvalidTailValue(f64),

    #[error("anchor has no negative samples; a one-class model cannot define tails")]
    NoNegatives,

    #[error("negative sample shares the anchor's class {0}")]
    PositiveAsNegative(String),

    #[error("at least two distinct classes are required, found {0}")]
    TooFewClasses(usize),

    #[error("model contains no extreme vectors")]
    EmptyModel,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("protocol generation failed at epoch {epoch}: {reason}")]
    InsufficientSamples { epoch: usize, reason: String },

    #[error("invalid protocol parameters: {0}")]
    InvalidProtocol(String),

    #[error("evaluation records contain no true unknowns")]
    NoUnknowns,

    #[error("evaluation records contain no true knowns")]
    NoKnowns,

    #[error("{0}")]
    Format(String),

    #[error("unsupported model file version {0}")]
    VersionMismatch(u8),

    #[error("model file is corrupt: {0}")]
    Corrupt(String),

    #[error("epoch {epoch}: {source}")]
    Epoch {
        epoch: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

impl Error {
    pub(crate) fn at_epoch(self, epoch: usize) -> Self {
        Error::Epoch {
            epoch,
            source: Box::new(self),
        }
    }
}

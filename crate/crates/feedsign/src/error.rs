//! Crate-wide error type.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A parameter or feature vector has the wrong length for the model it
    /// was paired with.
    #[error("shape mismatch: expected {expected} values, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    /// A perturbed loss evaluation produced a non-finite value, so no
    /// projection can be formed from it.
    #[error("non-finite loss {loss} during perturbed evaluation")]
    NonFiniteLoss { loss: f64 },

    /// A projection value must be finite before it is put on the wire.
    #[error("non-finite projection value {value}")]
    NonFiniteProjection { value: f64 },

    /// The perturbation scale for a finite-difference probe must be positive.
    #[error("perturbation scale must be positive and finite, got {mu}")]
    InvalidMu { mu: f64 },

    /// The sign of NaN is undefined.
    #[error("cannot take the sign of NaN")]
    NanSign,

    /// Aggregating zero client messages is a caller bug, not a quorum of one.
    #[error("cannot aggregate an empty client list")]
    EmptyAggregation,

    /// The privacy budget must be a positive finite number.
    #[error("privacy budget epsilon must be positive and finite, got {epsilon}")]
    InvalidEpsilon { epsilon: f64 },

    #[error("cannot split {samples} samples across {clients} clients")]
    Partition { samples: usize, clients: usize },

    #[error("batch is empty")]
    EmptyBatch,

    #[error("batch index {index} out of range for dataset of {samples} samples")]
    BatchIndex { index: usize, samples: usize },

    #[error("dataset error: {0}")]
    Dataset(String),

    /// Configuration value rejected; `field` names the offending key.
    #[error("config error at `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("config parse error: {0}")]
    ConfigSyntax(#[from] serde_json::Error),

    #[error("orbit format error: {0}")]
    OrbitFormat(String),

    #[error("replay error: {0}")]
    Replay(String),

    /// A training round failed; the step index says how far the run got.
    #[error("round {step} failed: {source}")]
    RoundFailed {
        step: u64,
        #[source]
        source: Box<Error>,
    },

    /// The projection of the true gradient along the probe direction is zero,
    /// so sign comparisons against it are meaningless.
    #[error("degenerate direction: true-gradient projection is zero")]
    DegenerateDirection,

    #[error("all-zero vector where a nonzero gradient is required")]
    ZeroVector,

    #[error("history of {len} evaluated losses is too short to fit (need at least {min})")]
    FitHistory { len: usize, min: usize },

    #[error("floor fit residual {residual} exceeds threshold {threshold}; history does not follow a geometric decay toward a floor")]
    FitQuality { residual: f64, threshold: f64 },

    #[error("loss {loss} at step {step} lies below the stated optimum {loss_star}")]
    LossBelowOptimum { step: u64, loss: f64, loss_star: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("failed to {action} {path}: {source}")]
    File {
        action: &'static str,
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn file(action: &'static str, path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::File { action, path: path.into(), source }
    }
}

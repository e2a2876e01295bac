use thiserror::Error;

/// Errors produced by loaders, validators, the difficulty regressor and the
/// trade-off harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: malformed record: {message}")]
    MalformedRecord {
        path: String,
        line: usize,
        message: String,
    },

    #[error("duplicate image_id {id:?}")]
    DuplicateImageId { id: String },

    #[error("invalid bounding box [{x_min}, {y_min}, {x_max}, {y_max}]: {reason}")]
    InvalidBox {
        x_min: f64,
        y_min: f64,
        x_max: f64,
        y_max: f64,
        reason: String,
    },

    #[error("image {image_id:?}: object box [{x_min}, {y_min}, {x_max}, {y_max}] exceeds image bounds {width}x{height}")]
    BoxOutOfBounds {
        image_id: String,
        x_min: f64,
        y_min: f64,
        x_max: f64,
        y_max: f64,
        width: u32,
        height: u32,
    },

    #[error("empty class label on image {image_id:?}")]
    EmptyClassLabel { image_id: String },

    #[error("non-finite {field} for image {image_id:?}")]
    NonFinite { image_id: String, field: String },

    #[error("negative latency {seconds} for image {image_id:?}")]
    NegativeLatency { image_id: String, seconds: f64 },

    #[error("image {image_id:?} has detections but no latency entry in run {detector_id:?}")]
    MissingLatency {
        image_id: String,
        detector_id: String,
    },

    #[error("image {image_id:?} is not covered by detector run {detector_id:?}")]
    MissingImage {
        image_id: String,
        detector_id: String,
    },

    #[error("detections reference unknown image ids: {ids:?}")]
    UnresolvedImageIds { ids: Vec<String> },

    #[error("feature dimension mismatch: expected {expected}, got {got} (image {image_id:?})")]
    DimensionMismatch {
        image_id: String,
        expected: usize,
        got: usize,
    },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("difficulty scores are empty")]
    EmptyScores,

    #[error("missing difficulty score for image {image_id:?}")]
    MissingScore { image_id: String },

    #[error("cannot normalize a zero feature vector")]
    ZeroVector,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("training requires at least {required} samples, got {got}")]
    TooFewSamples { required: usize, got: usize },

    #[error("solver did not converge within {iterations} iterations (residual violation {violation:.3e})")]
    NonConvergence { iterations: usize, violation: f64 },

    #[error("Kendall's tau is undefined: {0}")]
    DegenerateRanking(String),

    #[error("input sequences have different lengths: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("strategies have unmatched fractions: {0}")]
    UnmatchedFractions(String),

    #[error("no trade-off points to render")]
    EmptyPoints,

    #[error("invalid split policy: {0}")]
    InvalidPolicy(String),
}

pub type Result<T> = std::result::Result<T, Error>;

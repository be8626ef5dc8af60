use thiserror::Error;

/// Errors raised by the hyperbox, ensemble, evaluation and I/O routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("shape mismatch: expected {expected} dimensions, found {found}")]
    Shape { expected: usize, found: usize },

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("feature index {index} out of range for {n_features} features")]
    Index { index: usize, n_features: usize },

    #[error("training set is empty")]
    EmptyTrainingSet,

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("sample {0} has no class label")]
    Unlabeled(usize),

    #[error("model has no hyperboxes")]
    Untrained,

    #[error("correlation undefined: every learner pair has a zero-variance raw-margin vector")]
    UndefinedCorrelation,

    #[error("label sequences differ in length ({truth} true vs {predicted} predicted)")]
    LengthMismatch { truth: usize, predicted: usize },

    #[error("repeat {repeat}, fold {fold}: {source}")]
    InFold {
        repeat: usize,
        fold: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("fold plan error: {0}")]
    Folds(String),

    #[error("parse error at row {row}, column {column}: {reason}")]
    Parse {
        row: usize,
        column: usize,
        reason: String,
    },

    #[error("csv error: {0}")]
    Csv(String),

    #[error("model file error at line {line}: {reason}")]
    ModelFormat { line: usize, reason: String },

    #[error("unsupported model format `{found}` (this build reads `{supported}`)")]
    Version { found: String, supported: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

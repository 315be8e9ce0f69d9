use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("bad IDX magic: expected {expected:#010x}, found {found:#010x}")]
    BadMagic { expected: u32, found: u32 },

    #[error("truncated input: header promises {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },

    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: String, found: String },

    #[error("label {label} out of range for {class_count} classes")]
    LabelOutOfRange { label: usize, class_count: usize },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("unknown property `{0}`")]
    UnknownProperty(String),

    #[error("unknown metric `{0}`")]
    UnknownMetric(String),

    #[error("training loss became non-finite at epoch {epoch}, batch {batch}")]
    DivergedLoss { epoch: usize, batch: usize },

    #[error("confusion counts are empty (total = 0)")]
    EmptyConfusion,

    #[error("AUC needs at least one positive and one negative example")]
    DegenerateClasses,

    #[error("no effectiveness for flow {flow} on class {class}")]
    MissingEffectiveness { flow: usize, class: usize },

    #[error("no votes were cast")]
    NoVotes,

    #[error("class {0} received no votes")]
    NoVotesForClass(usize),

    #[error("value {0} is outside [0, 1]")]
    OutOfRange(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("corrupt knowledgebase: {0}")]
    CorruptKb(String),

    #[error("unsupported knowledgebase version {found} (this build reads up to {supported})")]
    UnsupportedVersion { found: u32, supported: u32 },

    #[error("no confusion counts stored for the {0} split")]
    MissingCounts(String),

    #[error("sample {0} not found")]
    SampleNotFound(usize),

    #[error("I/O failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("flow {flow}: {source}")]
    InFlow {
        flow: String,
        #[source]
        source: Box<Error>,
    },

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// The innermost error, looking through flow attribution.
    pub fn root(&self) -> &Error {
        match self {
            Error::InFlow { source, .. } => source.root(),
            other => other,
        }
    }

    /// Process exit code: 3 for an unreadable knowledgebase, 4 for training
    /// divergence, 2 for every other input problem.
    pub fn exit_code(&self) -> i32 {
        match self.root() {
            Error::CorruptKb(_) | Error::UnsupportedVersion { .. } => 3,
            Error::DivergedLoss { .. } => 4,
            _ => 2,
        }
    }

    pub(crate) fn in_flow(flow: impl ToString, source: Error) -> Self {
        Error::InFlow {
            flow: flow.to_string(),
            source: Box::new(source),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn shape(expected: impl ToString, found: impl ToString) -> Self {
        Error::ShapeMismatch {
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }
}

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty corpus")]
    EmptyCorpus,

    #[error("empty context")]
    EmptyContext,

    #[error("empty trigger word")]
    EmptyTriggerWord,

    #[error("invalid trigger: {0}")]
    InvalidTrigger(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "invalid role name {0:?}: role names may not contain '<', '>', '/' prefix or whitespace"
    )]
    InvalidRole(String),

    #[error("type not in ontology: {0}")]
    TypeNotInOntology(String),

    #[error("document {doc_id}: {source}")]
    Document {
        doc_id: String,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("backend failure: {0}")]
    Backend(String),

    #[error("hinge loss needs at least one positive and one negative score")]
    EmptyScores,

    #[error("untrainable dataset: no instance has both a positive and a negative candidate")]
    UntrainableDataset,

    #[error("invalid counts: correct={n_correct}, pred={n_pred}, gold={n_gold}")]
    InvalidCounts {
        n_correct: usize,
        n_pred: usize,
        n_gold: usize,
    },

    #[error("unknown doc_id in predictions: {0}")]
    UnknownDocId(String),

    #[error("duplicate doc_id: {0}")]
    DuplicateDocId(String),

    #[error("empty dev set")]
    EmptyDevSet,

    #[error("missing {artifact}: {hint}")]
    MissingArtifact { artifact: PathBuf, hint: String },

    #[error("malformed record: {0}")]
    Malformed(String),

    #[error("unsupported model format: {0}")]
    ModelFormat(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_doc(self, doc_id: &str) -> Self {
        Error::Document {
            doc_id: doc_id.to_string(),
            source: Box::new(self),
        }
    }
}

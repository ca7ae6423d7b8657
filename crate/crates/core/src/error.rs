use thiserror::Error;

/// Errors raised by indexing, inference and the command-line layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("EmptyCorpus: no document yields any token")]
    EmptyCorpus,
    #[error("DuplicateDocId: document id {0:?} appears more than once")]
    DuplicateDocId(String),
    #[error("EmptyDocId: document at line {0} has an empty id")]
    EmptyDocId(usize),
    #[error("UnknownDoc: no document with id {0:?}")]
    UnknownDoc(String),
    #[error("UnrankableDoc: document {0:?} has no index terms")]
    UnrankableDoc(String),
    #[error("EmptyQuery: no query term is in the vocabulary")]
    EmptyQuery,
    #[error("NotSinglyConnected: the term layer is not a polytree")]
    NotSinglyConnected,
    #[error("InconsistentEvidence: the evidence has zero probability or possibility")]
    InconsistentEvidence,
    #[error("ZeroEvidence: the evidence has zero probability under the enumerated joint")]
    ZeroEvidence,
    #[error("TooLarge: {what} has {size} elements, the limit is {limit}")]
    TooLarge {
        what: &'static str,
        size: usize,
        limit: usize,
    },
    #[error("SameTerm: mutual information needs two distinct terms, got {0} twice")]
    SameTerm(usize),
    #[error("UnknownNode: node {0} is not in the network")]
    UnknownNode(usize),
    #[error("TableMismatch: {0}")]
    TableMismatch(String),
    #[error("InvalidOptions: {0}")]
    InvalidOptions(String),
    #[error("Parse: {0}")]
    Parse(String),
    #[error("Io: {0}")]
    Io(#[from] std::io::Error),
    #[error("Json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

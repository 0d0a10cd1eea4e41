use imgtopic_core::eval::EvalError;
use imgtopic_core::query_repr::QueryError;
use imgtopic_core::retrieval::RetrievalError;
use imgtopic_core::selection::SelectionError;
use imgtopic_core::vocabmap::MapError;
use imgtopic_core::{CorpusError, PipelineError};

use crate::config::ConfigError;
use crate::formats::FormatError;

pub mod exit {
    pub const OK: i32 = 0;
    pub const FAILURE: i32 = 1;
    pub const MISSING_INPUT: i32 = 2;
    pub const PARSE: i32 = 3;
    pub const UNKNOWN_ID: i32 = 4;
    pub const EMPTY_RESULT: i32 = 5;
    pub const USAGE: i32 = 64;
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration does not set `paths.{0}`")]
    MissingPath(&'static str),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot build index: {0}")]
    Index(#[from] RetrievalError),
    #[error("dictionary: {0}")]
    Dictionary(MapError),
    #[error("unknown image `{0}`")]
    UnknownImage(String),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::MissingPath(_) => exit::MISSING_INPUT,
            Error::Format(e) | Error::Config(ConfigError::File(e)) => match e {
                FormatError::NotFound { .. } => exit::MISSING_INPUT,
                FormatError::Parse { .. } => exit::PARSE,
                FormatError::Io { .. } => exit::FAILURE,
            },
            Error::Config(ConfigError::Invalid(_)) | Error::Index(_) | Error::Dictionary(_) => exit::PARSE,
            Error::UnknownImage(_) => exit::UNKNOWN_ID,
            Error::Pipeline(e) | Error::Eval(EvalError::Pipeline { source: e, .. }) => pipeline_code(e),
            Error::Eval(EvalError::MissingFeatures { .. }) => exit::UNKNOWN_ID,
            Error::Eval(EvalError::EmptyGroundTruth | EvalError::NoImages(_)) => exit::PARSE,
            Error::Usage(_) => exit::USAGE,
            Error::Io(_) => exit::FAILURE,
        }
    }
}

fn pipeline_code(e: &PipelineError) -> i32 {
    match e {
        PipelineError::EmptyResult
        | PipelineError::Query(QueryError::EmptyHistogram(_))
        | PipelineError::Selection(SelectionError::NoQueries)
        | PipelineError::Map(MapError::EmptyProblem) => exit::EMPTY_RESULT,
        PipelineError::Query(QueryError::Corpus(CorpusError::UnknownImage(_))) => exit::UNKNOWN_ID,
        PipelineError::NoDictionary(_) => exit::MISSING_INPUT,
        _ => exit::FAILURE,
    }
}

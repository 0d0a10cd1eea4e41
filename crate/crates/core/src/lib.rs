//! Topic discovery for sets of images.
//!
//! Given feature vectors for a handful of query images, the engine retrieves
//! visually similar tagged images from an indexed corpus, merges and prunes
//! their tags, re-scores the candidate words with a random walk over a
//! word-embedding similarity graph, and optionally maps the result onto a
//! closed dictionary with a fully connected CRF.
//!
//! The crate is `no_std` and needs only `alloc`. File formats, the CLI and
//! the synthetic benchmark live in the `imgtopic` companion crate.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod corpus;
pub mod embedding;
pub mod eval;
pub mod pipeline;
pub mod query_repr;
pub mod retrieval;
pub mod selection;
pub mod vocabmap;

pub use corpus::{Corpus, CorpusBuilder, CorpusError, ImageTextRecord, Lexicon, StopList, TagTriad, WordId};
pub use embedding::{EmbeddingError, EmbeddingTable, EmbeddingTableBuilder};
pub use eval::{evaluate_topic, jaccard, order_images, CurveKey, EvalError, EvalReport, OrderMode, Topic, TopicImage, TopicScores};
pub use pipeline::{Method, PipelineError, PipelineParams, TopicEngine, TopicWords};
pub use query_repr::{DecayMode, QueryHistogram};
pub use retrieval::{FeatureStore, LshIndex, Neighbor};
pub use selection::{ScoredWord, WalkParams, WordGraph};
pub use vocabmap::{CrfProblem, Dictionary, Labeling, Solver};

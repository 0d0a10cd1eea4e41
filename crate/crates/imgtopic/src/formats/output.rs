//! JSON shapes printed by the command-line tool.

use std::collections::BTreeMap;

use imgtopic_core::pipeline::TopicWords;
use imgtopic_core::vocabmap::MappingEntry;
use imgtopic_core::{QueryHistogram, ScoredWord};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredWordJson {
    pub word: String,
    pub score: f64,
}

impl From<&ScoredWord> for ScoredWordJson {
    fn from(w: &ScoredWord) -> Self {
        Self { word: w.word.clone(), score: w.score }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MappingJson {
    pub source: String,
    pub target: String,
    pub unary: f64,
    pub kept: bool,
}

impl From<&MappingEntry> for MappingJson {
    fn from(e: &MappingEntry) -> Self {
        Self { source: e.source.clone(), target: e.target.clone(), unary: e.unary, kept: e.kept }
    }
}

/// Word to weight, for inspecting one query's histogram.
pub type HistogramJson = BTreeMap<String, f64>;

impl TopicOutput {
    pub fn new(words: &TopicWords, n_queries: usize) -> Self {
        Self {
            words: words.words.iter().map(Into::into).collect(),
            method: words.method.name().to_string(),
            n_queries,
            mapping: words.mapping.as_ref().map(|m| m.iter().map(Into::into).collect()),
        }
    }

    pub fn histogram(h: &QueryHistogram) -> HistogramJson {
        h.weights().clone()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicOutput {
    pub words: Vec<ScoredWordJson>,
    pub method: String,
    pub n_queries: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mapping: Option<Vec<MappingJson>>,
}

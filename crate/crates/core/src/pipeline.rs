//! End-to-end topic discovery over an indexed corpus.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::corpus::Corpus;
use crate::embedding::EmbeddingTable;
use crate::query_repr::{self, DecayMode, QueryError, QueryHistogram, DEFAULT_NEIGHBORS, TAU_WINDOW};
use crate::retrieval::{LshIndex, Probe, RetrievalError, DEFAULT_BITS};
use crate::selection::{
    self, candidate_pool, joint_histogram, random_walk, select_top, ScoredWord, SelectionError,
    WalkParams, WordGraph, DEFAULT_CANDIDATE_POOL, DEFAULT_TOP_N,
};
use crate::vocabmap::{self, CrfProblem, Dictionary, LambdaMode, MapError, MappingEntry, Solver};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Retrieval(#[from] RetrievalError),
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error(transparent)]
    Selection(#[from] SelectionError),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error("a dictionary is required for method `{0}`")]
    NoDictionary(Method),
    #[error("no candidate words survived")]
    EmptyResult,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Tfidf,
    Walk,
    WalkMapBaseline,
    WalkMapCrf,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Tfidf, Method::Walk, Method::WalkMapBaseline, Method::WalkMapCrf];

    pub fn name(self) -> &'static str {
        match self {
            Method::Tfidf => "tfidf",
            Method::Walk => "walk",
            Method::WalkMapBaseline => "walk+map_baseline",
            Method::WalkMapCrf => "walk+map_crf",
        }
    }

    pub fn needs_dictionary(self) -> bool {
        matches!(self, Method::WalkMapBaseline | Method::WalkMapCrf)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown method `{0}`")]
pub struct UnknownMethod(pub String);

impl FromStr for Method {
    type Err = UnknownMethod;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| UnknownMethod(s.into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineParams {
    pub bits: u32,
    pub seed: u64,
    pub k_neighbors: usize,
    pub decay_mode: DecayMode,
    pub walk: WalkParams,
    pub candidate_pool: usize,
    pub top_n: usize,
    pub solver: Solver,
    pub lambda_mode: LambdaMode,
}

impl Default for PipelineParams {
    fn default() -> Self {
        Self {
            bits: DEFAULT_BITS,
            seed: 0,
            k_neighbors: DEFAULT_NEIGHBORS,
            decay_mode: DecayMode::Product,
            walk: WalkParams::default(),
            candidate_pool: DEFAULT_CANDIDATE_POOL,
            top_n: DEFAULT_TOP_N,
            solver: Solver::Icm,
            lambda_mode: LambdaMode::InverseCount,
        }
    }
}

/// Topic words produced by one method.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicWords {
    pub method: Method,
    pub words: Vec<ScoredWord>,
    /// Present for the dictionary-mapping methods.
    pub mapping: Option<Vec<MappingEntry>>,
}

impl TopicWords {
    pub fn word_list(&self) -> Vec<&str> {
        self.words.iter().map(|w| w.word.as_str()).collect()
    }
}

/// Read-only view over everything a query needs. Cheap to copy and safe
/// to share between threads.
#[derive(Debug, Clone, Copy)]
pub struct TopicEngine<'a> {
    pub corpus: &'a Corpus,
    pub index: &'a LshIndex,
    pub table: &'a EmbeddingTable,
    pub dictionary: Option<&'a Dictionary>,
    pub params: PipelineParams,
}

impl<'a> TopicEngine<'a> {
    /// Retrieves neighbours of one query image and builds its word histogram.
    pub fn query_histogram(&self, query_id: &str, features: &[f64]) -> Result<QueryHistogram, PipelineError> {
        let depth = self.params.k_neighbors.max(TAU_WINDOW);
        let neighbors = self
            .index
            .knn_probe(features, depth, Probe::Adaptive { max_radius: self.index.bits() })?;
        Ok(query_repr::query_histogram(
            query_id,
            &neighbors,
            self.corpus,
            self.params.k_neighbors,
            self.params.decay_mode,
        )?)
    }

    pub fn describe(&self, histograms: &[QueryHistogram], method: Method) -> Result<TopicWords, PipelineError> {
        let mut all = self.describe_many(histograms, &[method])?;
        Ok(all.remove(&method).expect("requested method is present"))
    }

    /// Runs several methods on the same queries, sharing the random walk.
    pub fn describe_many(
        &self,
        histograms: &[QueryHistogram],
        methods: &[Method],
    ) -> Result<BTreeMap<Method, TopicWords>, PipelineError> {
        let joint = joint_histogram(histograms)?;
        let mut out = BTreeMap::new();
        let mut walked: Option<Vec<ScoredWord>> = None;
        for &method in methods {
            let result = match method {
                Method::Tfidf => TopicWords {
                    method,
                    words: selection::tfidf_rank(&joint, self.corpus.lexicon(), self.params.top_n).words,
                    mapping: None,
                },
                Method::Walk | Method::WalkMapBaseline | Method::WalkMapCrf => {
                    if walked.is_none() {
                        walked = Some(self.walk(&joint)?);
                    }
                    let words = walked.clone().expect("walk computed above");
                    if method == Method::Walk {
                        TopicWords { method, words, mapping: None }
                    } else {
                        self.map_words(method, &words)?
                    }
                }
            };
            if result.words.is_empty() {
                return Err(PipelineError::EmptyResult);
            }
            out.insert(method, result);
        }
        Ok(out)
    }

    /// Random-walk re-scoring of the heaviest joint-histogram words.
    ///
    /// With fewer than two embeddable candidates there is no graph to walk;
    /// the embeddable ones (if any) are returned in joint-histogram order.
    fn walk(&self, joint: &BTreeMap<String, f64>) -> Result<Vec<ScoredWord>, PipelineError> {
        let pool = candidate_pool(joint, self.params.candidate_pool);
        let words: Vec<String> = pool.iter().map(|w| w.word.clone()).collect();
        let scores: Vec<f64> = pool.iter().map(|w| w.score).collect();
        match WordGraph::build(&words, &scores, self.table) {
            Ok(build) => {
                let result = random_walk(&build.graph, self.params.walk)?;
                Ok(select_top(&result.scores, build.graph.words(), self.params.top_n))
            }
            Err(SelectionError::GraphTooSmall(_)) => Ok(pool
                .into_iter()
                .filter(|w| self.table.contains(&w.word))
                .take(self.params.top_n)
                .collect()),
            Err(e) => Err(e.into()),
        }
    }

    fn map_words(&self, method: Method, ranked: &[ScoredWord]) -> Result<TopicWords, PipelineError> {
        let dictionary = self.dictionary.ok_or(PipelineError::NoDictionary(method))?;
        let sources: Vec<&str> = ranked.iter().map(|w| w.word.as_str()).collect();
        let problem = CrfProblem::build(&sources, dictionary, self.table)?.with_lambda_mode(self.params.lambda_mode);
        let labeling = if method == Method::WalkMapCrf {
            vocabmap::crf_map(&problem, self.params.solver)?
        } else {
            vocabmap::independent_assignment(&problem)
        };
        let report = vocabmap::mapping_report(&problem, &labeling);
        let score_of: BTreeMap<&str, f64> = ranked.iter().map(|w| (w.word.as_str(), w.score)).collect();
        let words = report
            .iter()
            .filter(|e| e.kept)
            .map(|e| ScoredWord::new(e.target.clone(), score_of[e.source.as_str()]))
            .collect();
        Ok(TopicWords {
            method,
            words,
            mapping: Some(report),
        })
    }
}

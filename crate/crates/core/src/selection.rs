//! Word selection over the joint histogram of all query images.
//!
//! The baseline ranks words by tf-idf. The main selector builds a complete
//! graph over the candidate words, weights edges by clamped embedding
//! similarity, and runs a random walk with restart
//! `x' = alpha * P x + (1 - alpha) * x0` where `P` is column-stochastic and
//! `x0` holds the joint-histogram weights.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::corpus::Lexicon;
use crate::embedding::EmbeddingTable;
use crate::query_repr::QueryHistogram;

pub const DEFAULT_ALPHA: f64 = 0.85;
pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITER: usize = 10_000;
pub const DEFAULT_CANDIDATE_POOL: usize = 100;
pub const DEFAULT_TOP_N: usize = 10;

/// Tolerance on column sums and initial-score mass when validating a graph.
const STOCHASTIC_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SelectionError {
    #[error("no query histograms to merge")]
    NoQueries,
    #[error("word graph needs at least 2 embeddable words, found {0}")]
    GraphTooSmall(usize),
    #[error("alpha must lie in [0, 1), got {0}")]
    InvalidAlpha(f64),
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("iteration cap must be at least 1")]
    ZeroIterations,
    #[error("{words} words but {scores} scores")]
    LengthMismatch { words: usize, scores: usize },
    #[error("invalid word graph: {0}")]
    InvalidGraph(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredWord {
    pub word: String,
    pub score: f64,
}

impl ScoredWord {
    pub fn new(word: impl Into<String>, score: f64) -> Self {
        Self { word: word.into(), score }
    }
}

/// Descending score, then ascending word.
pub fn rank_order(a: &ScoredWord, b: &ScoredWord) -> Ordering {
    b.score.total_cmp(&a.score).then_with(|| a.word.cmp(&b.word))
}

/// Uniform average of the per-query histograms; each query carries mass `1/Q`.
pub fn joint_histogram(histograms: &[QueryHistogram]) -> Result<BTreeMap<String, f64>, SelectionError> {
    if histograms.is_empty() {
        return Err(SelectionError::NoQueries);
    }
    let share = 1.0 / histograms.len() as f64;
    let mut joint: BTreeMap<String, f64> = BTreeMap::new();
    for h in histograms {
        for (word, &w) in h.weights() {
            *joint.entry(word.clone()).or_insert(0.0) += w * share;
        }
    }
    Ok(joint)
}

/// The `n` best entries of `scores` paired with `words`.
pub fn select_top(scores: &[f64], words: &[String], n: usize) -> Vec<ScoredWord> {
    let mut ranked: Vec<ScoredWord> = words
        .iter()
        .zip(scores)
        .map(|(w, &s)| ScoredWord::new(w.clone(), s))
        .collect();
    ranked.sort_by(rank_order);
    ranked.truncate(n);
    ranked
}

/// The `pool` heaviest words of a joint histogram.
pub fn candidate_pool(joint: &BTreeMap<String, f64>, pool: usize) -> Vec<ScoredWord> {
    let mut ranked: Vec<ScoredWord> = joint
        .iter()
        .map(|(w, &s)| ScoredWord::new(w.clone(), s))
        .collect();
    ranked.sort_by(rank_order);
    ranked.truncate(pool);
    ranked
}

#[derive(Debug, Clone, PartialEq)]
pub struct TfidfRanking {
    pub words: Vec<ScoredWord>,
    /// Words absent from the lexicon; they were scored with a document frequency of 1.
    pub missing_from_lexicon: usize,
}

/// `weight * ln(corpus_size / df)`, best `n` first.
pub fn tfidf_rank(joint: &BTreeMap<String, f64>, lexicon: &Lexicon, n: usize) -> TfidfRanking {
    let corpus_size = lexicon.corpus_size().max(1) as f64;
    let mut missing = 0;
    let mut ranked: Vec<ScoredWord> = joint
        .iter()
        .map(|(word, &w)| {
            let df = lexicon.document_frequency(word).unwrap_or_else(|| {
                missing += 1;
                1
            });
            ScoredWord::new(word.clone(), w * libm::log(corpus_size / f64::from(df)))
        })
        .collect();
    ranked.sort_by(rank_order);
    ranked.truncate(n);
    TfidfRanking {
        words: ranked,
        missing_from_lexicon: missing,
    }
}

/// Candidate words with their initial scores and a column-stochastic
/// transition matrix (stored row-major, `P[i][j]` is the move `j -> i`).
#[derive(Debug, Clone, PartialEq)]
pub struct WordGraph {
    words: Vec<String>,
    initial: Vec<f64>,
    transition: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphBuild {
    pub graph: WordGraph,
    /// Candidates dropped for lack of an embedding.
    pub out_of_vocabulary: usize,
}

impl WordGraph {
    /// Checks every structural invariant: non-negative entries, zero
    /// diagonal, unit column sums and unit initial mass.
    #[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must fail these checks
    pub fn new(words: Vec<String>, initial: Vec<f64>, transition: Vec<f64>) -> Result<Self, SelectionError> {
        let v = words.len();
        if v < 2 {
            return Err(SelectionError::GraphTooSmall(v));
        }
        if initial.len() != v {
            return Err(SelectionError::LengthMismatch { words: v, scores: initial.len() });
        }
        if transition.len() != v * v {
            return Err(SelectionError::InvalidGraph("transition matrix is not V x V"));
        }
        if initial.iter().any(|&x| !(x >= 0.0)) || (initial.iter().sum::<f64>() - 1.0).abs() > STOCHASTIC_TOL {
            return Err(SelectionError::InvalidGraph("initial scores must be non-negative with unit sum"));
        }
        if transition.iter().any(|&p| !(p >= 0.0)) {
            return Err(SelectionError::InvalidGraph("negative transition probability"));
        }
        for j in 0..v {
            if transition[j * v + j] != 0.0 {
                return Err(SelectionError::InvalidGraph("non-zero diagonal"));
            }
            let column: f64 = (0..v).map(|i| transition[i * v + j]).sum();
            if (column - 1.0).abs() > STOCHASTIC_TOL {
                return Err(SelectionError::InvalidGraph("column does not sum to one"));
            }
        }
        Ok(Self { words, initial, transition })
    }

    /// Builds the similarity graph over `words`.
    ///
    /// Words without an embedding are dropped and the remaining scores
    /// re-normalized. Edge weights are `max(0, cos)` off the diagonal; each
    /// column is normalized to one, and a column with no positive weight
    /// becomes uniform over the other nodes.
    pub fn build(words: &[String], scores: &[f64], table: &EmbeddingTable) -> Result<GraphBuild, SelectionError> {
        if words.len() != scores.len() {
            return Err(SelectionError::LengthMismatch { words: words.len(), scores: scores.len() });
        }
        let mut kept_words = Vec::new();
        let mut rows = Vec::new();
        let mut initial = Vec::new();
        for (word, &score) in words.iter().zip(scores) {
            if let Some(row) = table.index_of(word) {
                kept_words.push(word.clone());
                rows.push(row);
                initial.push(score.max(0.0));
            }
        }
        let out_of_vocabulary = words.len() - kept_words.len();
        let v = kept_words.len();
        if v < 2 {
            return Err(SelectionError::GraphTooSmall(v));
        }

        let mass: f64 = initial.iter().sum();
        if mass > 0.0 {
            initial.iter_mut().for_each(|x| *x /= mass);
        } else {
            initial.iter_mut().for_each(|x| *x = 1.0 / v as f64);
        }

        let mut transition = vec![0.0; v * v];
        for i in 0..v {
            for j in (i + 1)..v {
                let s = table.similarity_at(rows[i], rows[j]).max(0.0);
                transition[i * v + j] = s;
                transition[j * v + i] = s;
            }
        }
        for j in 0..v {
            let column: f64 = (0..v).map(|i| transition[i * v + j]).sum();
            for i in 0..v {
                if i == j {
                    continue;
                }
                transition[i * v + j] = if column > 0.0 {
                    transition[i * v + j] / column
                } else {
                    1.0 / (v - 1) as f64
                };
            }
        }

        Ok(GraphBuild {
            graph: Self { words: kept_words, initial, transition },
            out_of_vocabulary,
        })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn initial_scores(&self) -> &[f64] {
        &self.initial
    }

    /// Probability of moving from node `from` to node `to`.
    pub fn transition(&self, to: usize, from: usize) -> f64 {
        self.transition[to * self.words.len() + from]
    }

    /// `alpha * P x + (1 - alpha) * x0` into `out`.
    pub fn step(&self, alpha: f64, x: &[f64], out: &mut [f64]) {
        let v = self.words.len();
        for (i, slot) in out.iter_mut().enumerate() {
            let row = &self.transition[i * v..(i + 1) * v];
            let spread: f64 = row.iter().zip(x).map(|(p, xj)| p * xj).sum();
            *slot = alpha * spread + (1.0 - alpha) * self.initial[i];
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkParams {
    pub alpha: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for WalkParams {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

impl WalkParams {
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<(), SelectionError> {
        if !(0.0..1.0).contains(&self.alpha) {
            return Err(SelectionError::InvalidAlpha(self.alpha));
        }
        if !(self.tol > 0.0) {
            return Err(SelectionError::InvalidTolerance(self.tol));
        }
        if self.max_iter == 0 {
            return Err(SelectionError::ZeroIterations);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WalkResult {
    pub scores: Vec<f64>,
    pub iterations: usize,
    /// L1 change produced by the last iteration.
    pub last_delta: f64,
    pub converged: bool,
}

/// Iterates of the walk, starting after `x0`. Each item is `(x_t, ||x_t - x_{t-1}||_1)`.
pub struct WalkIterates<'g> {
    graph: &'g WordGraph,
    alpha: f64,
    current: Vec<f64>,
    next: Vec<f64>,
}

impl<'g> WalkIterates<'g> {
    pub fn new(graph: &'g WordGraph, alpha: f64) -> Self {
        Self {
            graph,
            alpha,
            current: graph.initial.clone(),
            next: vec![0.0; graph.len()],
        }
    }

    /// Advances one step and returns the new iterate with its L1 change.
    pub fn advance(&mut self) -> (&[f64], f64) {
        self.graph.step(self.alpha, &self.current, &mut self.next);
        let delta = l1_distance(&self.current, &self.next);
        core::mem::swap(&mut self.current, &mut self.next);
        (&self.current, delta)
    }

    pub fn into_scores(self) -> Vec<f64> {
        self.current
    }
}

pub fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Runs the walk until an iteration moves the scores by less than `tol`
/// (L1) or `max_iter` iterations have run.
pub fn random_walk(graph: &WordGraph, params: WalkParams) -> Result<WalkResult, SelectionError> {
    params.validate()?;
    let mut walk = WalkIterates::new(graph, params.alpha);
    let mut iterations = 0;
    let mut last_delta = f64::INFINITY;
    let mut converged = false;
    while iterations < params.max_iter {
        let (_, delta) = walk.advance();
        iterations += 1;
        last_delta = delta;
        if delta < params.tol {
            converged = true;
            break;
        }
    }
    Ok(WalkResult {
        scores: walk.into_scores(),
        iterations,
        last_delta,
        converged,
    })
}

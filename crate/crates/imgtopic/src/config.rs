//! JSON run configuration. Every field has a default except the input
//! paths a command actually needs; relative paths resolve against the
//! directory holding the config file.

use std::path::{Path, PathBuf};

use imgtopic_core::pipeline::PipelineParams;
use imgtopic_core::retrieval::MAX_BITS;
use imgtopic_core::selection::{DEFAULT_ALPHA, DEFAULT_CANDIDATE_POOL, DEFAULT_MAX_ITER, DEFAULT_TOL, DEFAULT_TOP_N};
use imgtopic_core::vocabmap::LambdaMode;
use imgtopic_core::{DecayMode, Solver, WalkParams};
use serde::{Deserialize, Serialize};

use crate::formats::{read_text, FormatError, ParseError};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    pub features: Option<PathBuf>,
    pub triads: Option<PathBuf>,
    /// Built-in English list when absent.
    pub stoplist: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    /// Inferred from the extension when absent.
    pub embeddings_format: Option<EmbeddingFormatName>,
    pub dictionary: Option<PathBuf>,
    pub topics: Option<PathBuf>,
    /// Features of query images that are not part of the corpus.
    pub query_features: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbeddingFormatName {
    Text,
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusConfig {
    pub click_weighting: bool,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        Self { click_weighting: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LshConfig {
    pub bits: u32,
    pub seed: u64,
}

impl Default for LshConfig {
    fn default() -> Self {
        Self { bits: imgtopic_core::retrieval::DEFAULT_BITS, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayModeName {
    #[default]
    Product,
    Ratio,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QueryConfig {
    pub k_neighbors: usize,
    pub decay_mode: DecayModeName,
}

impl Default for QueryConfig {
    fn default() -> Self {
        Self { k_neighbors: imgtopic_core::query_repr::DEFAULT_NEIGHBORS, decay_mode: DecayModeName::Product }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WalkConfig {
    pub alpha: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub candidate_pool: usize,
    pub top_n: usize,
}

impl Default for WalkConfig {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            candidate_pool: DEFAULT_CANDIDATE_POOL,
            top_n: DEFAULT_TOP_N,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverName {
    #[default]
    Icm,
    AlphaExpansion,
    Exhaustive,
}

/// `"inverse_count"` or `{"fixed": 0.5}`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaName {
    #[default]
    InverseCount,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CrfConfig {
    pub solver: SolverName,
    pub lambda_mode: LambdaName,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub paths: Paths,
    pub corpus: CorpusConfig,
    pub lsh: LshConfig,
    pub query: QueryConfig,
    pub walk: WalkConfig,
    pub crf: CrfConfig,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error(transparent)]
    File(#[from] FormatError),
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<Self, ParseError> {
        serde_json::from_str(text).map_err(|e| ParseError::line(e.line(), e.to_string()))
    }

    /// Reads, validates and resolves paths relative to the file.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = read_text(path)?;
        let mut config = Self::from_json(&text).map_err(|e| FormatError::parse(path, e))?;
        config.validate()?;
        if let Some(base) = path.parent() {
            config.resolve_paths(base);
        }
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let p = &mut self.paths;
        for slot in [
            &mut p.features,
            &mut p.triads,
            &mut p.stoplist,
            &mut p.embeddings,
            &mut p.dictionary,
            &mut p.topics,
            &mut p.query_features,
        ] {
            if let Some(rel) = slot.as_ref().filter(|p| p.is_relative()) {
                *slot = Some(base.join(rel));
            }
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if !(1..=MAX_BITS).contains(&self.lsh.bits) {
            return bad(format!("lsh.bits must be in 1..={MAX_BITS}"));
        }
        if self.query.k_neighbors == 0 {
            return bad("query.k_neighbors must be at least 1".into());
        }
        self.walk_params().validate().map_err(|e| ConfigError::Invalid(format!("walk: {e}")))?;
        if self.walk.candidate_pool == 0 || self.walk.top_n == 0 {
            return bad("walk.candidate_pool and walk.top_n must be at least 1".into());
        }
        if let LambdaName::Fixed(l) = self.crf.lambda_mode {
            if !(l.is_finite() && l >= 0.0) {
                return bad("crf.lambda_mode fixed value must be finite and non-negative".into());
            }
        }
        Ok(())
    }

    pub fn walk_params(&self) -> WalkParams {
        WalkParams { alpha: self.walk.alpha, tol: self.walk.tol, max_iter: self.walk.max_iter }
    }

    pub fn pipeline_params(&self) -> PipelineParams {
        PipelineParams {
            bits: self.lsh.bits,
            seed: self.lsh.seed,
            k_neighbors: self.query.k_neighbors,
            decay_mode: match self.query.decay_mode {
                DecayModeName::Product => DecayMode::Product,
                DecayModeName::Ratio => DecayMode::Ratio,
            },
            walk: self.walk_params(),
            candidate_pool: self.walk.candidate_pool,
            top_n: self.walk.top_n,
            solver: match self.crf.solver {
                SolverName::Icm => Solver::Icm,
                SolverName::AlphaExpansion => Solver::AlphaExpansion,
                SolverName::Exhaustive => Solver::Exhaustive,
            },
            lambda_mode: match self.crf.lambda_mode {
                LambdaName::InverseCount => LambdaMode::InverseCount,
                LambdaName::Fixed(l) => LambdaMode::Fixed(l),
            },
        }
    }
}

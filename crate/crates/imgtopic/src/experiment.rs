//! Loading a configured dataset and running evaluations over it.

use std::path::Path;

use imgtopic_core::eval::{evaluate_topic, EvalError, EvalReport, OrderMode, Topic, TopicScores};
use imgtopic_core::{
    Corpus, CorpusBuilder, Dictionary, EmbeddingTable, FeatureStore, LshIndex, Method, StopList, TagTriad,
    TopicEngine,
};
use rayon::prelude::*;

use crate::config::{EmbeddingFormatName, PipelineConfig};
use crate::error::Error;
use crate::formats::{self, EmbeddingFormat};

/// Counts reported by `index`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexStats {
    pub triads: usize,
    pub feature_rows: usize,
    /// Feature rows that also have text, i.e. the retrievable images.
    pub images: usize,
    pub text_records: usize,
    pub lexicon: usize,
    pub buckets: usize,
}

impl std::fmt::Display for IndexStats {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "images={} feature_rows={} text_records={} triads={} lexicon={} buckets={}",
            self.images, self.feature_rows, self.text_records, self.triads, self.lexicon, self.buckets
        )
    }
}

pub struct Indexed {
    pub corpus: Corpus,
    pub index: LshIndex,
    pub stats: IndexStats,
}

/// Builds the corpus and an index over the feature rows that have text.
/// Rows without text could never vote, so they are not indexed.
pub fn build_index(
    triads: &[TagTriad],
    stop: StopList,
    click_weighting: bool,
    features: FeatureStore,
    bits: u32,
    seed: u64,
) -> Result<Indexed, Error> {
    let mut builder = CorpusBuilder::new(stop).click_weighting(click_weighting);
    for t in triads {
        builder.add(t);
    }
    let corpus = builder.finish();
    let feature_rows = features.len();
    let store = features.retain(|id| corpus.contains(id));
    let index = LshIndex::build(store, bits, seed)?;
    let stats = IndexStats {
        triads: triads.len(),
        feature_rows,
        images: index.store().len(),
        text_records: corpus.len(),
        lexicon: corpus.lexicon().len(),
        buckets: index.bucket_count(),
    };
    Ok(Indexed { corpus, index, stats })
}

fn required<'a>(path: &'a Option<std::path::PathBuf>, name: &'static str) -> Result<&'a Path, Error> {
    path.as_deref().ok_or(Error::MissingPath(name))
}

pub fn load_index(config: &PipelineConfig) -> Result<Indexed, Error> {
    let triads = formats::load_triads(required(&config.paths.triads, "triads")?)?;
    let features = formats::load_features(required(&config.paths.features, "features")?)?;
    let stop = match &config.paths.stoplist {
        Some(p) => formats::load_stoplist(p)?,
        None => StopList::default_english(),
    };
    build_index(&triads, stop, config.corpus.click_weighting, features, config.lsh.bits, config.lsh.seed)
}

pub fn load_table(config: &PipelineConfig) -> Result<EmbeddingTable, Error> {
    let path = required(&config.paths.embeddings, "embeddings")?;
    let format = match config.paths.embeddings_format {
        Some(EmbeddingFormatName::Text) => EmbeddingFormat::Text,
        Some(EmbeddingFormatName::Binary) => EmbeddingFormat::Binary,
        None => EmbeddingFormat::from_path(path),
    };
    Ok(formats::load_embeddings(path, format)?)
}

pub fn load_dictionary(path: &Path, table: &EmbeddingTable) -> Result<Dictionary, Error> {
    let words = formats::load_dictionary(path)?;
    Dictionary::new(&words, table).map_err(Error::Dictionary)
}

/// Everything a query or an evaluation needs, loaded from one config.
pub struct Workspace {
    pub params: imgtopic_core::PipelineParams,
    pub indexed: Indexed,
    pub table: EmbeddingTable,
    pub dictionary: Option<Dictionary>,
    pub query_features: Option<FeatureStore>,
}

impl Workspace {
    pub fn load(config: &PipelineConfig) -> Result<Self, Error> {
        let indexed = load_index(config)?;
        let table = load_table(config)?;
        let dictionary = config
            .paths
            .dictionary
            .as_deref()
            .map(|p| load_dictionary(p, &table))
            .transpose()?;
        let query_features = config.paths.query_features.as_deref().map(formats::load_features).transpose()?;
        Ok(Self { params: config.pipeline_params(), indexed, table, dictionary, query_features })
    }

    pub fn engine(&self) -> TopicEngine<'_> {
        TopicEngine {
            corpus: &self.indexed.corpus,
            index: &self.indexed.index,
            table: &self.table,
            dictionary: self.dictionary.as_ref(),
            params: self.params,
        }
    }

    /// Query images come from the dedicated file when configured, else from
    /// the corpus features.
    pub fn query_store(&self) -> &FeatureStore {
        self.query_features.as_ref().unwrap_or(self.indexed.index.store())
    }
}

/// `1..=largest topic size`.
pub fn default_n_values(topics: &[Topic]) -> Vec<usize> {
    (1..=topics.iter().map(|t| t.images.len()).max().unwrap_or(0)).collect()
}

/// Scores topics in parallel and averages them. Topics with missing query
/// features or no images are skipped and listed in the report.
pub fn run_experiment(
    engine: &TopicEngine<'_>,
    queries: &FeatureStore,
    topics: &[Topic],
    modes: &[OrderMode],
    methods: &[Method],
    n_values: &[usize],
) -> Result<EvalReport, EvalError> {
    let results: Vec<Result<TopicScores, EvalError>> = topics
        .par_iter()
        .map(|t| evaluate_topic(engine, queries, t, modes, methods, n_values))
        .collect();
    let mut scored = Vec::with_capacity(results.len());
    let mut skipped = Vec::new();
    for (topic, result) in topics.iter().zip(results) {
        match result {
            Ok(s) => scored.push(s),
            Err(EvalError::MissingFeatures { .. } | EvalError::NoImages(_)) => skipped.push(topic.topic_id.clone()),
            Err(e) => return Err(e),
        }
    }
    Ok(EvalReport::from_topics(modes, methods, n_values, &scored, skipped))
}

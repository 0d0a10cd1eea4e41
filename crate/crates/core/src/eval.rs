//! Topic-level evaluation: Jaccard overlap against ground-truth words as
//! query images are added one at a time.

use alloc::collections::{btree_map, BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::pipeline::{Method, PipelineError, TopicEngine};
use crate::query_repr::QueryHistogram;
use crate::retrieval::FeatureStore;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("ground-truth word set is empty")]
    EmptyGroundTruth,
    #[error("topic `{topic}` has no features for image `{image}`")]
    MissingFeatures { topic: String, image: String },
    #[error("topic `{0}` has no images")]
    NoImages(String),
    #[error("topic `{topic}`: {source}")]
    Pipeline {
        topic: String,
        #[source]
        source: PipelineError,
    },
}

/// `|G ∩ O| / |G ∪ O|` over distinct words. `G` must be non-empty; an empty
/// `O` scores 0.
pub fn jaccard<G, O>(groundtruth: &[G], output: &[O]) -> Result<f64, EvalError>
where
    G: AsRef<str>,
    O: AsRef<str>,
{
    let g: BTreeSet<&str> = groundtruth.iter().map(AsRef::as_ref).collect();
    if g.is_empty() {
        return Err(EvalError::EmptyGroundTruth);
    }
    let o: BTreeSet<&str> = output.iter().map(AsRef::as_ref).collect();
    let inter = g.intersection(&o).count();
    let union = g.union(&o).count();
    Ok(inter as f64 / union as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OrderMode {
    Original,
    BestFirst,
    WorstFirst,
}

impl OrderMode {
    pub const ALL: [OrderMode; 3] = [OrderMode::Original, OrderMode::BestFirst, OrderMode::WorstFirst];

    pub fn name(self) -> &'static str {
        match self {
            OrderMode::Original => "original",
            OrderMode::BestFirst => "best_first",
            OrderMode::WorstFirst => "worst_first",
        }
    }
}

impl fmt::Display for OrderMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown ordering mode `{0}`")]
pub struct UnknownMode(pub String);

impl FromStr for OrderMode {
    type Err = UnknownMode;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        OrderMode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| UnknownMode(s.into()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopicImage {
    pub image_id: String,
    pub relevance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Topic {
    pub topic_id: String,
    pub groundtruth_words: Vec<String>,
    pub images: Vec<TopicImage>,
}

/// Image ids in evaluation order. Sorting is stable, so equal relevance
/// keeps the dataset order.
pub fn order_images(topic: &Topic, mode: OrderMode) -> Vec<&str> {
    let mut images: Vec<&TopicImage> = topic.images.iter().collect();
    match mode {
        OrderMode::Original => {}
        OrderMode::BestFirst => images.sort_by(|a, b| b.relevance.total_cmp(&a.relevance)),
        OrderMode::WorstFirst => images.sort_by(|a, b| a.relevance.total_cmp(&b.relevance)),
    }
    images.into_iter().map(|i| i.image_id.as_str()).collect()
}

/// Key of one curve point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CurveKey {
    pub mode: OrderMode,
    pub method: Method,
    pub n_images: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopicScores {
    pub topic_id: String,
    pub scores: BTreeMap<CurveKey, f64>,
}

/// Scores one topic for every `(mode, method, n)` with `n` in `n_values`.
///
/// Each image's histogram is computed once; the query set for `n` is the
/// first `min(n, images)` images in mode order. Every image must have
/// features in `queries`.
pub fn evaluate_topic(
    engine: &TopicEngine<'_>,
    queries: &FeatureStore,
    topic: &Topic,
    modes: &[OrderMode],
    methods: &[Method],
    n_values: &[usize],
) -> Result<TopicScores, EvalError> {
    if topic.images.is_empty() {
        return Err(EvalError::NoImages(topic.topic_id.clone()));
    }
    let wrap = |source| EvalError::Pipeline { topic: topic.topic_id.clone(), source };
    let mut histograms: BTreeMap<&str, QueryHistogram> = BTreeMap::new();
    for image in &topic.images {
        let features = queries.get(&image.image_id).ok_or_else(|| EvalError::MissingFeatures {
            topic: topic.topic_id.clone(),
            image: image.image_id.clone(),
        })?;
        let h = engine.query_histogram(&image.image_id, features).map_err(wrap)?;
        histograms.insert(image.image_id.as_str(), h);
    }

    let mut scores = BTreeMap::new();
    for &mode in modes {
        let order = order_images(topic, mode);
        let mut done: BTreeMap<usize, BTreeMap<Method, f64>> = BTreeMap::new();
        for &n in n_values {
            let take = n.clamp(1, order.len());
            if let btree_map::Entry::Vacant(slot) = done.entry(take) {
                let prefix: Vec<QueryHistogram> = order[..take].iter().map(|id| histograms[id].clone()).collect();
                let mut per_method = BTreeMap::new();
                match engine.describe_many(&prefix, methods) {
                    Ok(outputs) => {
                        for (method, out) in outputs {
                            per_method.insert(method, jaccard(&topic.groundtruth_words, &out.word_list())?);
                        }
                    }
                    Err(PipelineError::EmptyResult) => {
                        // An empty output scores 0; rerun method by method so
                        // the non-empty ones still count.
                        for &method in methods {
                            let j = match engine.describe(&prefix, method) {
                                Ok(out) => jaccard(&topic.groundtruth_words, &out.word_list())?,
                                Err(PipelineError::EmptyResult) => 0.0,
                                Err(e) => return Err(wrap(e)),
                            };
                            per_method.insert(method, j);
                        }
                    }
                    Err(e) => return Err(wrap(e)),
                }
                slot.insert(per_method);
            }
            for (&method, &j) in &done[&take] {
                scores.insert(CurveKey { mode, method, n_images: n }, j);
            }
        }
    }
    Ok(TopicScores {
        topic_id: topic.topic_id.clone(),
        scores,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub key: CurveKey,
    pub mean_jaccard: f64,
    pub per_topic: Vec<(String, f64)>,
}

/// Mean curves over topics, ordered by mode, method and `n` as requested.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvalReport {
    pub points: Vec<CurvePoint>,
    pub skipped_topics: Vec<String>,
}

impl EvalReport {
    /// Averages `topics` (arithmetic mean). No topics gives no points.
    pub fn from_topics(
        modes: &[OrderMode],
        methods: &[Method],
        n_values: &[usize],
        topics: &[TopicScores],
        skipped_topics: Vec<String>,
    ) -> Self {
        let mut points = Vec::new();
        if !topics.is_empty() {
            for &mode in modes {
                for &method in methods {
                    for &n_images in n_values {
                        let key = CurveKey { mode, method, n_images };
                        let per_topic: Vec<(String, f64)> = topics
                            .iter()
                            .filter_map(|t| t.scores.get(&key).map(|&s| (t.topic_id.clone(), s)))
                            .collect();
                        if per_topic.is_empty() {
                            continue;
                        }
                        let mean = per_topic.iter().map(|(_, s)| s).sum::<f64>() / per_topic.len() as f64;
                        points.push(CurvePoint { key, mean_jaccard: mean, per_topic });
                    }
                }
            }
        }
        Self { points, skipped_topics }
    }

    pub fn mean(&self, mode: OrderMode, method: Method, n_images: usize) -> Option<f64> {
        let key = CurveKey { mode, method, n_images };
        self.points.iter().find(|p| p.key == key).map(|p| p.mean_jaccard)
    }
}

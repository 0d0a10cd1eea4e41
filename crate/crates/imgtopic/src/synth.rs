//! Planted-topic benchmark: a synthetic corpus whose topics are known by
//! construction.
//!
//! Each topic owns ten ground-truth words whose embeddings scatter around a
//! topic direction. Tags are open-vocabulary: a concept is written either
//! as its ground-truth word or as one of a few variants embedded next to
//! it. Each topic also has two distractor tags (heavily clicked but with
//! unrelated embeddings, like site or brand names in click logs). Every
//! image also carries shared noise words and one word unique to it.
//! Corpus features are a topic centroid plus noise; query images blend
//! their own centroid with another topic's in proportion to relevance.

use std::path::{Path, PathBuf};

use imgtopic_core::eval::{Topic, TopicImage};
use imgtopic_core::{EmbeddingTable, EmbeddingTableBuilder, FeatureStore, TagTriad};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::config::{Paths, PipelineConfig};
use crate::formats::{self, FormatError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthParams {
    pub images: usize,
    pub topics: usize,
    pub queries_per_topic: usize,
    pub signature_words: usize,
    /// Open-vocabulary spellings per ground-truth word.
    pub variants_per_word: usize,
    /// Probability that a tag uses the ground-truth spelling of a concept.
    pub canonical_share: f64,
    pub distractor_words: usize,
    pub noise_words: usize,
    pub embedding_dim: usize,
    pub feature_dim: usize,
    /// Per-coordinate spread of topic centroids in feature space.
    pub centroid_scale: f64,
    /// Per-coordinate feature noise.
    pub feature_noise: f64,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            images: 2000,
            topics: 30,
            queries_per_topic: 20,
            signature_words: 10,
            variants_per_word: 2,
            canonical_share: 0.4,
            distractor_words: 2,
            noise_words: 500,
            embedding_dim: 32,
            feature_dim: 64,
            centroid_scale: 0.125,
            feature_noise: 0.09,
            seed: 0,
        }
    }
}

pub struct SynthData {
    pub params: SynthParams,
    pub triads: Vec<TagTriad>,
    pub corpus_features: FeatureStore,
    pub query_features: FeatureStore,
    pub embeddings: EmbeddingTable,
    /// Union of all ground-truth words.
    pub dictionary: Vec<String>,
    pub topics: Vec<Topic>,
}

struct TopicWords {
    signature: Vec<String>,
    /// `variants[i]` are alternative spellings of `signature[i]`.
    variants: Vec<Vec<String>>,
    distractor: Vec<String>,
}

fn gaussian(rng: &mut ChaCha8Rng, dim: usize, scale: f64) -> Vec<f64> {
    (0..dim)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut *rng);
            scale * z
        })
        .collect()
}

fn unit(mut v: Vec<f64>) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    v
}

/// `centroid + N(0, spread^2 / dim)` per coordinate, so the expected squared
/// noise norm is `spread^2`.
fn around(rng: &mut ChaCha8Rng, centroid: &[f64], spread: f64) -> Vec<f64> {
    let noise = Normal::new(0.0, spread / (centroid.len() as f64).sqrt()).expect("finite spread");
    centroid.iter().map(|c| c + noise.sample(&mut *rng)).collect()
}

pub fn generate(params: SynthParams) -> SynthData {
    let p = params;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut table = EmbeddingTableBuilder::new(p.embedding_dim).expect("positive dimension");

    let mut words = Vec::with_capacity(p.topics);
    for t in 0..p.topics {
        let direction = unit(gaussian(&mut rng, p.embedding_dim, 1.0));
        let mut signature = Vec::with_capacity(p.signature_words);
        let mut variants = Vec::with_capacity(p.signature_words);
        for i in 0..p.signature_words {
            let word = format!("sig{t:02}x{i}");
            let v = around(&mut rng, &direction, 1.0);
            table.insert(&word, &v).expect("dimension matches");
            let spellings = (0..p.variants_per_word)
                .map(|k| {
                    let alt = format!("alt{t:02}x{i}v{k}");
                    table.insert(&alt, &around(&mut rng, &v, 0.35)).expect("dimension matches");
                    alt
                })
                .collect();
            signature.push(word);
            variants.push(spellings);
        }
        let distractor = (0..p.distractor_words)
            .map(|i| {
                let word = format!("tag{t:02}x{i}");
                table.insert(&word, &gaussian(&mut rng, p.embedding_dim, 1.0)).expect("dimension matches");
                word
            })
            .collect();
        words.push(TopicWords { signature, variants, distractor });
    }
    let noise: Vec<String> = (0..p.noise_words).map(|i| format!("noise{i}")).collect();
    for w in &noise {
        table.insert(w, &gaussian(&mut rng, p.embedding_dim, 1.0)).expect("dimension matches");
    }

    let centroids: Vec<Vec<f64>> = (0..p.topics).map(|_| gaussian(&mut rng, p.feature_dim, p.centroid_scale)).collect();
    let feature_noise = Normal::new(0.0, p.feature_noise).expect("finite noise");
    let mut corpus_features = FeatureStore::new(p.feature_dim).expect("positive dimension");
    let mut triads = Vec::new();
    let fillers = ["", "the ", "photo of ", "pictures of the "];
    for j in 0..p.images {
        let t = j % p.topics;
        let id = format!("img{j:05}");
        let f: Vec<f64> = centroids[t].iter().map(|c| c + feature_noise.sample(&mut rng)).collect();
        corpus_features.push(id.as_str(), &f).expect("unique id");

        let tw = &words[t];
        let mut add = |text: String, clicks: u64, rng: &mut ChaCha8Rng| {
            let filler = fillers.choose(rng).expect("non-empty");
            triads.push(TagTriad::new(id.as_str(), format!("{filler}{text}"), clicks).expect("valid triad"));
        };
        for _ in 0..rng.random_range(3..=5) {
            let n = rng.random_range(1..=2);
            let concepts: Vec<usize> = (0..tw.signature.len()).collect::<Vec<_>>().choose_multiple(&mut rng, n).copied().collect();
            let text: Vec<&str> = concepts
                .into_iter()
                .map(|c| match tw.variants[c].choose(&mut rng) {
                    Some(alt) if !rng.random_bool(p.canonical_share) => alt.as_str(),
                    _ => tw.signature[c].as_str(),
                })
                .collect();
            let clicks = rng.random_range(5..=40);
            add(text.join(" "), clicks, &mut rng);
        }
        if !tw.distractor.is_empty() && rng.random_bool(0.4) {
            let w = tw.distractor.choose(&mut rng).expect("non-empty").clone();
            let clicks = rng.random_range(50..=100);
            add(w, clicks, &mut rng);
        }
        for _ in 0..2 {
            if let Some(w) = noise.choose(&mut rng) {
                let clicks = rng.random_range(1..=20);
                add(w.clone(), clicks, &mut rng);
            }
        }
        let rare = format!("rare{j:05}");
        table.insert(&rare, &gaussian(&mut rng, p.embedding_dim, 1.0)).expect("dimension matches");
        let clicks = rng.random_range(1..=10);
        add(rare, clicks, &mut rng);
    }

    let mut query_features = FeatureStore::new(p.feature_dim).expect("positive dimension");
    let mut topics = Vec::with_capacity(p.topics);
    for (t, tw) in words.iter().enumerate() {
        let mut images = Vec::with_capacity(p.queries_per_topic);
        for i in 0..p.queries_per_topic {
            let relevance: f64 = rng.random();
            let other = if p.topics > 1 { (t + rng.random_range(1..p.topics)) % p.topics } else { t };
            let own = 0.4 + 0.6 * relevance;
            let f: Vec<f64> = centroids[t]
                .iter()
                .zip(&centroids[other])
                .map(|(a, b)| own * a + (1.0 - own) * b + feature_noise.sample(&mut rng))
                .collect();
            let id = format!("q{t:02}_{i:02}");
            query_features.push(id.as_str(), &f).expect("unique id");
            images.push(TopicImage { image_id: id, relevance });
        }
        topics.push(Topic { topic_id: format!("topic{t:02}"), groundtruth_words: tw.signature.clone(), images });
    }

    let dictionary = words.iter().flat_map(|w| w.signature.iter().cloned()).collect();
    SynthData { params, triads, corpus_features, query_features, embeddings: table.finish(), dictionary, topics }
}

/// Writes every input file plus a `config.json` referencing them, and
/// returns the config path.
pub fn write_dataset(data: &SynthData, dir: &Path, base: &PipelineConfig) -> Result<PathBuf, FormatError> {
    std::fs::create_dir_all(dir).map_err(|e| FormatError::Io { path: dir.to_path_buf(), source: e })?;
    formats::write_triads(&dir.join("triads.tsv"), &data.triads)?;
    formats::write_features(&dir.join("features.txt"), &data.corpus_features)?;
    formats::write_features(&dir.join("query_features.txt"), &data.query_features)?;
    formats::write_embeddings_binary(&dir.join("embeddings.bin"), &data.embeddings)?;
    formats::write_word_list(&dir.join("dictionary.txt"), &data.dictionary)?;
    formats::write_topics(&dir.join("topics.json"), &data.topics)?;
    let mut config = base.clone();
    config.paths = Paths {
        features: Some("features.txt".into()),
        triads: Some("triads.tsv".into()),
        stoplist: None,
        embeddings: Some("embeddings.bin".into()),
        embeddings_format: None,
        dictionary: Some("dictionary.txt".into()),
        topics: Some("topics.json".into()),
        query_features: Some("query_features.txt".into()),
    };
    let path = dir.join("config.json");
    formats::write_file(&path, config.to_json().as_bytes())?;
    Ok(path)
}

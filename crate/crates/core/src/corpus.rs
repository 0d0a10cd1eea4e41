//! Click-log text side of the corpus: tokenizer, stop list, lexicon and
//! per-image word histograms.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

mod stopwords;

pub use stopwords::DEFAULT_STOP_WORDS;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CorpusError {
    #[error("click count must be positive for image `{image_id}`")]
    NonPositiveClicks { image_id: String },
    #[error("image id must be non-empty and contain no whitespace: `{0}`")]
    InvalidImageId(String),
    #[error("unknown image `{0}`")]
    UnknownImage(String),
}

/// One click-log entry: `image_id` was clicked `click_count` times for `query_text`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagTriad {
    image_id: String,
    query_text: String,
    click_count: u64,
}

impl TagTriad {
    pub fn new(
        image_id: impl Into<String>,
        query_text: impl Into<String>,
        click_count: u64,
    ) -> Result<Self, CorpusError> {
        let image_id = image_id.into();
        if image_id.is_empty() || image_id.chars().any(char::is_whitespace) {
            return Err(CorpusError::InvalidImageId(image_id));
        }
        if click_count == 0 {
            return Err(CorpusError::NonPositiveClicks { image_id });
        }
        Ok(Self {
            image_id,
            query_text: query_text.into(),
            click_count,
        })
    }

    pub fn image_id(&self) -> &str {
        &self.image_id
    }

    pub fn query_text(&self) -> &str {
        &self.query_text
    }

    pub fn click_count(&self) -> u64 {
        self.click_count
    }
}

/// Lowercase tokens ignored during tokenization.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StopList {
    words: BTreeSet<String>,
}

impl StopList {
    pub fn empty() -> Self {
        Self::default()
    }

    /// The bundled list of English function words.
    pub fn default_english() -> Self {
        Self::from_words(DEFAULT_STOP_WORDS.iter().copied())
    }

    /// Entries are trimmed and lowercased; blank entries are ignored.
    pub fn from_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let words = words
            .into_iter()
            .map(|w| w.as_ref().trim().to_lowercase())
            .filter(|w| !w.is_empty())
            .collect();
        Self { words }
    }

    /// One token per line.
    pub fn parse(text: &str) -> Self {
        Self::from_words(text.lines())
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }
}

pub const MIN_TOKEN_LEN: usize = 2;

/// Splits `text` into lowercase words.
///
/// Text is lowercased and split on every character that is not alphanumeric
/// (in the Unicode sense). A piece is kept only if it consists solely of
/// `a-z` and `0-9`, is at least [`MIN_TOKEN_LEN`] long, and is not
/// stop-listed. Pieces written in other scripts or carrying accents are
/// dropped whole rather than split.
pub fn tokenize(text: &str, stop: &StopList) -> Vec<String> {
    let lowered = text.to_lowercase();
    lowered
        .split(|c: char| !c.is_alphanumeric())
        .filter(|piece| {
            piece.len() >= MIN_TOKEN_LEN
                && piece.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit())
                && !stop.contains(piece)
        })
        .map(ToString::to_string)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WordId(pub u32);

impl WordId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Word/id bijection with document frequencies over the ingested images.
///
/// Ids are dense and assigned in lexicographic word order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Lexicon {
    words: Vec<String>,
    ids: BTreeMap<String, WordId>,
    document_frequency: Vec<u32>,
    corpus_size: usize,
}

impl Lexicon {
    pub fn id(&self, word: &str) -> Option<WordId> {
        self.ids.get(word).copied()
    }

    pub fn word(&self, id: WordId) -> &str {
        &self.words[id.index()]
    }

    pub fn document_frequency(&self, word: &str) -> Option<u32> {
        self.id(word).map(|id| self.document_frequency[id.index()])
    }

    pub fn document_frequency_of(&self, id: WordId) -> u32 {
        self.document_frequency[id.index()]
    }

    /// Number of ingested images, including those whose text tokenized to nothing.
    pub fn corpus_size(&self) -> usize {
        self.corpus_size
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// `(word, document frequency)` in id order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, u32)> {
        self.words
            .iter()
            .map(String::as_str)
            .zip(self.document_frequency.iter().copied())
    }
}

/// Word histogram of one corpus image, sorted by word id.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageTextRecord {
    image_id: String,
    histogram: Vec<(WordId, f64)>,
}

impl ImageTextRecord {
    pub fn image_id(&self) -> &str {
        &self.image_id
    }

    pub fn histogram(&self) -> &[(WordId, f64)] {
        &self.histogram
    }

    pub fn weight(&self, word: WordId) -> f64 {
        self.histogram
            .binary_search_by_key(&word, |&(id, _)| id)
            .map_or(0.0, |i| self.histogram[i].1)
    }

    pub fn total_weight(&self) -> f64 {
        self.histogram.iter().map(|&(_, w)| w).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.histogram.is_empty()
    }
}

/// Single-writer accumulator for triads. [`CorpusBuilder::finish`] freezes it.
#[derive(Debug, Clone)]
pub struct CorpusBuilder {
    stop: StopList,
    click_weighting: bool,
    interned: BTreeMap<String, u32>,
    images: BTreeMap<String, BTreeMap<u32, u64>>,
}

impl CorpusBuilder {
    pub fn new(stop: StopList) -> Self {
        Self {
            stop,
            click_weighting: true,
            interned: BTreeMap::new(),
            images: BTreeMap::new(),
        }
    }

    /// When off, every occurrence counts once regardless of its click count.
    pub fn click_weighting(mut self, on: bool) -> Self {
        self.click_weighting = on;
        self
    }

    pub fn add(&mut self, triad: &TagTriad) {
        let multiplier = if self.click_weighting { triad.click_count } else { 1 };
        let tokens = tokenize(&triad.query_text, &self.stop);
        let counts = self.images.entry(triad.image_id.clone()).or_default();
        for token in tokens {
            let next = self.interned.len() as u32;
            let id = *self.interned.entry(token).or_insert(next);
            let slot = counts.entry(id).or_insert(0);
            *slot = slot.saturating_add(multiplier);
        }
    }

    pub fn finish(self) -> Corpus {
        // Re-number words lexicographically so the result is independent of triad order.
        let mut remap = alloc::vec![0u32; self.interned.len()];
        let mut words = Vec::with_capacity(self.interned.len());
        let mut ids = BTreeMap::new();
        for (rank, (word, old)) in self.interned.into_iter().enumerate() {
            remap[old as usize] = rank as u32;
            ids.insert(word.clone(), WordId(rank as u32));
            words.push(word);
        }

        let mut document_frequency = alloc::vec![0u32; words.len()];
        let corpus_size = self.images.len();
        let records = self
            .images
            .into_iter()
            .map(|(image_id, counts)| {
                let mut histogram: Vec<(WordId, f64)> = counts
                    .into_iter()
                    .map(|(old, count)| (WordId(remap[old as usize]), count as f64))
                    .collect();
                histogram.sort_unstable_by_key(|&(id, _)| id);
                for &(id, _) in &histogram {
                    document_frequency[id.index()] += 1;
                }
                let record = ImageTextRecord {
                    image_id: image_id.clone(),
                    histogram,
                };
                (image_id, record)
            })
            .collect();

        Corpus {
            lexicon: Lexicon {
                words,
                ids,
                document_frequency,
                corpus_size,
            },
            records,
        }
    }
}

/// Immutable text store: lexicon plus one record per ingested image.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    lexicon: Lexicon,
    records: BTreeMap<String, ImageTextRecord>,
}

impl Corpus {
    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    pub fn text_histogram(&self, image_id: &str) -> Result<&ImageTextRecord, CorpusError> {
        self.records
            .get(image_id)
            .ok_or_else(|| CorpusError::UnknownImage(image_id.to_string()))
    }

    pub fn contains(&self, image_id: &str) -> bool {
        self.records.contains_key(image_id)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> impl Iterator<Item = &ImageTextRecord> {
        self.records.values()
    }
}

pub fn ingest_triads<'a, I>(triads: I, stop: StopList, click_weighting: bool) -> Corpus
where
    I: IntoIterator<Item = &'a TagTriad>,
{
    let mut builder = CorpusBuilder::new(stop).click_weighting(click_weighting);
    for triad in triads {
        builder.add(triad);
    }
    builder.finish()
}

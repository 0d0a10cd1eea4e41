//! Pre-trained word vectors and cosine similarity between words.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EmbeddingError {
    #[error("embedding dimension must be positive")]
    ZeroDimension,
    #[error("vector for `{word}` has {found} components, expected {expected}")]
    DimensionMismatch {
        word: String,
        expected: usize,
        found: usize,
    },
    #[error("word `{0}` has no embedding")]
    MissingWord(String),
    #[error("dictionary is empty")]
    EmptyDictionary,
}

/// Counters for entries skipped or overwritten while building a table.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadWarnings {
    pub zero_norm: usize,
    pub non_finite: usize,
    pub duplicates: usize,
}

impl LoadWarnings {
    pub fn total(&self) -> usize {
        self.zero_norm + self.non_finite + self.duplicates
    }
}

#[derive(Debug, Clone)]
pub struct EmbeddingTableBuilder {
    dim: usize,
    words: Vec<String>,
    index: BTreeMap<String, usize>,
    raw: Vec<f64>,
    warnings: LoadWarnings,
}

impl EmbeddingTableBuilder {
    pub fn new(dim: usize) -> Result<Self, EmbeddingError> {
        if dim == 0 {
            return Err(EmbeddingError::ZeroDimension);
        }
        Ok(Self {
            dim,
            words: Vec::new(),
            index: BTreeMap::new(),
            raw: Vec::new(),
            warnings: LoadWarnings::default(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Adds `word`. Vectors with non-finite entries or zero norm are skipped
    /// and counted; a repeated word replaces the earlier vector.
    pub fn insert(&mut self, word: &str, values: &[f64]) -> Result<(), EmbeddingError> {
        if values.len() != self.dim {
            return Err(EmbeddingError::DimensionMismatch {
                word: word.to_string(),
                expected: self.dim,
                found: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            self.warnings.non_finite += 1;
            return Ok(());
        }
        if values.iter().all(|&v| v == 0.0) {
            self.warnings.zero_norm += 1;
            return Ok(());
        }
        match self.index.get(word) {
            Some(&slot) => {
                self.warnings.duplicates += 1;
                self.raw[slot * self.dim..(slot + 1) * self.dim].copy_from_slice(values);
            }
            None => {
                self.index.insert(word.to_string(), self.words.len());
                self.words.push(word.to_string());
                self.raw.extend_from_slice(values);
            }
        }
        Ok(())
    }

    pub fn finish(self) -> EmbeddingTable {
        let dim = self.dim;
        let mut unit = self.raw.clone();
        for row in unit.chunks_exact_mut(dim) {
            let norm = libm::sqrt(row.iter().map(|v| v * v).sum::<f64>());
            for v in row.iter_mut() {
                *v /= norm;
            }
        }
        EmbeddingTable {
            dim,
            words: self.words,
            index: self.index,
            raw: self.raw,
            unit,
            warnings: self.warnings,
        }
    }
}

/// Immutable word → vector table.
///
/// Vectors are kept as loaded (for writing back out) and L2-normalized
/// once, so a similarity is a single inner product.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    words: Vec<String>,
    index: BTreeMap<String, usize>,
    raw: Vec<f64>,
    unit: Vec<f64>,
    warnings: LoadWarnings,
}

impl EmbeddingTable {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn warnings(&self) -> LoadWarnings {
        self.warnings
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    /// Words in insertion order.
    pub fn words(&self) -> &[String] {
        &self.words
    }

    /// The vector as loaded.
    pub fn vector(&self, word: &str) -> Option<&[f64]> {
        self.index_of(word).map(|i| self.raw_row(i))
    }

    pub fn raw_row(&self, index: usize) -> &[f64] {
        &self.raw[index * self.dim..(index + 1) * self.dim]
    }

    pub fn unit_row(&self, index: usize) -> &[f64] {
        &self.unit[index * self.dim..(index + 1) * self.dim]
    }

    /// Cosine similarity of two rows, clamped to `[-1, 1]`.
    pub fn similarity_at(&self, a: usize, b: usize) -> f64 {
        if a == b {
            return 1.0;
        }
        let dot: f64 = self
            .unit_row(a)
            .iter()
            .zip(self.unit_row(b))
            .map(|(x, y)| x * y)
            .sum();
        dot.clamp(-1.0, 1.0)
    }

    pub fn similarity(&self, a: &str, b: &str) -> Result<f64, EmbeddingError> {
        Ok(self.similarity_at(self.require(a)?, self.require(b)?))
    }

    /// Most similar dictionary entry to `word` as `(position in dictionary, similarity)`.
    /// The first of several equally similar entries wins.
    pub fn nearest_in_dictionary<S: AsRef<str>>(
        &self,
        word: &str,
        dictionary: &[S],
    ) -> Result<(usize, f64), EmbeddingError> {
        let source = self.require(word)?;
        let mut best: Option<(usize, f64)> = None;
        for (pos, entry) in dictionary.iter().enumerate() {
            let s = self.similarity_at(source, self.require(entry.as_ref())?);
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((pos, s));
            }
        }
        best.ok_or(EmbeddingError::EmptyDictionary)
    }

    fn require(&self, word: &str) -> Result<usize, EmbeddingError> {
        self.index_of(word)
            .ok_or_else(|| EmbeddingError::MissingWord(word.to_string()))
    }
}

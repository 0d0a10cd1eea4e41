//! Turns the retrieval results of one query image into a word histogram.
//!
//! Each retrieved image votes with its own L1-normalized word histogram,
//! scaled by an exponential decay of its visual distance. The decay
//! constant is a third of the mean distance of the best twenty neighbours,
//! so it adapts to how good the retrieval was for that query. Words under
//! 0.1% of the total mass are discarded and the rest re-normalized.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::corpus::{Corpus, CorpusError, WordId};
use crate::retrieval::Neighbor;

/// Neighbours averaged for the decay constant.
pub const TAU_WINDOW: usize = 20;
pub const DEFAULT_NEIGHBORS: usize = 20;
/// Minimum share of the total weight a word needs to survive pruning.
pub const PRUNE_SHARE: f64 = 0.001;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QueryError {
    #[error("query `{0}` produced no words")]
    EmptyHistogram(String),
    #[error("neighbour count must be at least 1")]
    ZeroK,
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

/// How the decay constant enters the neighbour weight.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum DecayMode {
    /// `exp(-distance * tau)`
    #[default]
    Product,
    /// `exp(-distance / tau)`
    Ratio,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayConstant {
    pub tau: f64,
    /// Set when every distance was zero (or none were given) and `tau` fell back to 1.
    pub degenerate: bool,
}

/// A third of the mean of the first [`TAU_WINDOW`] distances.
pub fn decay_constant(distances: &[f64]) -> DecayConstant {
    let window = &distances[..distances.len().min(TAU_WINDOW)];
    let mean = window.iter().sum::<f64>() / window.len().max(1) as f64;
    let tau = mean / 3.0;
    if tau > 0.0 {
        DecayConstant { tau, degenerate: false }
    } else {
        DecayConstant { tau: 1.0, degenerate: true }
    }
}

pub fn neighbor_weight(distance: f64, tau: f64, mode: DecayMode) -> f64 {
    match mode {
        DecayMode::Product => libm::exp(-distance * tau),
        DecayMode::Ratio => libm::exp(-distance / tau),
    }
}

/// L1-normalized word weights describing one query image.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryHistogram {
    query_id: String,
    weights: BTreeMap<String, f64>,
    tau: f64,
}

impl QueryHistogram {
    /// Normalizes arbitrary non-negative weights to unit mass; zero entries are dropped.
    pub fn from_weights<I, S>(query_id: &str, weights: I) -> Result<Self, QueryError>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let mut map = BTreeMap::new();
        for (word, w) in weights {
            if w > 0.0 {
                *map.entry(word.into()).or_insert(0.0) += w;
            }
        }
        let total: f64 = map.values().sum();
        if total <= 0.0 {
            return Err(QueryError::EmptyHistogram(query_id.to_string()));
        }
        for w in map.values_mut() {
            *w /= total;
        }
        Ok(Self {
            query_id: query_id.to_string(),
            weights: map,
            tau: 1.0,
        })
    }

    pub fn query_id(&self) -> &str {
        &self.query_id
    }

    pub fn weights(&self) -> &BTreeMap<String, f64> {
        &self.weights
    }

    pub fn weight(&self, word: &str) -> f64 {
        self.weights.get(word).copied().unwrap_or(0.0)
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Builds the histogram of `query_id` from its ranked neighbours.
///
/// `neighbors` must be ascending by distance. The decay constant uses the
/// first [`TAU_WINDOW`] of them; the first `k` vote.
pub fn query_histogram(
    query_id: &str,
    neighbors: &[Neighbor],
    corpus: &Corpus,
    k: usize,
    mode: DecayMode,
) -> Result<QueryHistogram, QueryError> {
    if k == 0 {
        return Err(QueryError::ZeroK);
    }
    let distances: Vec<f64> = neighbors.iter().map(|n| n.distance).collect();
    let DecayConstant { tau, .. } = decay_constant(&distances);

    // Canonical voting order makes the sums independent of how ties were listed.
    let mut voters: Vec<&Neighbor> = neighbors.iter().take(k).collect();
    voters.sort_by(|a, b| {
        a.distance
            .total_cmp(&b.distance)
            .then_with(|| a.image_id.cmp(&b.image_id))
    });

    let mut mass: BTreeMap<WordId, f64> = BTreeMap::new();
    for neighbor in voters {
        let record = corpus.text_histogram(&neighbor.image_id)?;
        let total = record.total_weight();
        if total <= 0.0 {
            continue;
        }
        let a = neighbor_weight(neighbor.distance, tau, mode);
        for &(word, count) in record.histogram() {
            *mass.entry(word).or_insert(0.0) += a * count / total;
        }
    }

    let total: f64 = mass.values().sum();
    if total <= 0.0 {
        return Err(QueryError::EmptyHistogram(query_id.to_string()));
    }
    let lexicon = corpus.lexicon();
    let kept: BTreeMap<String, f64> = mass
        .into_iter()
        .map(|(word, w)| (word, w / total))
        .filter(|&(_, share)| share >= PRUNE_SHARE)
        .map(|(word, share)| (lexicon.word(word).to_string(), share))
        .collect();
    let kept_total: f64 = kept.values().sum();
    if kept.is_empty() {
        return Err(QueryError::EmptyHistogram(query_id.to_string()));
    }
    let weights = kept.into_iter().map(|(w, s)| (w, s / kept_total)).collect();
    Ok(QueryHistogram {
        query_id: query_id.to_string(),
        weights,
        tau,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{ingest_triads, StopList, TagTriad};
    use alloc::format;
    use alloc::vec;
    use proptest::prelude::*;

    fn n(id: &str, d: f64) -> Neighbor {
        Neighbor { image_id: id.into(), distance: d }
    }

    fn corpus(rows: &[(&str, &str, u64)]) -> Corpus {
        let triads: Vec<_> = rows
            .iter()
            .map(|(i, t, c)| TagTriad::new(*i, *t, *c).unwrap())
            .collect();
        ingest_triads(&triads, StopList::empty(), true)
    }

    #[test]
    fn tau_is_a_third_of_the_mean() {
        assert_eq!(decay_constant(&[3.0; 20]).tau, 1.0);
        assert!((decay_constant(&[1.0, 2.0, 3.0]).tau - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn tau_window_is_twenty() {
        let mut d = vec![3.0; 20];
        d.extend([300.0; 5]);
        assert_eq!(decay_constant(&d).tau, 1.0);
    }

    #[test]
    fn tau_falls_back_when_all_distances_are_zero() {
        let c = decay_constant(&[0.0; 7]);
        assert_eq!(c, DecayConstant { tau: 1.0, degenerate: true });
        assert_eq!(neighbor_weight(0.0, c.tau, DecayMode::Product), 1.0);
    }

    #[test]
    fn weight_values() {
        assert_eq!(neighbor_weight(0.0, 0.37, DecayMode::Product), 1.0);
        assert_eq!(neighbor_weight(0.0, 0.37, DecayMode::Ratio), 1.0);
        let ln2 = core::f64::consts::LN_2;
        assert!((neighbor_weight(ln2, 1.0, DecayMode::Product) - 0.5).abs() < 1e-15);
        assert!((neighbor_weight(ln2, 1.0, DecayMode::Ratio) - 0.5).abs() < 1e-15);
        assert!((neighbor_weight(3.0, 1.0, DecayMode::Product) - 0.049_787_068_367_863_944).abs() < 1e-15);
    }

    #[test]
    fn single_neighbor_is_just_normalized() {
        let c = corpus(&[("i1", "aa bb", 2)]);
        for d in [0.0, 0.5, 7.0] {
            let h = query_histogram("q", &[n("i1", d)], &c, 20, DecayMode::Product).unwrap();
            assert_eq!(h.weight("aa"), 0.5);
            assert_eq!(h.weight("bb"), 0.5);
        }
    }

    #[test]
    fn equidistant_neighbors_split_evenly() {
        let c = corpus(&[("i1", "aa", 1), ("i2", "bb", 5)]);
        let h = query_histogram("q", &[n("i1", 1.0), n("i2", 1.0)], &c, 20, DecayMode::Product).unwrap();
        assert!((h.weight("aa") - 0.5).abs() < 1e-15);
        assert!((h.weight("bb") - 0.5).abs() < 1e-15);
    }

    // Frozen from a direct evaluation: tau = 2/3, weights exp(-2/3), exp(-4/3), exp(-2);
    // `rare` holds 1.48e-4 of the mass before pruning.
    #[test]
    fn three_neighbor_fixture_with_pruning() {
        let c = corpus(&[
            ("i1", "press", 1),
            ("i2", "press ink", 1),
            ("i3", "map", 999),
            ("i3", "rare", 1),
        ]);
        let neighbors = [n("i1", 1.0), n("i2", 2.0), n("i3", 3.0)];
        let h = query_histogram("q", &neighbors, &c, 20, DecayMode::Product).unwrap();
        assert!((h.tau() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(h.len(), 3);
        assert_eq!(h.weight("rare"), 0.0);
        assert!((h.weight("press") - 0.707_307_214_119_216_5).abs() < 1e-12);
        assert!((h.weight("ink") - 0.144_482_039_767_370_56).abs() < 1e-12);
        assert!((h.weight("map") - 0.148_210_746_113_412_95).abs() < 1e-12);
        assert!((h.weights().values().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn only_top_k_vote() {
        let c = corpus(&[("i1", "aa", 1), ("i2", "bb", 1)]);
        let h = query_histogram("q", &[n("i1", 1.0), n("i2", 1.5)], &c, 1, DecayMode::Product).unwrap();
        assert_eq!(h.weight("aa"), 1.0);
        assert_eq!(h.len(), 1);
    }

    #[test]
    fn everything_pruned_is_an_error() {
        // 2000 equally weighted words are each 0.05% of the mass.
        let text: Vec<String> = (0..2000).map(|i| format!("w{i}")).collect();
        let c = corpus(&[("i1", &text.join(" "), 1)]);
        assert_eq!(
            query_histogram("q", &[n("i1", 0.0)], &c, 20, DecayMode::Product),
            Err(QueryError::EmptyHistogram("q".into()))
        );
    }

    #[test]
    fn unknown_neighbor_and_empty_inputs() {
        let c = corpus(&[("i1", "aa", 1)]);
        assert!(matches!(
            query_histogram("q", &[n("zz", 1.0)], &c, 20, DecayMode::Product),
            Err(QueryError::Corpus(CorpusError::UnknownImage(_)))
        ));
        assert!(matches!(
            query_histogram("q", &[], &c, 20, DecayMode::Product),
            Err(QueryError::EmptyHistogram(_))
        ));
    }

    fn fixture_corpus() -> Corpus {
        corpus(&[
            ("i0", "aa bb", 3),
            ("i1", "bb cc cc", 1),
            ("i2", "dd", 2),
            ("i3", "aa ee ff", 4),
            ("i4", "ff gg", 1),
        ])
    }

    proptest! {
        #[test]
        fn output_has_unit_mass_and_respects_prune(
            dists in prop::collection::vec(0.0f64..5.0, 1..5),
            ratio in any::<bool>(),
        ) {
            let c = fixture_corpus();
            let mut neighbors: Vec<_> =
                dists.iter().enumerate().map(|(i, &d)| n(&format!("i{i}"), d)).collect();
            neighbors.sort_by(|a, b| a.distance.total_cmp(&b.distance));
            let mode = if ratio { DecayMode::Ratio } else { DecayMode::Product };
            let h = query_histogram("q", &neighbors, &c, 20, mode).unwrap();
            prop_assert!((h.weights().values().sum::<f64>() - 1.0).abs() < 1e-9);
            prop_assert!(h.weights().values().all(|&w| w >= PRUNE_SHARE));
        }

        #[test]
        fn equal_distance_permutations_agree(d in 0.1f64..4.0, rot in 0usize..5) {
            let c = fixture_corpus();
            let mut neighbors: Vec<_> = (0..5).map(|i| n(&format!("i{i}"), d)).collect();
            let a = query_histogram("q", &neighbors, &c, 20, DecayMode::Product).unwrap();
            neighbors.rotate_left(rot);
            neighbors.swap(0, 4);
            let b = query_histogram("q", &neighbors, &c, 20, DecayMode::Product).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn farther_neighbors_never_weigh_more(
            dists in prop::collection::vec(0.0f64..5.0, 2..20),
            pick in 0usize..20,
            bump in 0.0f64..3.0,
            ratio in any::<bool>(),
        ) {
            let mode = if ratio { DecayMode::Ratio } else { DecayMode::Product };
            let i = pick % dists.len();
            let before = neighbor_weight(dists[i], decay_constant(&dists).tau, mode);
            let mut moved = dists.clone();
            moved[i] += bump;
            let after = neighbor_weight(moved[i], decay_constant(&moved).tau, mode);
            prop_assert!(after <= before + 1e-15);
        }

        #[test]
        fn weight_strictly_decreasing(a in 0.0f64..10.0, gap in 1e-3f64..5.0, tau in 0.05f64..5.0) {
            for mode in [DecayMode::Product, DecayMode::Ratio] {
                prop_assert!(neighbor_weight(a + gap, tau, mode) < neighbor_weight(a, tau, mode));
            }
        }
    }
}

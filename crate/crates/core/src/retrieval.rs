//! Visual nearest-neighbour search: a feature store, an exact scan, and a
//! single-table random-hyperplane LSH index with Hamming-radius multiprobe.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub const DEFAULT_BITS: u32 = 10;
pub const MAX_BITS: u32 = 30;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RetrievalError {
    #[error("feature dimension must be positive")]
    ZeroDimension,
    #[error("vector `{id}` has {found} components, expected {expected}")]
    DimensionMismatch {
        id: String,
        expected: usize,
        found: usize,
    },
    #[error("vector `{0}` has non-finite components")]
    NonFinite(String),
    #[error("image `{0}` appears twice in the feature store")]
    DuplicateId(String),
    #[error("hash width must be within 1..={MAX_BITS}, got {0}")]
    InvalidBits(u32),
    #[error("k must be at least 1")]
    ZeroK,
}

/// Uniform-dimension feature vectors keyed by image id, in insertion order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureStore {
    dim: usize,
    ids: Vec<String>,
    positions: BTreeMap<String, usize>,
    values: Vec<f64>,
}

impl FeatureStore {
    pub fn new(dim: usize) -> Result<Self, RetrievalError> {
        if dim == 0 {
            return Err(RetrievalError::ZeroDimension);
        }
        Ok(Self {
            dim,
            ids: Vec::new(),
            positions: BTreeMap::new(),
            values: Vec::new(),
        })
    }

    /// Builds a store whose dimension is taken from the first row.
    pub fn from_rows<I, S>(rows: I) -> Result<Self, RetrievalError>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: Into<String>,
    {
        let mut rows = rows.into_iter().peekable();
        let dim = rows.peek().map_or(0, |(_, v)| v.len());
        let mut store = Self::new(dim)?;
        for (id, values) in rows {
            store.push(id, &values)?;
        }
        Ok(store)
    }

    pub fn push(&mut self, id: impl Into<String>, values: &[f64]) -> Result<(), RetrievalError> {
        let id = id.into();
        check_query(self.dim, values, &id)?;
        if self.positions.contains_key(&id) {
            return Err(RetrievalError::DuplicateId(id));
        }
        self.positions.insert(id.clone(), self.ids.len());
        self.ids.push(id);
        self.values.extend_from_slice(values);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn id(&self, index: usize) -> &str {
        &self.ids[index]
    }

    pub fn row(&self, index: usize) -> &[f64] {
        &self.values[index * self.dim..(index + 1) * self.dim]
    }

    pub fn get(&self, id: &str) -> Option<&[f64]> {
        self.positions.get(id).map(|&i| self.row(i))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.ids
            .iter()
            .map(String::as_str)
            .zip(self.values.chunks_exact(self.dim))
    }

    /// Keeps only the rows whose id satisfies `keep`.
    pub fn retain(self, mut keep: impl FnMut(&str) -> bool) -> Self {
        let mut out = Self::new(self.dim).expect("dimension already validated");
        for (id, row) in self.iter() {
            if keep(id) {
                out.push(id, row).expect("rows already validated");
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Neighbor {
    pub image_id: String,
    pub distance: f64,
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    libm::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}

fn check_query(dim: usize, values: &[f64], id: &str) -> Result<(), RetrievalError> {
    if values.len() != dim {
        return Err(RetrievalError::DimensionMismatch {
            id: id.to_string(),
            expected: dim,
            found: values.len(),
        });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(RetrievalError::NonFinite(id.to_string()));
    }
    Ok(())
}

fn by_distance_then_id(a: &Neighbor, b: &Neighbor) -> Ordering {
    a.distance
        .total_cmp(&b.distance)
        .then_with(|| a.image_id.cmp(&b.image_id))
}

fn rank_candidates(
    store: &FeatureStore,
    candidates: impl Iterator<Item = usize>,
    query: &[f64],
    k: usize,
) -> Vec<Neighbor> {
    let mut ranked: Vec<Neighbor> = candidates
        .map(|i| Neighbor {
            image_id: store.id(i).to_string(),
            distance: euclidean(store.row(i), query),
        })
        .collect();
    ranked.sort_by(by_distance_then_id);
    ranked.truncate(k);
    ranked
}

/// Exhaustive k-nearest-neighbour scan, ascending by distance then id.
pub fn exact_knn(
    store: &FeatureStore,
    query: &[f64],
    k: usize,
) -> Result<Vec<Neighbor>, RetrievalError> {
    if k == 0 {
        return Err(RetrievalError::ZeroK);
    }
    if store.is_empty() {
        return Ok(Vec::new());
    }
    check_query(store.dim, query, "<query>")?;
    Ok(rank_candidates(store, 0..store.len(), query, k))
}

/// Sign-of-projection hash index over a [`FeatureStore`].
#[derive(Debug, Clone)]
pub struct LshIndex {
    store: FeatureStore,
    bits: u32,
    seed: u64,
    hyperplanes: Vec<f64>,
    buckets: BTreeMap<u32, Vec<usize>>,
}

impl LshIndex {
    /// Draws `bits` unit hyperplanes from a seeded normal distribution and
    /// buckets every stored vector. Identical inputs give identical buckets.
    pub fn build(store: FeatureStore, bits: u32, seed: u64) -> Result<Self, RetrievalError> {
        if bits == 0 || bits > MAX_BITS {
            return Err(RetrievalError::InvalidBits(bits));
        }
        let dim = store.dim;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut hyperplanes = Vec::with_capacity(dim * bits as usize);
        for _ in 0..bits {
            let start = hyperplanes.len();
            hyperplanes.extend((0..dim).map(|_| -> f64 { StandardNormal.sample(&mut rng) }));
            let row = &mut hyperplanes[start..];
            let norm = libm::sqrt(row.iter().map(|v| v * v).sum::<f64>());
            for v in row.iter_mut() {
                *v /= norm;
            }
        }
        let mut index = Self {
            store,
            bits,
            seed,
            hyperplanes,
            buckets: BTreeMap::new(),
        };
        for i in 0..index.store.len() {
            let code = index.code_of(index.store.row(i));
            index.buckets.entry(code).or_default().push(i);
        }
        Ok(index)
    }

    pub fn store(&self) -> &FeatureStore {
        &self.store
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn hyperplane(&self, bit: u32) -> &[f64] {
        let dim = self.store.dim;
        let b = bit as usize;
        &self.hyperplanes[b * dim..(b + 1) * dim]
    }

    /// `(code, image ids)` for every non-empty bucket, ascending by code.
    pub fn buckets(&self) -> impl Iterator<Item = (u32, Vec<&str>)> {
        self.buckets
            .iter()
            .map(|(&code, members)| (code, members.iter().map(|&i| self.store.id(i)).collect()))
    }

    pub fn bucket_count(&self) -> usize {
        self.buckets.len()
    }

    /// Bit `i` is set iff the projection onto hyperplane `i` is non-negative.
    pub fn hash(&self, vector: &[f64]) -> Result<u32, RetrievalError> {
        check_query(self.store.dim, vector, "<query>")?;
        Ok(self.code_of(vector))
    }

    fn code_of(&self, vector: &[f64]) -> u32 {
        let mut code = 0u32;
        for bit in 0..self.bits {
            let projection: f64 = self.hyperplane(bit).iter().zip(vector).map(|(h, v)| h * v).sum();
            if projection >= 0.0 {
                code |= 1 << bit;
            }
        }
        code
    }

    /// Approximate k-NN: adaptive probing with no radius cap.
    pub fn knn(&self, query: &[f64], k: usize) -> Result<Vec<Neighbor>, RetrievalError> {
        self.knn_probe(query, k, Probe::Adaptive { max_radius: self.bits })
    }

    /// Candidates are gathered from buckets ordered by Hamming distance to
    /// the query's code (see [`Probe`]) and ranked by exact Euclidean distance.
    pub fn knn_probe(
        &self,
        query: &[f64],
        k: usize,
        probe: Probe,
    ) -> Result<Vec<Neighbor>, RetrievalError> {
        if k == 0 {
            return Err(RetrievalError::ZeroK);
        }
        if self.store.is_empty() {
            return Ok(Vec::new());
        }
        let code = self.hash(query)?;
        let max_radius = match probe {
            Probe::Adaptive { max_radius } | Probe::Full { radius: max_radius } => max_radius,
        };

        let mut rings: Vec<(u32, &Vec<usize>)> = self
            .buckets
            .iter()
            .map(|(&other, members)| ((other ^ code).count_ones(), members))
            .filter(|&(radius, _)| radius <= max_radius)
            .collect();
        rings.sort_by_key(|&(radius, _)| radius);

        let mut candidates = Vec::new();
        let mut ring = 0;
        while ring < rings.len() {
            let radius = rings[ring].0;
            while ring < rings.len() && rings[ring].0 == radius {
                candidates.extend_from_slice(rings[ring].1);
                ring += 1;
            }
            if matches!(probe, Probe::Adaptive { .. }) && candidates.len() >= k {
                break;
            }
        }
        Ok(rank_candidates(&self.store, candidates.into_iter(), query, k))
    }
}

/// Which buckets feed the candidate set of a query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Probe {
    /// Start at the query's bucket and widen the Hamming radius one step at
    /// a time until at least `k` candidates are found or `max_radius` is passed.
    Adaptive { max_radius: u32 },
    /// Every bucket within `radius`, regardless of how many candidates it yields.
    /// `radius == bits` scans the whole store.
    Full { radius: u32 },
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use alloc::vec;
    use proptest::prelude::*;
    use rand::Rng;

    fn random_store(n: usize, dim: usize, seed: u64) -> FeatureStore {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        FeatureStore::from_rows((0..n).map(|i| {
            let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            (format!("img{i:05}"), v)
        }))
        .unwrap()
    }

    #[test]
    fn single_vector_single_bucket() {
        let store = FeatureStore::from_rows([("a", vec![1.0, 2.0])]).unwrap();
        let index = LshIndex::build(store, 1, 7).unwrap();
        let buckets: Vec<_> = index.buckets().collect();
        assert_eq!(buckets.len(), 1);
        assert_eq!(buckets[0].1, vec!["a"]);
    }

    #[test]
    fn build_is_deterministic() {
        let a = LshIndex::build(random_store(300, 6, 1), 8, 42).unwrap();
        let b = LshIndex::build(random_store(300, 6, 1), 8, 42).unwrap();
        assert!(a.buckets().eq(b.buckets()));
        assert_eq!(a.hyperplanes, b.hyperplanes);
    }

    #[test]
    fn bucket_sizes_cover_store() {
        let index = LshIndex::build(random_store(10_000, 16, 3), 10, 9).unwrap();
        let total: usize = index.buckets().map(|(_, m)| m.len()).sum();
        assert_eq!(total, 10_000);
    }

    #[test]
    fn every_id_lands_in_its_hash_bucket() {
        let index = LshIndex::build(random_store(500, 5, 4), 6, 2).unwrap();
        let mut seen = 0;
        for (code, members) in index.buckets() {
            for id in members {
                assert_eq!(index.hash(index.store().get(id).unwrap()).unwrap(), code);
                seen += 1;
            }
        }
        assert_eq!(seen, 500);
    }

    #[test]
    fn invalid_bits_rejected() {
        let store = random_store(3, 2, 0);
        assert_eq!(
            LshIndex::build(store.clone(), 0, 0).unwrap_err(),
            RetrievalError::InvalidBits(0)
        );
        assert_eq!(
            LshIndex::build(store, 31, 0).unwrap_err(),
            RetrievalError::InvalidBits(31)
        );
    }

    #[test]
    fn dimension_mismatch_in_store() {
        let err = FeatureStore::from_rows([("a", vec![1.0, 2.0]), ("b", vec![1.0])]).unwrap_err();
        assert!(matches!(err, RetrievalError::DimensionMismatch { expected: 2, found: 1, .. }));
    }

    #[test]
    fn hyperplanes_are_unit_length() {
        let index = LshIndex::build(random_store(1, 12, 0), 10, 5).unwrap();
        for bit in 0..10 {
            let n: f64 = index.hyperplane(bit).iter().map(|v| v * v).sum();
            assert!((n - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn hash_sign_rule() {
        // In two dimensions with two hyperplanes, h0 itself projects to 1 on h0.
        let index = LshIndex::build(random_store(1, 2, 0), 2, 11).unwrap();
        let h0 = index.hyperplane(0).to_vec();
        let code = index.hash(&h0).unwrap();
        assert_eq!(code & 1, 1);
        let h1: f64 = index.hyperplane(1).iter().zip(&h0).map(|(a, b)| a * b).sum();
        assert_eq!(code >> 1 & 1, u32::from(h1 >= 0.0));
        assert_eq!(index.hash(&h0).unwrap(), code);
    }

    #[test]
    fn antipodal_vectors_get_complementary_codes() {
        let index = LshIndex::build(random_store(1, 8, 0), 10, 3).unwrap();
        let v: Vec<f64> = (0..8).map(|i| (i as f64 + 0.5).sin()).collect();
        let neg: Vec<f64> = v.iter().map(|x| -x).collect();
        let mask = (1u32 << 10) - 1;
        assert_eq!(index.hash(&v).unwrap() ^ index.hash(&neg).unwrap(), mask);
    }

    #[test]
    fn query_equal_to_stored_vector_comes_first() {
        let store = random_store(200, 4, 8);
        let target = store.row(17).to_vec();
        let index = LshIndex::build(store, 10, 1).unwrap();
        let result = index.knn(&target, 5).unwrap();
        assert_eq!(result[0].image_id, "img00017");
        assert_eq!(result[0].distance, 0.0);
    }

    #[test]
    fn k_larger_than_corpus_returns_everything_sorted() {
        let index = LshIndex::build(random_store(30, 3, 2), 10, 1).unwrap();
        let result = index.knn(&[0.1, 0.2, 0.3], 100).unwrap();
        assert_eq!(result.len(), 30);
        assert!(result.windows(2).all(|w| by_distance_then_id(&w[0], &w[1]).is_le()));
    }

    #[test]
    fn empty_index_gives_empty_result() {
        let index = LshIndex::build(FeatureStore::new(3).unwrap(), 4, 0).unwrap();
        assert!(index.knn(&[0.0, 0.0, 1.0], 3).unwrap().is_empty());
    }

    #[test]
    fn zero_k_rejected() {
        let store = random_store(3, 2, 0);
        assert_eq!(exact_knn(&store, &[0.0, 0.0], 0), Err(RetrievalError::ZeroK));
    }

    #[test]
    fn exact_knn_singleton() {
        let store = FeatureStore::from_rows([("only", vec![3.0, 4.0])]).unwrap();
        assert_eq!(
            exact_knn(&store, &[0.0, 0.0], 3).unwrap(),
            vec![Neighbor { image_id: "only".into(), distance: 5.0 }]
        );
    }

    #[test]
    fn ties_break_by_id() {
        let store =
            FeatureStore::from_rows([("b", vec![1.0, 0.0]), ("a", vec![-1.0, 0.0]), ("c", vec![0.0, 1.0])])
                .unwrap();
        let ids: Vec<_> = exact_knn(&store, &[0.0, 0.0], 3)
            .unwrap()
            .into_iter()
            .map(|n| n.image_id)
            .collect();
        assert_eq!(ids, vec!["a", "b", "c"]);
    }

    #[test]
    fn adaptive_probe_returns_k_when_available() {
        let index = LshIndex::build(random_store(300, 6, 12), 10, 4).unwrap();
        for i in 0..20 {
            let q = index.store().row(i).to_vec();
            assert_eq!(index.knn(&q, 20).unwrap().len(), 20);
            assert_eq!(index.knn_probe(&q, 20, Probe::Adaptive { max_radius: 10 }).unwrap().len(), 20);
        }
    }

    #[test]
    fn radius_zero_stays_in_bucket() {
        let index = LshIndex::build(random_store(400, 6, 6), 10, 4).unwrap();
        let query = index.store().row(3).to_vec();
        let code = index.hash(&query).unwrap();
        for n in index.knn_probe(&query, 50, Probe::Full { radius: 0 }).unwrap() {
            assert_eq!(index.hash(index.store().get(&n.image_id).unwrap()).unwrap(), code);
        }
    }

    proptest! {
        #[test]
        fn unlimited_probe_equals_exact(seed in any::<u64>(), k in 1usize..40, bits in 1u32..12) {
            let store = random_store(150, 5, seed);
            let index = LshIndex::build(store.clone(), bits, seed ^ 0x5eed).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
            let q: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
            let approx = index.knn_probe(&q, k, Probe::Full { radius: bits }).unwrap();
            let exact = exact_knn(&store, &q, k).unwrap();
            prop_assert_eq!(&approx, &exact);
            prop_assert!(approx.iter().all(|n| n.distance >= 0.0));
            prop_assert!(approx.windows(2).all(|w| w[0].distance <= w[1].distance));
        }
    }
}

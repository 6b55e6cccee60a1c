//! Attribute sampling for exploration rounds.
//!
//! One index is drawn from a weight-proportional law `q`, then the remaining
//! `k - 1` indices are drawn uniformly without replacement from the rest.
//! The closed forms for the resulting single, pair, and triple inclusion
//! probabilities live here together with an exhaustive enumeration oracle.
//!
//! Indices in this module are 0-based. The CLI and C ABI translate to and
//! from the 1-based attribute numbering used in configs and reports.

use rand::Rng;

use crate::error::{Error, Result};

/// Normalized sampling weights over `d` attributes.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingWeights {
    q: Vec<f64>,
}

impl SamplingWeights {
    /// Uniform weights `1/d`.
    pub fn uniform(d: usize) -> Self {
        assert!(d >= 1, "uniform weights need d >= 1");
        SamplingWeights {
            q: vec![1.0 / d as f64; d],
        }
    }

    /// `q_i = |w_i| / ||w||_1`, falling back to uniform when `w` is all zero
    /// (or contains no finite mass).
    pub fn from_weights(w: &[f64]) -> Self {
        assert!(!w.is_empty(), "weights need d >= 1");
        let mass: f64 = w.iter().map(|v| v.abs()).sum();
        if !(mass > 0.0) || !mass.is_finite() {
            return Self::uniform(w.len());
        }
        SamplingWeights {
            q: w.iter().map(|v| v.abs() / mass).collect(),
        }
    }

    /// Wraps an explicit probability vector after validating it.
    pub fn from_probabilities(q: Vec<f64>) -> Result<Self> {
        if q.is_empty() {
            return Err(Error::param("q", "empty probability vector"));
        }
        if q.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::param("q", "entries must be finite and nonnegative"));
        }
        let total: f64 = q.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::param("q", format!("entries sum to {total}, not 1")));
        }
        Ok(SamplingWeights { q })
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.q
    }

    pub fn get(&self, i: usize) -> f64 {
        self.q[i]
    }
}

/// Alias kept for readers matching the algorithm's `Compute q = w/||w||_1` step.
pub fn normalize_weights(w: &[f64]) -> SamplingWeights {
    SamplingWeights::from_weights(w)
}

/// The attributes observed in one round, in draw order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureSet {
    indices: Vec<usize>,
}

impl FeatureSet {
    pub fn new(indices: Vec<usize>, d: usize) -> Result<Self> {
        for (n, &i) in indices.iter().enumerate() {
            if i >= d {
                return Err(Error::IndexOutOfRange { index: i, d });
            }
            if indices[..n].contains(&i) {
                return Err(Error::DuplicateIndex);
            }
        }
        Ok(FeatureSet { indices })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn budget(&self) -> usize {
        self.indices.len()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.contains(&i)
    }

    /// Indices in increasing order.
    pub fn sorted(&self) -> Vec<usize> {
        let mut v = self.indices.clone();
        v.sort_unstable();
        v
    }
}

/// Draws one feature set: the first index from `q`, the other `k - 1`
/// uniformly without replacement from the remaining `d - 1` indices.
pub fn sample_feature_set<R: Rng + ?Sized>(
    q: &SamplingWeights,
    k: usize,
    rng: &mut R,
) -> Result<FeatureSet> {
    let d = q.dim();
    if k < 1 || k > d {
        return Err(Error::InvalidBudget { k, d });
    }
    let first = draw_weighted(q.as_slice(), rng);
    let mut indices = Vec::with_capacity(k);
    indices.push(first);
    if k > 1 {
        for r in rand::seq::index::sample(rng, d - 1, k - 1).into_iter() {
            indices.push(if r >= first { r + 1 } else { r });
        }
    }
    Ok(FeatureSet { indices })
}

fn draw_weighted<R: Rng + ?Sized>(q: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &p) in q.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last_positive = i;
            if u < acc {
                return i;
            }
        }
    }
    // rounding left a sliver of mass past the final cumulative sum
    last_positive
}

/// Read access to first- and second-order inclusion probabilities of a
/// sampling law.
pub trait InclusionProbabilities {
    fn dim(&self) -> usize;
    /// `P[i in B]`.
    fn single(&self, i: usize) -> f64;
    /// `P[i, j in B]` for `i != j`.
    fn pair(&self, i: usize, j: usize) -> f64;
}

/// Closed-form inclusion law of the sampling procedure for a fixed `(q, k)`.
#[derive(Debug, Clone)]
pub struct InclusionLaw {
    q: SamplingWeights,
    k: usize,
}

impl InclusionLaw {
    pub fn new(q: SamplingWeights, k: usize) -> Result<Self> {
        let d = q.dim();
        if k < 1 || k > d {
            return Err(Error::InvalidBudget { k, d });
        }
        Ok(InclusionLaw { q, k })
    }

    pub fn weights(&self) -> &SamplingWeights {
        &self.q
    }

    pub fn budget(&self) -> usize {
        self.k
    }

    pub fn triple(&self, i: usize, j: usize, r: usize) -> f64 {
        triple_unchecked(self.q.as_slice(), self.k, i, j, r)
    }
}

impl InclusionProbabilities for InclusionLaw {
    fn dim(&self) -> usize {
        self.q.dim()
    }

    fn single(&self, i: usize) -> f64 {
        single_unchecked(self.q.as_slice(), self.k, i)
    }

    fn pair(&self, i: usize, j: usize) -> f64 {
        pair_unchecked(self.q.as_slice(), self.k, i, j)
    }
}

fn single_unchecked(q: &[f64], k: usize, i: usize) -> f64 {
    let d = q.len();
    if k == d {
        return 1.0;
    }
    let (d, k) = (d as f64, k as f64);
    ((d - k) * q[i] + (k - 1.0)) / (d - 1.0)
}

fn pair_unchecked(q: &[f64], k: usize, i: usize, j: usize) -> f64 {
    let d = q.len();
    if k == d {
        return 1.0;
    }
    let (d, k) = (d as f64, k as f64);
    (k - 1.0) * ((k - 2.0) + (d - k) * (q[i] + q[j])) / ((d - 1.0) * (d - 2.0))
}

fn triple_unchecked(q: &[f64], k: usize, i: usize, j: usize, r: usize) -> f64 {
    let d = q.len();
    if k == d {
        return 1.0;
    }
    let (d, k) = (d as f64, k as f64);
    (k - 1.0) * (k - 2.0) * ((k - 3.0) + (d - k) * (q[i] + q[j] + q[r]))
        / ((d - 1.0) * (d - 2.0) * (d - 3.0))
}

fn check_index(i: usize, d: usize) -> Result<()> {
    if i >= d {
        Err(Error::IndexOutOfRange { index: i, d })
    } else {
        Ok(())
    }
}

fn check_budget(k: usize, d: usize, min_k: usize) -> Result<()> {
    if k < min_k || k > d {
        Err(Error::InvalidBudget { k, d })
    } else {
        Ok(())
    }
}

/// `P[i in B] = ((d-k)/(d-1)) q_i + (k-1)/(d-1)`.
pub fn p_single(q: &SamplingWeights, k: usize, i: usize) -> Result<f64> {
    let d = q.dim();
    check_budget(k, d, 1)?;
    check_index(i, d)?;
    Ok(single_unchecked(q.as_slice(), k, i))
}

/// `P[i, j in B] = (k-1)(k-2)/((d-1)(d-2)) + (k-1)(d-k)/((d-1)(d-2)) (q_i + q_j)`.
pub fn p_pair(q: &SamplingWeights, k: usize, i: usize, j: usize) -> Result<f64> {
    let d = q.dim();
    check_budget(k, d, 2)?;
    check_index(i, d)?;
    check_index(j, d)?;
    if i == j {
        return Err(Error::SameIndex(i));
    }
    Ok(pair_unchecked(q.as_slice(), k, i, j))
}

/// `P[i, j, r in B] = (1/g)(k-3)/(d-3) + (1/g)(d-k)/(d-3) (q_i + q_j + q_r)`
/// with `g = (d-1)(d-2)/((k-1)(k-2))`.
pub fn p_triple(q: &SamplingWeights, k: usize, i: usize, j: usize, r: usize) -> Result<f64> {
    let d = q.dim();
    check_budget(k, d, 3)?;
    for idx in [i, j, r] {
        check_index(idx, d)?;
    }
    if i == j || i == r || j == r {
        return Err(Error::DuplicateIndex);
    }
    Ok(triple_unchecked(q.as_slice(), k, i, j, r))
}

pub mod oracle {
    //! Brute-force enumeration of the sampling procedure's ordered draws.

    use super::SamplingWeights;
    use crate::error::{Error, Result};

    /// Largest dimension the enumeration accepts.
    pub const MAX_DIM: usize = 8;

    /// Exact inclusion probabilities for every single, pair, and triple.
    #[derive(Debug, Clone)]
    pub struct InclusionTables {
        d: usize,
        single: Vec<f64>,
        pair: Vec<f64>,
        triple: Vec<f64>,
    }

    impl InclusionTables {
        pub fn dim(&self) -> usize {
            self.d
        }

        pub fn single(&self, i: usize) -> f64 {
            self.single[i]
        }

        pub fn pair(&self, i: usize, j: usize) -> f64 {
            self.pair[i * self.d + j]
        }

        pub fn triple(&self, i: usize, j: usize, r: usize) -> f64 {
            self.triple[(i * self.d + j) * self.d + r]
        }
    }

    /// Sums the probability of every ordered draw sequence of the sampler.
    pub fn enumerate_distribution(q: &SamplingWeights, k: usize) -> Result<InclusionTables> {
        let d = q.dim();
        if d > MAX_DIM {
            return Err(Error::DimensionTooLarge { d, max: MAX_DIM });
        }
        if k < 1 || k > d {
            return Err(Error::InvalidBudget { k, d });
        }
        let mut by_set = vec![0.0f64; 1 << d];
        for first in 0..d {
            let p = q.get(first);
            if p == 0.0 {
                continue;
            }
            walk(1 << first, 1, p, d, k, &mut by_set);
        }

        let mut single = vec![0.0; d];
        let mut pair = vec![0.0; d * d];
        let mut triple = vec![0.0; d * d * d];
        for (mask, &p) in by_set.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let members: Vec<usize> = (0..d).filter(|i| mask & (1 << i) != 0).collect();
            for &i in &members {
                single[i] += p;
                for &j in &members {
                    if j == i {
                        continue;
                    }
                    pair[i * d + j] += p;
                    for &r in &members {
                        if r != i && r != j {
                            triple[(i * d + j) * d + r] += p;
                        }
                    }
                }
            }
        }
        Ok(InclusionTables {
            d,
            single,
            pair,
            triple,
        })
    }

    // Every draw after the first picks uniformly among the indices not yet taken.
    fn walk(mask: usize, taken: usize, prob: f64, d: usize, k: usize, by_set: &mut [f64]) {
        if taken == k {
            by_set[mask] += prob;
            return;
        }
        let step = prob / (d - taken) as f64;
        for next in 0..d {
            if mask & (1 << next) == 0 {
                walk(mask | (1 << next), taken + 1, step, d, k, by_set);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::oracle::enumerate_distribution;
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn normalize_examples() {
        let q = normalize_weights(&[0.25; 4]);
        assert!(q.as_slice().iter().all(|&p| close(p, 0.25, 1e-15)));
        let q = normalize_weights(&[0.5, -0.5, 0.0, 0.0]);
        assert_eq!(q.as_slice(), &[0.5, 0.5, 0.0, 0.0]);
        let q = normalize_weights(&[0.0, 0.0, 0.0]);
        assert_eq!(q.as_slice(), &[1.0 / 3.0; 3]);
    }

    #[test]
    fn rejects_bad_probability_vectors() {
        assert!(SamplingWeights::from_probabilities(vec![0.5, 0.6]).is_err());
        assert!(SamplingWeights::from_probabilities(vec![-0.1, 1.1]).is_err());
        assert!(SamplingWeights::from_probabilities(vec![]).is_err());
    }

    #[test]
    fn point_mass_is_always_selected() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let q = SamplingWeights::from_probabilities(vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        for _ in 0..200 {
            let b = sample_feature_set(&q, 3, &mut rng).unwrap();
            assert_eq!(b.indices()[0], 0);
            assert_eq!(b.budget(), 3);
        }
        let full = sample_feature_set(&q, 6, &mut rng).unwrap();
        assert_eq!(full.sorted(), (0..6).collect::<Vec<_>>());
    }

    #[test]
    fn invalid_budgets() {
        let q = SamplingWeights::uniform(5);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(
            sample_feature_set(&q, 0, &mut rng),
            Err(Error::InvalidBudget { k: 0, d: 5 })
        );
        assert_eq!(
            sample_feature_set(&q, 6, &mut rng),
            Err(Error::InvalidBudget { k: 6, d: 5 })
        );
    }

    #[test]
    fn closed_form_examples() {
        let u5 = SamplingWeights::uniform(5);
        assert!(close(p_single(&u5, 3, 2).unwrap(), 0.6, 1e-15));
        assert!(close(p_pair(&u5, 3, 0, 4).unwrap(), 0.3, 1e-15));

        let e = SamplingWeights::from_probabilities(vec![1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(p_single(&e, 3, 0).unwrap(), 1.0);

        let q = SamplingWeights::from_probabilities(vec![0.5, 0.5, 0.0, 0.0]).unwrap();
        assert!(close(p_single(&q, 3, 2).unwrap(), 2.0 / 3.0, 1e-15));

        let e6 = SamplingWeights::from_probabilities(vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(close(p_pair(&e6, 3, 1, 2).unwrap(), 0.1, 1e-15));

        let u6 = SamplingWeights::uniform(6);
        assert!(close(p_triple(&u6, 3, 0, 1, 2).unwrap(), 0.05, 1e-15));

        let e7 = SamplingWeights::from_probabilities(vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0])
            .unwrap();
        assert!(close(p_triple(&e7, 4, 0, 1, 2).unwrap(), 0.2, 1e-15));

        assert_eq!(p_pair(&u5, 5, 0, 1).unwrap(), 1.0);
        assert_eq!(p_triple(&u5, 5, 0, 1, 2).unwrap(), 1.0);
    }

    #[test]
    fn closed_form_errors() {
        let u = SamplingWeights::uniform(5);
        assert_eq!(p_single(&u, 3, 5), Err(Error::IndexOutOfRange { index: 5, d: 5 }));
        assert_eq!(p_pair(&u, 3, 1, 1), Err(Error::SameIndex(1)));
        assert_eq!(p_triple(&u, 3, 1, 2, 1), Err(Error::DuplicateIndex));
        assert!(matches!(p_triple(&u, 2, 0, 1, 2), Err(Error::InvalidBudget { .. })));
    }

    #[test]
    fn enumeration_examples() {
        let t = enumerate_distribution(&SamplingWeights::uniform(4), 3).unwrap();
        for i in 0..4 {
            assert!(close(t.single(i), 0.75, 1e-15));
        }
        let q = SamplingWeights::from_probabilities(vec![0.7, 0.1, 0.1, 0.1]).unwrap();
        let t = enumerate_distribution(&q, 4).unwrap();
        assert!(close(t.single(2), 1.0, 1e-12));
        assert!(close(t.pair(0, 3), 1.0, 1e-12));
        assert!(close(t.triple(3, 1, 0), 1.0, 1e-12));

        let q = SamplingWeights::from_probabilities(vec![0.4, 0.3, 0.2, 0.1, 0.0]).unwrap();
        let t = enumerate_distribution(&q, 3).unwrap();
        let law = InclusionLaw::new(q.clone(), 3).unwrap();
        for i in 0..5 {
            assert!(close(t.single(i), law.single(i), 1e-12));
            for j in 0..5 {
                if j == i {
                    continue;
                }
                assert!(close(t.pair(i, j), law.pair(i, j), 1e-12));
                for r in 0..5 {
                    if r != i && r != j {
                        assert!(close(t.triple(i, j, r), law.triple(i, j, r), 1e-12));
                    }
                }
            }
        }
        assert!(matches!(
            enumerate_distribution(&SamplingWeights::uniform(9), 3),
            Err(Error::DimensionTooLarge { d: 9, max: 8 })
        ));
    }

    #[test]
    fn empirical_inclusion_matches_uniform_closed_form() {
        let q = SamplingWeights::uniform(5);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = 200_000;
        let mut hits = [0usize; 5];
        for _ in 0..n {
            for &i in sample_feature_set(&q, 3, &mut rng).unwrap().indices() {
                hits[i] += 1;
            }
        }
        let se = (0.6f64 * 0.4 / n as f64).sqrt();
        for h in hits {
            assert!(((h as f64 / n as f64) - 0.6).abs() < 4.0 * se);
        }
    }
}

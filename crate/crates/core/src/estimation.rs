//! Inverse-inclusion-probability estimates of `x` and `x x^T` from a partial
//! observation, and the running sums that feed the Dantzig selector.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::sampling::{InclusionLaw, InclusionProbabilities, SamplingWeights};

/// Attribute values read at a set of indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl Observation {
    pub fn new(indices: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if indices.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: indices.len(),
                got: values.len(),
            });
        }
        for (n, i) in indices.iter().enumerate() {
            if indices[..n].contains(i) {
                return Err(Error::DuplicateIndex);
            }
        }
        Ok(Observation { indices, values })
    }

    /// Observes the coordinates `indices` of a fully known vector.
    pub fn of(x: &[f64], indices: &[usize]) -> Result<Self> {
        for &i in indices {
            if i >= x.len() {
                return Err(Error::IndexOutOfRange { index: i, d: x.len() });
            }
        }
        Self::new(indices.to_vec(), indices.iter().map(|&i| x[i]).collect())
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }
}

/// Unbiased estimate of an instance, zero off the observed set.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceEstimate {
    pub xhat: DVector<f64>,
}

/// Unbiased estimate of `x x^T`, zero unless both coordinates were observed.
#[derive(Debug, Clone, PartialEq)]
pub struct OuterProductEstimate {
    pub h: DMatrix<f64>,
}

fn check_observation<L: InclusionProbabilities + ?Sized>(obs: &Observation, law: &L) -> Result<()> {
    let d = law.dim();
    for &i in obs.indices() {
        if i >= d {
            return Err(Error::IndexOutOfRange { index: i, d });
        }
        if !(law.single(i) > 0.0) {
            return Err(Error::ZeroProbability { index: i });
        }
    }
    Ok(())
}

/// `xhat_i = x_i / P[i in B]` on observed coordinates.
pub fn estimate_instance<L: InclusionProbabilities + ?Sized>(
    obs: &Observation,
    law: &L,
) -> Result<InstanceEstimate> {
    check_observation(obs, law)?;
    let mut xhat = DVector::zeros(law.dim());
    for (i, v) in obs.iter() {
        xhat[i] = v / law.single(i);
    }
    Ok(InstanceEstimate { xhat })
}

/// `h[i,i] = x_i^2 / P[i in B]`, `h[i,j] = x_i x_j / P[i,j in B]`.
pub fn estimate_outer<L: InclusionProbabilities + ?Sized>(
    obs: &Observation,
    law: &L,
) -> Result<OuterProductEstimate> {
    check_observation(obs, law)?;
    let d = law.dim();
    let mut h = DMatrix::zeros(d, d);
    let idx = obs.indices();
    let val = obs.values();
    for a in 0..idx.len() {
        let (i, xi) = (idx[a], val[a]);
        h[(i, i)] = xi * xi / law.single(i);
        for b in (a + 1)..idx.len() {
            let (j, xj) = (idx[b], val[b]);
            let p = law.pair(i, j);
            if !(p > 0.0) {
                return Err(Error::ZeroProbability { index: j });
            }
            let v = xi * xj / p;
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    Ok(OuterProductEstimate { h })
}

/// Running sums `b = sum xhat * y` and `H = sum h` over exploration rounds.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectorAccumulators {
    pub b: DVector<f64>,
    pub h: DMatrix<f64>,
    rounds: usize,
}

impl SelectorAccumulators {
    pub fn new(d: usize) -> Self {
        SelectorAccumulators {
            b: DVector::zeros(d),
            h: DMatrix::zeros(d, d),
            rounds: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    /// Number of accumulated rounds `s`.
    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn accumulate(
        &mut self,
        xhat: &InstanceEstimate,
        h: &OuterProductEstimate,
        y: f64,
    ) -> Result<()> {
        let d = self.dim();
        if xhat.xhat.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: xhat.xhat.len(),
            });
        }
        if h.h.nrows() != d || h.h.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: h.h.nrows(),
            });
        }
        self.b.axpy(y, &xhat.xhat, 1.0);
        self.h += &h.h;
        self.rounds += 1;
        Ok(())
    }

    /// Same update as building both estimates and calling [`accumulate`],
    /// touching only the observed block.
    ///
    /// [`accumulate`]: SelectorAccumulators::accumulate
    pub fn accumulate_observation<L: InclusionProbabilities + ?Sized>(
        &mut self,
        obs: &Observation,
        law: &L,
        y: f64,
    ) -> Result<()> {
        if law.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: law.dim(),
            });
        }
        check_observation(obs, law)?;
        let idx = obs.indices();
        let val = obs.values();
        for a in 0..idx.len() {
            let (i, xi) = (idx[a], val[a]);
            let p = law.single(i);
            self.b[i] += xi / p * y;
            self.h[(i, i)] += xi * xi / p;
            for b in (a + 1)..idx.len() {
                let (j, xj) = (idx[b], val[b]);
                let pij = law.pair(i, j);
                if !(pij > 0.0) {
                    return Err(Error::ZeroProbability { index: j });
                }
                let v = xi * xj / pij;
                self.h[(i, j)] += v;
                self.h[(j, i)] += v;
            }
        }
        self.rounds += 1;
        Ok(())
    }

    /// `(b / s, H / s)`; zero when no rounds have been accumulated.
    pub fn averages(&self) -> (DVector<f64>, DMatrix<f64>) {
        if self.rounds == 0 {
            return (self.b.clone(), self.h.clone());
        }
        let s = self.rounds as f64;
        (&self.b / s, &self.h / s)
    }
}

/// Inclusion law of the relaxed protocol: the previous support is always
/// observed, and `k0` extra attributes are drawn from the complement with the
/// usual sampler.
#[derive(Debug, Clone)]
pub struct PoslrProbabilityLaw {
    d: usize,
    deterministic: Vec<usize>,
    complement: Vec<usize>,
    local: Vec<Option<usize>>,
    inner: InclusionLaw,
}

impl PoslrProbabilityLaw {
    pub fn deterministic_set(&self) -> &[usize] {
        &self.deterministic
    }

    /// Global indices of the complement, in increasing order; position in
    /// this slice is the local index used by the complement weights.
    pub fn complement(&self) -> &[usize] {
        &self.complement
    }

    pub fn complement_weights(&self) -> &SamplingWeights {
        self.inner.weights()
    }

    pub fn k0(&self) -> usize {
        self.inner.budget()
    }

    pub fn to_global(&self, local: usize) -> usize {
        self.complement[local]
    }
}

/// Builds the relaxed-protocol law from the previous support, complement
/// weights over `d - |support|` indices, and the extra budget `k0`.
pub fn poslr_law(
    support_prev: &[usize],
    complement_weights: SamplingWeights,
    k0: usize,
    d: usize,
) -> Result<PoslrProbabilityLaw> {
    let mut local = vec![None; d];
    let mut is_det = vec![false; d];
    for &i in support_prev {
        if i >= d {
            return Err(Error::IndexOutOfRange { index: i, d });
        }
        if is_det[i] {
            return Err(Error::DuplicateIndex);
        }
        is_det[i] = true;
    }
    let complement: Vec<usize> = (0..d).filter(|&i| !is_det[i]).collect();
    if complement_weights.dim() != complement.len() {
        return Err(Error::DimensionMismatch {
            expected: complement.len(),
            got: complement_weights.dim(),
        });
    }
    if k0 < 1 || k0 > complement.len() {
        return Err(Error::InvalidBudget {
            k: k0,
            d: complement.len(),
        });
    }
    for (n, &g) in complement.iter().enumerate() {
        local[g] = Some(n);
    }
    let mut deterministic = support_prev.to_vec();
    deterministic.sort_unstable();
    Ok(PoslrProbabilityLaw {
        d,
        deterministic,
        complement,
        local,
        inner: InclusionLaw::new(complement_weights, k0)?,
    })
}

impl InclusionProbabilities for PoslrProbabilityLaw {
    fn dim(&self) -> usize {
        self.d
    }

    fn single(&self, i: usize) -> f64 {
        match self.local[i] {
            None => 1.0,
            Some(l) => self.inner.single(l),
        }
    }

    fn pair(&self, i: usize, j: usize) -> f64 {
        match (self.local[i], self.local[j]) {
            (None, None) => 1.0,
            (None, Some(l)) | (Some(l), None) => self.inner.single(l),
            (Some(a), Some(b)) => self.inner.pair(a, b),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::sample_feature_set;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn uniform_law(d: usize, k: usize) -> InclusionLaw {
        InclusionLaw::new(SamplingWeights::uniform(d), k).unwrap()
    }

    #[test]
    fn full_observation_is_exact() {
        let x = [0.3, -0.7, 1.0, 0.2];
        let law = uniform_law(4, 4);
        let obs = Observation::of(&x, &[2, 0, 3, 1]).unwrap();
        let xhat = estimate_instance(&obs, &law).unwrap();
        let h = estimate_outer(&obs, &law).unwrap();
        let xv = DVector::from_row_slice(&x);
        assert_eq!(xhat.xhat, xv);
        assert!((h.h - &xv * xv.transpose()).abs().max() < 1e-15);
    }

    #[test]
    fn partial_observation_example() {
        let x = [1.0; 5];
        let law = uniform_law(5, 3);
        let obs = Observation::of(&x, &[0, 1, 2]).unwrap();
        let xhat = estimate_instance(&obs, &law).unwrap();
        for i in 0..3 {
            assert!((xhat.xhat[i] - 1.0 / 0.6).abs() < 1e-12);
        }
        assert_eq!(xhat.xhat[3], 0.0);
        assert_eq!(xhat.xhat[4], 0.0);
        let h = estimate_outer(&obs, &law).unwrap();
        assert!((h.h[(0, 1)] - 1.0 / 0.3).abs() < 1e-12);
        assert!((h.h[(0, 0)] - 1.0 / 0.6).abs() < 1e-12);
        assert!(h.h.row(3).iter().all(|&v| v == 0.0));
        assert_eq!(h.h, h.h.transpose());
    }

    #[test]
    fn zero_probability_is_rejected() {
        // k = 1 with q concentrated on 0: index 1 is never drawn
        let q = SamplingWeights::from_probabilities(vec![1.0, 0.0, 0.0]).unwrap();
        let law = InclusionLaw::new(q, 1).unwrap();
        let obs = Observation::of(&[1.0, 1.0, 1.0], &[1]).unwrap();
        assert_eq!(
            estimate_instance(&obs, &law),
            Err(Error::ZeroProbability { index: 1 })
        );
    }

    #[test]
    fn accumulate_examples() {
        let x = [0.5, -1.0, 0.25];
        let xv = DVector::from_row_slice(&x);
        let law = uniform_law(3, 3);
        let obs = Observation::of(&x, &[0, 1, 2]).unwrap();
        let xhat = estimate_instance(&obs, &law).unwrap();
        let h = estimate_outer(&obs, &law).unwrap();

        let mut acc = SelectorAccumulators::new(3);
        assert_eq!(acc.rounds(), 0);
        acc.accumulate(&xhat, &h, 2.0).unwrap();
        assert_eq!(acc.b, &xhat.xhat * 2.0);
        assert_eq!(acc.h, h.h);
        assert_eq!(acc.rounds(), 1);

        for _ in 1..7 {
            acc.accumulate(&xhat, &h, 2.0).unwrap();
        }
        let expected = (&xv * xv.transpose()) * 7.0;
        assert!((&acc.h - expected).abs().max() < 1e-12);
    }

    #[test]
    fn accumulation_order_does_not_matter() {
        let law = uniform_law(4, 3);
        let o1 = Observation::of(&[0.1, 0.2, 0.3, 0.4], &[0, 1, 3]).unwrap();
        let o2 = Observation::of(&[-0.5, 0.9, 0.3, 0.0], &[2, 1, 0]).unwrap();
        let mut a = SelectorAccumulators::new(4);
        let mut b = SelectorAccumulators::new(4);
        a.accumulate_observation(&o1, &law, 1.5).unwrap();
        a.accumulate_observation(&o2, &law, -0.5).unwrap();
        b.accumulate_observation(&o2, &law, -0.5).unwrap();
        b.accumulate_observation(&o1, &law, 1.5).unwrap();
        assert!((&a.b - &b.b).abs().max() < 1e-15);
        assert!((&a.h - &b.h).abs().max() < 1e-15);
    }

    #[test]
    fn block_update_matches_dense_estimates() {
        let q = SamplingWeights::from_probabilities(vec![0.1, 0.2, 0.3, 0.15, 0.25, 0.0]).unwrap();
        let law = InclusionLaw::new(q.clone(), 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = [0.4, -0.9, 1.0, 0.1, -0.3, 0.8];
        let mut dense = SelectorAccumulators::new(6);
        let mut block = SelectorAccumulators::new(6);
        for n in 0..50 {
            let b = sample_feature_set(&q, 3, &mut rng).unwrap();
            let obs = Observation::of(&x, b.indices()).unwrap();
            let y = n as f64 * 0.1 - 2.0;
            dense
                .accumulate(
                    &estimate_instance(&obs, &law).unwrap(),
                    &estimate_outer(&obs, &law).unwrap(),
                    y,
                )
                .unwrap();
            block.accumulate_observation(&obs, &law, y).unwrap();
        }
        assert!((&dense.b - &block.b).abs().max() < 1e-12);
        assert!((&dense.h - &block.h).abs().max() < 1e-12);
        assert_eq!(dense.rounds(), block.rounds());
    }

    #[test]
    fn poslr_law_examples() {
        // d = 8, support {0, 3, 5}, complement of size 5
        let law = poslr_law(&[5, 0, 3], SamplingWeights::uniform(5), 3, 8).unwrap();
        assert_eq!(law.complement(), &[1, 2, 4, 6, 7]);
        assert_eq!(law.single(0), 1.0);
        assert_eq!(law.pair(0, 3), 1.0);
        assert!((law.pair(1, 2) - 0.3).abs() < 1e-15);
        assert!((law.pair(0, 7) - 0.6).abs() < 1e-15);
        assert!((law.single(6) - 0.6).abs() < 1e-15);

        assert!(matches!(
            poslr_law(&[0, 1], SamplingWeights::uniform(3), 4, 5),
            Err(Error::InvalidBudget { .. })
        ));
        assert!(matches!(
            poslr_law(&[0, 1], SamplingWeights::uniform(4), 2, 5),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn poslr_full_complement_is_exact() {
        let x = [0.2, -0.4, 0.6, -0.8, 1.0, 0.5];
        let law = poslr_law(&[1, 4], SamplingWeights::uniform(4), 4, 6).unwrap();
        let obs = Observation::of(&x, &[1, 4, 0, 2, 3, 5]).unwrap();
        let h = estimate_outer(&obs, &law).unwrap();
        let xv = DVector::from_row_slice(&x);
        assert!((h.h - &xv * xv.transpose()).abs().max() < 1e-15);
    }
}

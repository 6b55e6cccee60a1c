//! Synthetic realizable environments, ground-truth metrics, and brute-force
//! comparators.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::error::{Error, Result};

/// The hidden sparse regressor and noise level.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub w_star: DVector<f64>,
    /// Support indices in increasing order.
    pub support: Vec<usize>,
    pub sigma: f64,
    pub h_min: f64,
}

impl GroundTruth {
    pub fn new(w_star: DVector<f64>, sigma: f64) -> Result<Self> {
        if w_star.lp_norm(1) > 1.0 + 1e-12 {
            return Err(Error::param("w_star", "l1 norm exceeds 1"));
        }
        if !(sigma >= 0.0) {
            return Err(Error::param("sigma", "must be >= 0"));
        }
        let support: Vec<usize> = (0..w_star.len()).filter(|&i| w_star[i] != 0.0).collect();
        let h_min = support
            .iter()
            .map(|&i| w_star[i].abs())
            .fold(f64::INFINITY, f64::min);
        Ok(GroundTruth {
            w_star,
            support,
            sigma,
            h_min: if h_min.is_finite() { h_min } else { 0.0 },
        })
    }

    pub fn dim(&self) -> usize {
        self.w_star.len()
    }

    pub fn in_support(&self, i: usize) -> bool {
        self.support.binary_search(&i).is_ok()
    }
}

/// Draws a `k`-sparse vector with support magnitudes in `[h_min, 1/k]` and
/// random signs.
pub fn gen_ground_truth(d: usize, k: usize, h_min: f64, sigma: f64, seed: u64) -> Result<GroundTruth> {
    if k == 0 || k > d {
        return Err(Error::InvalidBudget { k, d });
    }
    if !(h_min > 0.0) || k as f64 * h_min > 1.0 + 1e-12 {
        return Err(Error::param(
            "h_min",
            format!("need 0 < h_min and k * h_min <= 1 (k = {k}, h_min = {h_min})"),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx: Vec<usize> = (0..d).collect();
    idx.shuffle(&mut rng);
    let mut support = idx[..k].to_vec();
    support.sort_unstable();
    let top = 1.0 / k as f64;
    let mut w = DVector::zeros(d);
    for &i in &support {
        let mag = if h_min >= top {
            top
        } else {
            rng.gen_range(h_min..=top)
        };
        w[i] = if rng.gen::<bool>() { mag } else { -mag };
    }
    Ok(GroundTruth {
        w_star: w,
        support,
        sigma,
        h_min,
    })
}

/// Distribution of the instances `x_t`; every draw has `||x||_inf <= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DesignSpec {
    Rademacher,
    UniformBox,
    /// Equicorrelated Gaussian with pairwise correlation `rho`, clipped to
    /// `[-1, 1]` coordinatewise.
    CorrelatedGaussian { rho: f64 },
}

impl DesignSpec {
    pub fn name(&self) -> &'static str {
        match self {
            DesignSpec::Rademacher => "rademacher",
            DesignSpec::UniformBox => "uniform-box",
            DesignSpec::CorrelatedGaussian { .. } => "correlated-gaussian",
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, d: usize, rng: &mut R) -> Vec<f64> {
        match *self {
            DesignSpec::Rademacher => (0..d)
                .map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 })
                .collect(),
            DesignSpec::UniformBox => (0..d).map(|_| rng.gen_range(-1.0..=1.0)).collect(),
            DesignSpec::CorrelatedGaussian { rho } => {
                let common: f64 = StandardNormal.sample(rng);
                let (a, b) = (rho.sqrt(), (1.0 - rho).sqrt());
                (0..d)
                    .map(|_| {
                        let e: f64 = StandardNormal.sample(rng);
                        (a * common + b * e).clamp(-1.0, 1.0)
                    })
                    .collect()
            }
        }
    }
}

/// One labeled instance together with the noiseless response `<w*, x>`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledRound {
    pub x: Vec<f64>,
    pub y: f64,
    pub clean: f64,
}

/// `x` from the design, `y = <w*, x> + eta` with `eta ~ N(0, sigma^2)`.
pub fn gen_round<R: Rng + ?Sized>(gt: &GroundTruth, design: &DesignSpec, rng: &mut R) -> LabeledRound {
    let x = design.sample(gt.dim(), rng);
    let clean: f64 = gt.support.iter().map(|&i| gt.w_star[i] * x[i]).sum();
    let noise = if gt.sigma > 0.0 {
        Normal::new(0.0, gt.sigma).expect("sigma is finite").sample(rng)
    } else {
        0.0
    };
    LabeledRound {
        x,
        y: clean + noise,
        clean,
    }
}

/// A lazy, seeded stream of labeled rounds.
#[derive(Debug, Clone)]
pub struct SyntheticStream {
    truth: GroundTruth,
    design: DesignSpec,
    rng: ChaCha8Rng,
}

impl SyntheticStream {
    pub fn new(truth: GroundTruth, design: DesignSpec, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1);
        SyntheticStream { truth, design, rng }
    }

    pub fn truth(&self) -> &GroundTruth {
        &self.truth
    }

    pub fn design(&self) -> DesignSpec {
        self.design
    }

    pub fn next_round(&mut self) -> LabeledRound {
        gen_round(&self.truth, &self.design, &mut self.rng)
    }

    /// Materializes the next `n` rounds as a `d x n` design matrix and labels.
    pub fn take_matrix(&mut self, n: usize) -> (DMatrix<f64>, DVector<f64>) {
        let d = self.truth.dim();
        let mut x = DMatrix::zeros(d, n);
        let mut y = DVector::zeros(n);
        for t in 0..n {
            let r = self.next_round();
            for i in 0..d {
                x[(i, t)] = r.x[i];
            }
            y[t] = r.y;
        }
        (x, y)
    }
}

/// Result of the compatibility search: the smallest quotient found and the
/// point attaining it.
#[derive(Debug, Clone, PartialEq)]
pub struct CompatibilityEstimate {
    pub value: f64,
    pub witness: DVector<f64>,
}

/// `|S| ||X^T w||^2 / (n ||w(S)||_1^2)`.
pub fn compatibility_quotient(x: &DMatrix<f64>, support: &[usize], w: &DVector<f64>) -> f64 {
    let n = x.ncols() as f64;
    let on_s: f64 = support.iter().map(|&i| w[i].abs()).sum();
    let xtw = x.transpose() * w;
    support.len() as f64 * xtw.norm_squared() / (n * on_s * on_s)
}

/// Heuristic upper bound on the squared compatibility constant: minimizes
/// the quotient over `{||w(S)||_1 = 1, ||w(S^c)||_1 <= alpha}` with
/// projected gradient descent, once per sign pattern on `S` (or a random
/// sample of patterns when `|S|` is large) plus random restarts.
pub fn estimate_compatibility(
    x: &DMatrix<f64>,
    support: &[usize],
    alpha: f64,
    seed: u64,
) -> Result<CompatibilityEstimate> {
    let d = x.nrows();
    let n = x.ncols();
    if n == 0 {
        return Err(Error::param("x", "need at least one column"));
    }
    if support.is_empty() {
        return Err(Error::param("support", "must be nonempty"));
    }
    if !(alpha >= 0.0) {
        return Err(Error::param("alpha", "must be >= 0"));
    }
    let mut in_s = vec![false; d];
    for &i in support {
        if i >= d {
            return Err(Error::IndexOutOfRange { index: i, d });
        }
        in_s[i] = true;
    }
    let off: Vec<usize> = (0..d).filter(|&i| !in_s[i]).collect();
    let m = support.len() as f64;
    let sigma = (x * x.transpose()) / n as f64;
    // gradient of m w^T Sigma w is 2 m Sigma w
    let lipschitz = 2.0 * m * sigma.symmetric_eigenvalues().max().max(1e-12);
    let step = 1.0 / lipschitz;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let restarts = 64usize;
    let exhaustive = support.len() <= 12;
    let patterns = if exhaustive { 1usize << (support.len() - 1) } else { 0 };
    let total = restarts.max(patterns);

    let mut best: Option<CompatibilityEstimate> = None;
    for r in 0..total {
        let signs: Vec<f64> = if r < patterns {
            // the quotient is even in w, so the first sign can stay positive
            (0..support.len())
                .map(|j| if j > 0 && (r >> (j - 1)) & 1 == 1 { -1.0 } else { 1.0 })
                .collect()
        } else {
            (0..support.len())
                .map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 })
                .collect()
        };
        let mut w = DVector::zeros(d);
        let mut raw: Vec<f64> = support.iter().map(|_| rng.gen::<f64>() + 1e-3).collect();
        let total_raw: f64 = raw.iter().sum();
        raw.iter_mut().for_each(|v| *v /= total_raw);
        for (j, &i) in support.iter().enumerate() {
            w[i] = signs[j] * raw[j];
        }
        if alpha > 0.0 && !off.is_empty() {
            let mut tail: Vec<f64> = off.iter().map(|_| rng.gen_range(-1.0..1.0)).collect();
            let scale = alpha * rng.gen::<f64>() / tail.iter().map(|v| v.abs()).sum::<f64>().max(1e-12);
            tail.iter_mut().for_each(|v| *v *= scale);
            for (j, &i) in off.iter().enumerate() {
                w[i] = tail[j];
            }
        }

        for _ in 0..2000 {
            let grad = &sigma * &w * (2.0 * m);
            let cand = &w - &grad * step;
            let mut on: Vec<f64> = support.iter().map(|&i| cand[i] * signs_of(&signs, support, i)).collect();
            project_simplex(&mut on);
            let mut offv: Vec<f64> = off.iter().map(|&i| cand[i]).collect();
            project_l1_ball(&mut offv, alpha);
            let mut next = DVector::zeros(d);
            for (j, &i) in support.iter().enumerate() {
                next[i] = on[j] * signs[j];
            }
            for (j, &i) in off.iter().enumerate() {
                next[i] = offv[j];
            }
            let moved = (&next - &w).amax();
            w = next;
            if moved < 1e-13 {
                break;
            }
        }
        let value = compatibility_quotient(x, support, &w);
        if best.as_ref().map_or(true, |b| value < b.value) {
            best = Some(CompatibilityEstimate { value, witness: w });
        }
    }
    Ok(best.expect("at least one restart"))
}

fn signs_of(signs: &[f64], support: &[usize], i: usize) -> f64 {
    let j = support.iter().position(|&s| s == i).expect("index in support");
    signs[j]
}

/// Euclidean projection onto the probability simplex.
fn project_simplex(v: &mut [f64]) {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cum += uj;
        let t = (cum - 1.0) / (j + 1) as f64;
        if uj - t > 0.0 {
            theta = t;
        }
    }
    v.iter_mut().for_each(|x| *x = (*x - theta).max(0.0));
}

/// Euclidean projection onto `{||v||_1 <= radius}`.
fn project_l1_ball(v: &mut [f64], radius: f64) {
    let norm: f64 = v.iter().map(|x| x.abs()).sum();
    if norm <= radius {
        return;
    }
    if radius == 0.0 {
        v.iter_mut().for_each(|x| *x = 0.0);
        return;
    }
    let mut mag: Vec<f64> = v.iter().map(|x| x.abs() / radius).collect();
    project_simplex(&mut mag);
    for (x, m) in v.iter_mut().zip(mag) {
        *x = x.signum() * m * radius;
    }
}

/// `sum_t (<w, x_t> - y_t)^2` for a `d x n` design.
pub fn squared_loss(x: &DMatrix<f64>, y: &DVector<f64>, w: &DVector<f64>) -> f64 {
    (x.transpose() * w - y).norm_squared()
}

/// Largest dimension the exhaustive sparse comparator accepts.
pub const MAX_ORACLE_DIM: usize = 12;

/// Exact minimizer of the squared loss over `||w||_0 <= k`, by least squares
/// on every support of size `min(k, d)`.
pub fn best_k_sparse_oracle(x: &DMatrix<f64>, y: &DVector<f64>, k: usize) -> Result<DVector<f64>> {
    let d = x.nrows();
    if d > MAX_ORACLE_DIM {
        return Err(Error::DimensionTooLarge {
            d,
            max: MAX_ORACLE_DIM,
        });
    }
    if y.len() != x.ncols() {
        return Err(Error::DimensionMismatch {
            expected: x.ncols(),
            got: y.len(),
        });
    }
    let size = k.min(d);
    let mut best = DVector::zeros(d);
    let mut best_loss = squared_loss(x, y, &best);
    for mask in 0u32..(1 << d) {
        if mask.count_ones() as usize != size {
            continue;
        }
        let cols: Vec<usize> = (0..d).filter(|&i| mask & (1 << i) != 0).collect();
        let sub = DMatrix::from_fn(x.ncols(), cols.len(), |t, j| x[(cols[j], t)]);
        let Ok(coef) = sub.clone().svd(true, true).solve(y, 1e-12) else {
            continue;
        };
        let mut w = DVector::zeros(d);
        for (j, &i) in cols.iter().enumerate() {
            w[i] = coef[j];
        }
        let loss = squared_loss(x, y, &w);
        if loss < best_loss {
            best_loss = loss;
            best = w;
        }
    }
    Ok(best)
}

/// Estimation errors against the hidden vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L1Errors {
    /// `||Delta(S)||_1`
    pub on_support: f64,
    /// `||Delta(S^c)||_1`
    pub off_support: f64,
    /// `||Delta||_1`
    pub total: f64,
    /// `||Delta||_2`
    pub l2: f64,
}

pub fn l1_errors(w_hat: &DVector<f64>, gt: &GroundTruth) -> L1Errors {
    let mut on = 0.0;
    let mut off = 0.0;
    let mut sq = 0.0;
    for i in 0..gt.dim() {
        let delta = w_hat[i] - gt.w_star[i];
        sq += delta * delta;
        if gt.in_support(i) {
            on += delta.abs();
        } else {
            off += delta.abs();
        }
    }
    L1Errors {
        on_support: on,
        off_support: off,
        total: on + off,
        l2: sq.sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ground_truth_constraints() {
        for seed in 0..50 {
            let gt = gen_ground_truth(10, 3, 0.2, 0.5, seed).unwrap();
            assert_eq!(gt.support.len(), 3);
            assert!(gt.w_star.lp_norm(1) <= 1.0 + 1e-15);
            for &i in &gt.support {
                let m = gt.w_star[i].abs();
                assert!((0.2..=1.0 / 3.0).contains(&m));
            }
            assert_eq!(gt.w_star.iter().filter(|v| **v != 0.0).count(), 3);
        }
        let tight = gen_ground_truth(8, 4, 0.25, 0.0, 9).unwrap();
        for &i in &tight.support {
            assert_eq!(tight.w_star[i].abs(), 0.25);
        }
        assert_eq!(
            gen_ground_truth(10, 3, 0.2, 0.1, 4).unwrap(),
            gen_ground_truth(10, 3, 0.2, 0.1, 4).unwrap()
        );
        assert!(gen_ground_truth(10, 4, 0.3, 0.1, 0).is_err());
    }

    #[test]
    fn designs_stay_in_box() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for design in [
            DesignSpec::Rademacher,
            DesignSpec::UniformBox,
            DesignSpec::CorrelatedGaussian { rho: 0.6 },
        ] {
            for _ in 0..500 {
                let x = design.sample(12, &mut rng);
                assert!(x.iter().all(|v| v.abs() <= 1.0));
                if design == DesignSpec::Rademacher {
                    assert!(x.iter().all(|v| v.abs() == 1.0));
                }
            }
        }
    }

    #[test]
    fn noiseless_rounds_are_exact() {
        let gt = gen_ground_truth(6, 3, 0.1, 0.0, 2).unwrap();
        let mut s = SyntheticStream::new(gt.clone(), DesignSpec::UniformBox, 3);
        for _ in 0..100 {
            let r = s.next_round();
            let dotp: f64 = (0..6).map(|i| gt.w_star[i] * r.x[i]).sum();
            assert!((r.y - dotp).abs() < 1e-15);
            assert_eq!(r.y, r.clean);
        }
    }

    #[test]
    fn error_norms() {
        let gt = GroundTruth::new(DVector::from_row_slice(&[0.5, 0.0, -0.25, 0.0]), 0.1).unwrap();
        let e = l1_errors(&gt.w_star, &gt);
        assert_eq!((e.on_support, e.total, e.l2), (0.0, 0.0, 0.0));
        let e = l1_errors(&DVector::zeros(4), &gt);
        assert_eq!(e.on_support, 0.75);
        let e = l1_errors(&DVector::from_row_slice(&[0.4, 0.1, -0.25, -0.05]), &gt);
        assert!((e.on_support - 0.1).abs() < 1e-15);
        assert!((e.off_support - 0.15).abs() < 1e-15);
        assert!((e.l2 - (0.01f64 + 0.01 + 0.0025).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn projections() {
        let mut v = vec![0.5, 0.5, 0.5];
        project_simplex(&mut v);
        assert!(v.iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-15));
        let mut v = vec![2.0, -0.1];
        project_simplex(&mut v);
        assert_eq!(v, vec![1.0, 0.0]);
        let mut v = vec![3.0, -1.0];
        project_l1_ball(&mut v, 1.0);
        assert!((v.iter().map(|x| x.abs()).sum::<f64>() - 1.0).abs() < 1e-15);
        assert_eq!(v, vec![1.0, 0.0]);
    }

    #[test]
    fn best_sparse_recovers_noiseless_truth() {
        let gt = gen_ground_truth(6, 2, 0.2, 0.0, 1).unwrap();
        let mut s = SyntheticStream::new(gt.clone(), DesignSpec::UniformBox, 2);
        let (x, y) = s.take_matrix(30);
        let w = best_k_sparse_oracle(&x, &y, 2).unwrap();
        assert!((w - &gt.w_star).amax() < 1e-10);
    }

    #[test]
    fn best_sparse_with_full_budget_is_least_squares() {
        let gt = gen_ground_truth(4, 2, 0.2, 0.3, 8).unwrap();
        let mut s = SyntheticStream::new(gt, DesignSpec::UniformBox, 8);
        let (x, y) = s.take_matrix(40);
        let w = best_k_sparse_oracle(&x, &y, 4).unwrap();
        let ols = (&x * x.transpose()).lu().solve(&(&x * &y)).unwrap();
        assert!((w - ols).amax() < 1e-10);
        assert!(best_k_sparse_oracle(&DMatrix::zeros(13, 3), &DVector::zeros(3), 2).is_err());
    }
}

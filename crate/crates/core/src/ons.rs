//! Projected Online Newton Step on the estimated support.
//!
//! The iterate lives on the `k` coordinates of the support (in increasing
//! index order). Before each prediction it is projected, in the norm induced
//! by the curvature matrix `A`, onto `|<w, x(S)>| <= 1`. The inverse of `A`
//! is maintained with rank-one updates and re-derived from `A` every
//! [`REFRESH_INTERVAL`] steps.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::schedule::OnsParams;

/// Steps between direct re-inversions of the curvature matrix.
pub const REFRESH_INTERVAL: u64 = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct OnsEpochState {
    support: Vec<usize>,
    w_tilde: Vec<f64>,
    w_bar: Vec<f64>,
    a: DMatrix<f64>,
    a_inv: DMatrix<f64>,
    rho: f64,
    epsilon: f64,
    steps: u64,
}

impl OnsEpochState {
    /// Fresh state on `support` starting from `start` (values on the support).
    pub fn fresh(support: Vec<usize>, start: Vec<f64>, params: &OnsParams) -> Result<Self> {
        if support.len() != start.len() {
            return Err(Error::DimensionMismatch {
                expected: support.len(),
                got: start.len(),
            });
        }
        if !(params.epsilon > 0.0) {
            return Err(Error::param("epsilon", "must be > 0"));
        }
        let k = support.len();
        Ok(OnsEpochState {
            support,
            w_bar: start.clone(),
            w_tilde: start,
            a: DMatrix::identity(k, k) * params.epsilon,
            a_inv: DMatrix::identity(k, k) / params.epsilon,
            rho: params.rho,
            epsilon: params.epsilon,
            steps: 0,
        })
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    /// Pre-projection iterate on the support.
    pub fn w_tilde(&self) -> &[f64] {
        &self.w_tilde
    }

    /// Last projected iterate on the support.
    pub fn w_bar(&self) -> &[f64] {
        &self.w_bar
    }

    pub fn curvature(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn curvature_inverse(&self) -> &DMatrix<f64> {
        &self.a_inv
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// `max |A A^-1 - I|`.
    pub fn inverse_defect(&self) -> f64 {
        let k = self.support.len();
        (&self.a * &self.a_inv - DMatrix::<f64>::identity(k, k)).amax()
    }

    /// Projects the pre-projection iterate against `x_support` and returns
    /// the prediction `<w_bar, x(S)>`.
    pub fn predict(&mut self, x_support: &[f64]) -> f64 {
        self.w_bar = project(&self.w_tilde, x_support, &self.a_inv);
        dot(&self.w_bar, x_support)
    }

    /// Gradient step after the label is revealed; call after [`predict`].
    ///
    /// [`predict`]: OnsEpochState::predict
    pub fn update(&mut self, x_support: &[f64], y_hat: f64, y: f64) {
        let k = self.support.len();
        let scale = 2.0 * (y_hat - y);
        let g: Vec<f64> = x_support.iter().map(|v| scale * v).collect();
        if scale != 0.0 {
            for i in 0..k {
                for j in 0..k {
                    self.a[(i, j)] += self.rho * g[i] * g[j];
                }
            }
            rank_one_inverse_update(&mut self.a_inv, &g, self.rho);
        }
        self.steps += 1;
        if self.steps % REFRESH_INTERVAL == 0 {
            self.refresh_inverse();
        }
        let step = mat_vec(&self.a_inv, &g);
        for i in 0..k {
            self.w_tilde[i] = self.w_bar[i] - step[i];
        }
    }

    /// One exploitation round: project, predict, then update with `y`.
    pub fn step(&mut self, x_support: &[f64], y: f64) -> f64 {
        let y_hat = self.predict(x_support);
        self.update(x_support, y_hat, y);
        y_hat
    }

    pub fn refresh_inverse(&mut self) {
        let inv = self
            .a
            .clone()
            .cholesky()
            .map(|c| c.inverse())
            .or_else(|| self.a.clone().try_inverse());
        if let Some(inv) = inv {
            // symmetrize against round-off
            self.a_inv = (&inv + inv.transpose()) * 0.5;
        }
    }
}

/// Epoch initialization: keep the running state when the support is
/// unchanged, otherwise restart from the selector estimate with `A = eps I`.
pub fn init_epoch(
    w_hat: &[f64],
    support: &[usize],
    prev: Option<OnsEpochState>,
    params: &OnsParams,
) -> Result<OnsEpochState> {
    if let Some(prev) = prev {
        if prev.support.len() != support.len() {
            return Err(Error::DimensionMismatch {
                expected: prev.support.len(),
                got: support.len(),
            });
        }
        if prev.support == support {
            return Ok(prev);
        }
    }
    for &i in support {
        if i >= w_hat.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                d: w_hat.len(),
            });
        }
    }
    let start = support.iter().map(|&i| w_hat[i]).collect();
    OnsEpochState::fresh(support.to_vec(), start, params)
}

/// `tau(u) = sign(u) max(|u| - 1, 0)`.
pub fn clip_excess(u: f64) -> f64 {
    u.signum() * (u.abs() - 1.0).max(0.0)
}

/// `P(w) = w - tau(<w, x>) / <x, A^-1 x> * A^-1 x`; identity when
/// `|<w, x>| <= 1` or `x = 0`.
pub fn project(w: &[f64], x: &[f64], a_inv: &DMatrix<f64>) -> Vec<f64> {
    let u = dot(w, x);
    if u.abs() <= 1.0 || x.iter().all(|&v| v == 0.0) {
        return w.to_vec();
    }
    let ax = mat_vec(a_inv, x);
    let denom = dot(x, &ax);
    if !(denom > 0.0) {
        return w.to_vec();
    }
    let f = clip_excess(u) / denom;
    w.iter().zip(&ax).map(|(wi, ai)| wi - f * ai).collect()
}

/// Sherman-Morrison update of `A^-1` for `A + rho g g^T`.
pub fn rank_one_inverse_update(a_inv: &mut DMatrix<f64>, g: &[f64], rho: f64) {
    let k = g.len();
    let v = mat_vec(a_inv, g);
    let denom = 1.0 + rho * dot(g, &v);
    let f = rho / denom;
    for i in 0..k {
        for j in 0..k {
            a_inv[(i, j)] -= f * v[i] * v[j];
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn mat_vec(m: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    let k = v.len();
    (0..k)
        .map(|i| (0..k).map(|j| m[(i, j)] * v[j]).sum())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(k: usize, rho: f64) -> OnsParams {
        OnsParams {
            y_delta: 1.0,
            rho,
            epsilon: k as f64,
        }
    }

    #[test]
    fn projection_examples() {
        let id = DMatrix::identity(2, 2);
        assert_eq!(project(&[2.0, 0.0], &[1.0, 0.0], &id), vec![1.0, 0.0]);
        assert_eq!(project(&[-3.0, 0.0], &[1.0, 0.0], &id), vec![-1.0, 0.0]);
        let w = [0.25, 0.5];
        assert_eq!(project(&w, &[1.0, 0.5], &id), w.to_vec());
        assert_eq!(project(&[5.0, 5.0], &[0.0, 0.0], &id), vec![5.0, 5.0]);
    }

    #[test]
    fn projection_lands_on_band_edge() {
        let a_inv = DMatrix::from_row_slice(3, 3, &[0.5, 0.1, 0.0, 0.1, 0.4, 0.05, 0.0, 0.05, 0.3]);
        let x = [0.9, -0.4, 1.0];
        for w in [[3.0, 1.0, 2.0], [-4.0, 2.0, -1.0]] {
            let p = project(&w, &x, &a_inv);
            assert!((dot(&p, &x).abs() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sherman_morrison_example() {
        let mut inv = DMatrix::from_element(1, 1, 0.5);
        rank_one_inverse_update(&mut inv, &[2.0], 0.125);
        assert!((inv[(0, 0)] - 0.4).abs() < 1e-15);
        let mut same = DMatrix::from_element(1, 1, 0.5);
        rank_one_inverse_update(&mut same, &[0.0], 0.125);
        assert_eq!(same[(0, 0)], 0.5);
    }

    #[test]
    fn single_coordinate_step() {
        let p = params(1, 0.125);
        let mut st = OnsEpochState::fresh(vec![0], vec![0.0], &p).unwrap();
        let y_hat = st.step(&[1.0], 1.0);
        assert_eq!(y_hat, 0.0);
        let a = 1.0 + 4.0 * 0.125;
        assert!((st.curvature()[(0, 0)] - a).abs() < 1e-15);
        assert!((st.w_tilde()[0] - 2.0 / a).abs() < 1e-15);
    }

    #[test]
    fn zero_residual_is_a_no_op() {
        let p = params(2, 0.1);
        let mut st = OnsEpochState::fresh(vec![1, 4], vec![0.3, -0.2], &p).unwrap();
        let before = st.clone();
        let x = [0.5, 1.0];
        let y = 0.3 * 0.5 - 0.2;
        st.step(&x, y);
        assert_eq!(st.curvature(), before.curvature());
        assert_eq!(st.w_tilde(), before.w_tilde());
    }

    #[test]
    fn epoch_initialization() {
        let p = params(3, 0.05);
        let w_hat = [0.0, 0.4, 0.0, -0.2, 0.1];
        let first = init_epoch(&w_hat, &[1, 3, 4], None, &p).unwrap();
        assert_eq!(first.w_tilde(), &[0.4, -0.2, 0.1]);
        assert_eq!(first.curvature(), &(DMatrix::identity(3, 3) * 3.0));

        let mut running = first.clone();
        running.step(&[1.0, -1.0, 0.5], 2.0);
        let carried = init_epoch(&[0.0; 5], &[1, 3, 4], Some(running.clone()), &p).unwrap();
        assert_eq!(carried, running);

        let reset = init_epoch(&[0.0; 5], &[0, 1, 2], Some(running), &p).unwrap();
        assert_eq!(reset.w_tilde(), &[0.0, 0.0, 0.0]);
        assert_eq!(reset.curvature(), &(DMatrix::identity(3, 3) * 3.0));

        assert!(init_epoch(&w_hat, &[1, 3], Some(first), &p).is_err());
    }

    #[test]
    fn inverse_stays_consistent() {
        let p = params(3, 0.03);
        let mut st = OnsEpochState::fresh(vec![0, 1, 2], vec![0.0; 3], &p).unwrap();
        let mut phase = 0.0f64;
        for t in 0..25_000 {
            phase += 0.7;
            let x = [phase.sin(), (1.3 * phase).cos(), ((t % 7) as f64 - 3.0) / 3.0];
            let y = 0.3 * x[0] - 0.5 * x[1] + 0.1 * (2.1 * phase).sin();
            st.step(&x, y);
            assert!(st.inverse_defect() <= 1e-6);
        }
        let direct = st.curvature().clone().try_inverse().unwrap();
        assert!((st.curvature_inverse() - direct).amax() <= 1e-8);
    }
}

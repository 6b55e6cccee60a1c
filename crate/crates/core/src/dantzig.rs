//! The Dantzig selector `min ||w||_1 s.t. ||bbar - Mbar w||_inf <= gamma`,
//! recast as a linear program over `(w, u)` with `-u <= w <= u`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::estimation::SelectorAccumulators;
use crate::simplex::{solve_lp, LpStandardForm, LpStatus, SimplexOptions};

#[derive(Debug, Clone, PartialEq)]
pub struct DantzigProblem {
    bbar: DVector<f64>,
    mbar: DMatrix<f64>,
    gamma: f64,
}

impl DantzigProblem {
    pub fn new(bbar: DVector<f64>, mbar: DMatrix<f64>, gamma: f64) -> Result<Self> {
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(Error::param("gamma", format!("must be finite and >= 0, got {gamma}")));
        }
        let d = bbar.len();
        if mbar.nrows() != d || mbar.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: mbar.nrows(),
            });
        }
        if bbar.iter().chain(mbar.iter()).any(|v| !v.is_finite()) {
            return Err(Error::param("problem", "non-finite entry"));
        }
        Ok(DantzigProblem { bbar, mbar, gamma })
    }

    /// `DS(gamma)` built from `(1/s) b` and `(1/s) H`.
    pub fn from_accumulators(acc: &SelectorAccumulators, gamma: f64) -> Result<Self> {
        let (bbar, mbar) = acc.averages();
        Self::new(bbar, mbar, gamma)
    }

    pub fn dim(&self) -> usize {
        self.bbar.len()
    }

    pub fn bbar(&self) -> &DVector<f64> {
        &self.bbar
    }

    pub fn mbar(&self) -> &DMatrix<f64> {
        &self.mbar
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `||bbar - Mbar w||_inf - gamma`; nonpositive for feasible `w`.
    pub fn constraint_excess(&self, w: &DVector<f64>) -> f64 {
        (&self.bbar - &self.mbar * w).amax() - self.gamma
    }
}

/// Variables `z = (w_1..w_d, u_1..u_d)`; rows `w - u <= 0`, `-w - u <= 0`,
/// `Mbar w <= bbar + gamma`, `-Mbar w <= gamma - bbar`.
pub fn build_lp(p: &DantzigProblem) -> LpStandardForm {
    let d = p.dim();
    let n = 2 * d;
    let mut rows = Vec::with_capacity(4 * d);
    let mut rhs = Vec::with_capacity(4 * d);
    for i in 0..d {
        let mut r = vec![0.0; n];
        r[i] = 1.0;
        r[d + i] = -1.0;
        rows.push(r);
        rhs.push(0.0);
    }
    for i in 0..d {
        let mut r = vec![0.0; n];
        r[i] = -1.0;
        r[d + i] = -1.0;
        rows.push(r);
        rhs.push(0.0);
    }
    for i in 0..d {
        let mut r = vec![0.0; n];
        for j in 0..d {
            r[j] = p.mbar[(i, j)];
        }
        rows.push(r);
        rhs.push(p.bbar[i] + p.gamma);
    }
    for i in 0..d {
        let mut r = vec![0.0; n];
        for j in 0..d {
            r[j] = -p.mbar[(i, j)];
        }
        rows.push(r);
        rhs.push(p.gamma - p.bbar[i]);
    }
    let mut objective = vec![0.0; n];
    objective[d..].fill(1.0);
    let mut free = vec![false; n];
    free[..d].fill(true);
    LpStandardForm {
        objective,
        rows,
        rhs,
        free,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DantzigSolution {
    pub w: DVector<f64>,
    /// `||w||_1` at the returned point.
    pub objective: f64,
    /// Independently recomputed `||bbar - Mbar w||_inf - gamma`.
    pub excess: f64,
    pub iterations: usize,
}

/// Solves `DS(gamma)` with the reference simplex and re-checks feasibility of
/// the returned point against the original problem data.
pub fn solve_dantzig(p: &DantzigProblem, opts: &SimplexOptions) -> Result<DantzigSolution> {
    let d = p.dim();
    let lp = build_lp(p);
    let sol = solve_lp(&lp, opts);
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Err(Error::Infeasible),
        LpStatus::Unbounded => return Err(Error::Unbounded),
        LpStatus::IterationLimit => {
            return Err(Error::IterationLimit(opts.max_iters.unwrap_or(50 * lp.num_rows())))
        }
    }
    let w = DVector::from_row_slice(&sol.z[..d]);
    let excess = p.constraint_excess(&w);
    if excess > opts.feas_tol {
        // the basis was optimal but the point drifted outside the tolerance
        return Err(Error::Infeasible);
    }
    Ok(DantzigSolution {
        objective: w.lp_norm(1),
        w,
        excess,
        iterations: sol.iterations,
    })
}

/// Identity-design closed form `w_i = sign(b_i) max(|b_i| - gamma, 0)`.
pub fn soft_threshold_oracle(bbar: &DVector<f64>, gamma: f64) -> DVector<f64> {
    bbar.map(|b| b.signum() * (b.abs() - gamma).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simplex::solve_lp;

    fn identity_problem(b: &[f64], gamma: f64) -> DantzigProblem {
        DantzigProblem::new(
            DVector::from_row_slice(b),
            DMatrix::identity(b.len(), b.len()),
            gamma,
        )
        .unwrap()
    }

    #[test]
    fn lp_shape() {
        let lp = build_lp(&identity_problem(&[0.3], 0.1));
        assert_eq!(lp.num_vars(), 2);
        assert_eq!(lp.num_rows(), 4);
    }

    #[test]
    fn soft_threshold_example() {
        let p = identity_problem(&[0.9, -0.5, 0.1], 0.2);
        let sol = solve_dantzig(&p, &SimplexOptions::default()).unwrap();
        let expect = [0.7, -0.3, 0.0];
        for i in 0..3 {
            assert!((sol.w[i] - expect[i]).abs() < 1e-12, "{:?}", sol.w);
        }
        assert!((sol.objective - 1.0).abs() < 1e-12);
        let oracle = soft_threshold_oracle(p.bbar(), 0.2);
        assert!((oracle - DVector::from_row_slice(&expect)).amax() < 1e-15);
    }

    #[test]
    fn oracle_edge_cases() {
        let b = DVector::from_row_slice(&[0.4, -2.0, 0.0]);
        assert_eq!(soft_threshold_oracle(&b, 0.0), b);
        assert_eq!(soft_threshold_oracle(&b, 2.0), DVector::zeros(3));
    }

    #[test]
    fn large_gamma_gives_zero() {
        let p = identity_problem(&[0.4, -0.2], 0.5);
        let lp = build_lp(&p);
        let sol = solve_lp(&lp, &SimplexOptions::default());
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!(sol.z.iter().all(|v| v.abs() < 1e-15));
        assert_eq!(sol.objective, 0.0);
    }

    #[test]
    fn zero_design_is_infeasible() {
        let p = DantzigProblem::new(
            DVector::from_row_slice(&[1.0, 0.0]),
            DMatrix::zeros(2, 2),
            0.5,
        )
        .unwrap();
        assert_eq!(solve_dantzig(&p, &SimplexOptions::default()), Err(Error::Infeasible));
    }

    #[test]
    fn exact_recovery_with_zero_gamma() {
        let p = identity_problem(&[0.25, 0.0, -0.5, 0.125], 0.0);
        let sol = solve_dantzig(&p, &SimplexOptions::default()).unwrap();
        assert!((sol.w - p.bbar()).amax() < 1e-12);
    }

    #[test]
    fn rejects_negative_gamma() {
        let r = DantzigProblem::new(DVector::zeros(2), DMatrix::identity(2, 2), -0.1);
        assert!(matches!(r, Err(Error::InvalidParameter { name: "gamma", .. })));
    }
}

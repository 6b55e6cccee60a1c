//! Dense two-phase tableau simplex for small linear programs in inequality
//! form: minimize `c^T z` subject to `A z <= b`, with each variable either
//! free or nonnegative.
//!
//! Free variables are split into a difference of two nonnegative columns.
//! Rows with a negative right-hand side get an artificial variable for phase
//! one. Once a basis is optimal the basic values are re-solved from the
//! original constraint data to remove accumulated pivoting error.

use nalgebra::{DMatrix, DVector};

/// A linear program `min c^T z  s.t.  A z <= b`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpStandardForm {
    pub objective: Vec<f64>,
    /// Dense constraint rows, each of length `objective.len()`.
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
    /// `true` for variables without a sign constraint.
    pub free: Vec<bool>,
}

impl LpStandardForm {
    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Largest violation `max(A z - b)` and of the sign constraints, or 0.
    pub fn max_violation(&self, z: &[f64]) -> f64 {
        let rows = self
            .rows
            .iter()
            .zip(&self.rhs)
            .map(|(row, b)| row.iter().zip(z).map(|(a, v)| a * v).sum::<f64>() - b);
        let signs = self
            .free
            .iter()
            .zip(z)
            .filter(|(free, _)| !**free)
            .map(|(_, v)| -v);
        rows.chain(signs).fold(0.0, f64::max)
    }

    pub fn objective_value(&self, z: &[f64]) -> f64 {
        self.objective.iter().zip(z).map(|(c, v)| c * v).sum()
    }

    /// Plain-text listing: the objective row, then one line per constraint
    /// with its coefficients followed by the right-hand side.
    pub fn write_listing<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        let join = |v: &[f64]| v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(" ");
        writeln!(out, "{}", join(&self.objective))?;
        for (row, b) in self.rows.iter().zip(&self.rhs) {
            writeln!(out, "{} {}", join(row), format_args!("{b:e}"))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Variable values; meaningful only when `status` is `Optimal`.
    pub z: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

/// Entering-variable selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PivotRule {
    /// Smallest eligible index for both entering and leaving variables.
    Bland,
    /// Most negative reduced cost, falling back to Bland's rule while a run
    /// of degenerate pivots is in progress.
    Steepest,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    pub feas_tol: f64,
    /// `None` selects `50 * rows`.
    pub max_iters: Option<usize>,
    pub pivot_rule: PivotRule,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            feas_tol: 1e-8,
            max_iters: None,
            pivot_rule: PivotRule::Bland,
        }
    }
}

const PIVOT_TOL: f64 = 1e-11;
const COST_TOL: f64 = 1e-11;
const DEGENERATE_STREAK: usize = 20;

struct Tableau {
    m: usize,
    width: usize,
    /// Constraint rows followed by the objective row; the last column is the rhs.
    cells: Vec<f64>,
    basis: Vec<usize>,
    barred: Vec<bool>,
}

impl Tableau {
    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.cells[r * self.width + c]
    }

    fn rhs_col(&self) -> usize {
        self.width - 1
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.width;
        let piv = self.cells[pr * w + pc];
        {
            let row = &mut self.cells[pr * w..(pr + 1) * w];
            for v in row.iter_mut() {
                *v /= piv;
            }
            row[pc] = 1.0;
        }
        let (before, rest) = self.cells.split_at_mut(pr * w);
        let (prow, after) = rest.split_at_mut(w);
        let eliminate = |row: &mut [f64]| {
            let f = row[pc];
            if f != 0.0 {
                for (v, p) in row.iter_mut().zip(prow.iter()) {
                    *v -= f * p;
                }
                row[pc] = 0.0;
            }
        };
        before.chunks_exact_mut(w).for_each(eliminate);
        after.chunks_exact_mut(w).for_each(eliminate);
        self.basis[pr] = pc;
    }

    /// Runs simplex iterations on the current objective row.
    fn optimize(&mut self, rule: PivotRule, budget: &mut usize, used: &mut usize) -> LpStatus {
        let obj = self.m;
        let rhs = self.rhs_col();
        let mut degenerate_run = 0usize;
        loop {
            let use_bland = rule == PivotRule::Bland || degenerate_run >= DEGENERATE_STREAK;
            let mut entering = None;
            let mut best = -COST_TOL;
            for c in 0..rhs {
                if self.barred[c] {
                    continue;
                }
                let rc = self.at(obj, c);
                if rc < best {
                    entering = Some(c);
                    if use_bland {
                        break;
                    }
                    best = rc;
                }
            }
            let Some(e) = entering else {
                return LpStatus::Optimal;
            };

            let mut leaving: Option<(usize, f64)> = None;
            for r in 0..self.m {
                let a = self.at(r, e);
                if a > PIVOT_TOL {
                    let ratio = self.at(r, rhs).max(0.0) / a;
                    match leaving {
                        None => leaving = Some((r, ratio)),
                        Some((lr, lratio)) => {
                            if ratio < lratio - 1e-14
                                || (ratio <= lratio + 1e-14 && self.basis[r] < self.basis[lr])
                            {
                                leaving = Some((r, ratio));
                            }
                        }
                    }
                }
            }
            let Some((l, ratio)) = leaving else {
                return LpStatus::Unbounded;
            };

            if *budget == 0 {
                return LpStatus::IterationLimit;
            }
            *budget -= 1;
            *used += 1;
            if ratio <= 1e-14 {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            self.pivot(l, e);
        }
    }
}

/// Solves `lp` with a two-phase simplex.
pub fn solve_lp(lp: &LpStandardForm, opts: &SimplexOptions) -> LpSolution {
    let n = lp.num_vars();
    let m = lp.num_rows();
    assert_eq!(lp.free.len(), n, "free flags must match variable count");
    assert_eq!(lp.rhs.len(), m, "rhs must match row count");

    // column layout: [z+ (n) | z- (free vars) | slack (m) | artificial]
    let neg_cols: Vec<usize> = (0..n).filter(|&j| lp.free[j]).collect();
    let n_struct = n + neg_cols.len();
    let art_rows: Vec<usize> = (0..m).filter(|&i| lp.rhs[i] < 0.0).collect();
    let n_cols = n_struct + m + art_rows.len();
    let width = n_cols + 1;

    let mut cells = vec![0.0; (m + 1) * width];
    let mut basis = vec![0usize; m];
    let mut art_of_row = vec![None; m];
    for (a, &i) in art_rows.iter().enumerate() {
        art_of_row[i] = Some(n_struct + m + a);
    }
    for i in 0..m {
        let row = &mut cells[i * width..(i + 1) * width];
        let sign = if art_of_row[i].is_some() { -1.0 } else { 1.0 };
        for j in 0..n {
            row[j] = sign * lp.rows[i][j];
        }
        for (c, &j) in neg_cols.iter().enumerate() {
            row[n + c] = -sign * lp.rows[i][j];
        }
        row[n_struct + i] = sign;
        row[n_cols] = sign * lp.rhs[i];
        match art_of_row[i] {
            Some(ac) => {
                row[ac] = 1.0;
                basis[i] = ac;
            }
            None => basis[i] = n_struct + i,
        }
    }

    let mut tab = Tableau {
        m,
        width,
        cells,
        basis,
        barred: vec![false; n_cols],
    };
    let mut budget = opts.max_iters.unwrap_or(50 * m.max(1));
    let cap = budget;
    let mut used = 0usize;

    if !art_rows.is_empty() {
        // phase one: minimize the sum of artificials
        let obj = m * width;
        for c in n_struct + m..n_cols {
            tab.cells[obj + c] = 1.0;
        }
        for &i in &art_rows {
            for c in 0..width {
                tab.cells[obj + c] -= tab.cells[i * width + c];
            }
        }
        match tab.optimize(opts.pivot_rule, &mut budget, &mut used) {
            LpStatus::Optimal => {}
            LpStatus::IterationLimit => return failed(LpStatus::IterationLimit, n, cap),
            // phase one is bounded below by zero
            LpStatus::Unbounded | LpStatus::Infeasible => {
                return failed(LpStatus::Infeasible, n, used)
            }
        }
        let infeasibility = -tab.at(m, n_cols);
        if infeasibility > opts.feas_tol {
            return failed(LpStatus::Infeasible, n, used);
        }
        for c in n_struct + m..n_cols {
            tab.barred[c] = true;
        }
        for r in 0..m {
            if tab.basis[r] >= n_struct + m {
                let replacement = (0..n_struct + m).find(|&c| tab.at(r, c).abs() > 1e-9);
                if let Some(c) = replacement {
                    tab.pivot(r, c);
                }
            }
        }
    }

    // phase two objective row: c_j - c_B^T B^-1 A_j
    let cost = |c: usize| -> f64 {
        if c < n {
            lp.objective[c]
        } else if c < n_struct {
            -lp.objective[neg_cols[c - n]]
        } else {
            0.0
        }
    };
    let obj = m * width;
    for c in 0..width {
        tab.cells[obj + c] = if c < n_cols { cost(c) } else { 0.0 };
    }
    for r in 0..m {
        let cb = cost(tab.basis[r]);
        if cb != 0.0 {
            for c in 0..width {
                tab.cells[obj + c] -= cb * tab.cells[r * width + c];
            }
        }
    }
    let status = tab.optimize(opts.pivot_rule, &mut budget, &mut used);
    if status != LpStatus::Optimal {
        return failed(status, n, if status == LpStatus::IterationLimit { cap } else { used });
    }

    let mut values = vec![0.0; n_cols];
    for r in 0..m {
        values[tab.basis[r]] = tab.at(r, n_cols);
    }
    let mut z = collapse(&values, n, &neg_cols);
    if lp.max_violation(&z) > 0.01 * opts.feas_tol {
        if let Some(refined) = resolve_basis(lp, &tab.basis, &neg_cols, &art_of_row) {
            let rz = collapse(&refined, n, &neg_cols);
            if lp.max_violation(&rz) <= lp.max_violation(&z) {
                z = rz;
            }
        }
    }
    LpSolution {
        status: LpStatus::Optimal,
        objective: lp.objective_value(&z),
        z,
        iterations: used,
    }
}

fn failed(status: LpStatus, n: usize, iterations: usize) -> LpSolution {
    LpSolution {
        status,
        z: vec![0.0; n],
        objective: f64::NAN,
        iterations,
    }
}

fn collapse(values: &[f64], n: usize, neg_cols: &[usize]) -> Vec<f64> {
    let mut z = values[..n].to_vec();
    for (c, &j) in neg_cols.iter().enumerate() {
        z[j] -= values[n + c];
    }
    z
}

/// Solves `B x_B = b` for the final basis using the original constraint data.
fn resolve_basis(
    lp: &LpStandardForm,
    basis: &[usize],
    neg_cols: &[usize],
    art_of_row: &[Option<usize>],
) -> Option<Vec<f64>> {
    let n = lp.num_vars();
    let m = lp.num_rows();
    let n_struct = n + neg_cols.len();
    let column = |c: usize, i: usize| -> f64 {
        if c < n {
            lp.rows[i][c]
        } else if c < n_struct {
            -lp.rows[i][neg_cols[c - n]]
        } else if c < n_struct + m {
            if c - n_struct == i {
                1.0
            } else {
                0.0
            }
        } else {
            // artificials were added to the negated row with coefficient +1
            match art_of_row[i] {
                Some(ac) if ac == c => -1.0,
                _ => 0.0,
            }
        }
    };
    let bmat = DMatrix::from_fn(m, m, |i, r| column(basis[r], i));
    let rhs = DVector::from_row_slice(&lp.rhs);
    let xb = bmat.lu().solve(&rhs)?;
    let n_cols = n_struct + m + art_of_row.iter().flatten().count();
    let mut values = vec![0.0; n_cols];
    for (r, &c) in basis.iter().enumerate() {
        values[c] = xb[r];
    }
    Some(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(objective: Vec<f64>, rows: Vec<Vec<f64>>, rhs: Vec<f64>, free: Vec<bool>) -> LpStandardForm {
        LpStandardForm {
            objective,
            rows,
            rhs,
            free,
        }
    }

    #[test]
    fn textbook_maximization() {
        // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), value 36
        let p = lp(
            vec![-3.0, -5.0],
            vec![vec![1.0, 0.0], vec![0.0, 2.0], vec![3.0, 2.0]],
            vec![4.0, 12.0, 18.0],
            vec![false, false],
        );
        for rule in [PivotRule::Bland, PivotRule::Steepest] {
            let sol = solve_lp(&p, &SimplexOptions { pivot_rule: rule, ..Default::default() });
            assert_eq!(sol.status, LpStatus::Optimal);
            assert!((sol.z[0] - 2.0).abs() < 1e-12);
            assert!((sol.z[1] - 6.0).abs() < 1e-12);
            assert!((sol.objective + 36.0).abs() < 1e-12);
        }
    }

    #[test]
    fn needs_phase_one() {
        // min x + y s.t. x + y >= 2, x - y <= 1, x,y >= 0
        let p = lp(
            vec![1.0, 1.0],
            vec![vec![-1.0, -1.0], vec![1.0, -1.0]],
            vec![-2.0, 1.0],
            vec![false, false],
        );
        let sol = solve_lp(&p, &SimplexOptions::default());
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 2.0).abs() < 1e-12);
        assert!(p.max_violation(&sol.z) < 1e-12);
    }

    #[test]
    fn free_variable_goes_negative() {
        // min |z| style: min u s.t. z - u <= 0, -z - u <= 0, z <= -3
        let p = lp(
            vec![0.0, 1.0],
            vec![vec![1.0, -1.0], vec![-1.0, -1.0], vec![1.0, 0.0]],
            vec![0.0, 0.0, -3.0],
            vec![true, false],
        );
        let sol = solve_lp(&p, &SimplexOptions::default());
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.z[0] + 3.0).abs() < 1e-12);
        assert!((sol.objective - 3.0).abs() < 1e-12);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let infeasible = lp(
            vec![1.0],
            vec![vec![1.0], vec![-1.0]],
            vec![1.0, -2.0],
            vec![false],
        );
        assert_eq!(solve_lp(&infeasible, &SimplexOptions::default()).status, LpStatus::Infeasible);

        let unbounded = lp(vec![-1.0], vec![vec![-1.0]], vec![0.0], vec![false]);
        assert_eq!(solve_lp(&unbounded, &SimplexOptions::default()).status, LpStatus::Unbounded);
    }

    #[test]
    fn iteration_cap_is_reported() {
        let p = lp(
            vec![-3.0, -5.0],
            vec![vec![1.0, 0.0], vec![0.0, 2.0], vec![3.0, 2.0]],
            vec![4.0, 12.0, 18.0],
            vec![false, false],
        );
        let sol = solve_lp(&p, &SimplexOptions { max_iters: Some(1), ..Default::default() });
        assert_eq!(sol.status, LpStatus::IterationLimit);
    }

    #[test]
    fn listing_format() {
        let p = lp(vec![1.0, 0.5], vec![vec![1.0, -1.0]], vec![2.0], vec![true, false]);
        let mut buf = Vec::new();
        p.write_listing(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0].split(' ').count(), 2);
        assert_eq!(lines[1].split(' ').count(), 3);
        let parsed: Vec<f64> = lines[1].split(' ').map(|t| t.parse().unwrap()).collect();
        assert_eq!(parsed, vec![1.0, -1.0, 2.0]);
    }
}

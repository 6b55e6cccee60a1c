//! Threshold schedule for the Dantzig selector: the variance factor `g`, the
//! regime constants (`mu1`, `mu2`, `s0`, `s1`, `a1`..`a5`), the piecewise
//! `nu_s` sequence, the data-driven threshold `gamma_hat_s`, the
//! ground-truth threshold `gamma_s`, and the ONS step parameters.
//!
//! Every formula has a full-observation (`Variant::Oslr`) and a
//! relaxed-protocol (`Variant::Poslr`) form; the latter evaluates the
//! sampling-dependent factors on the complement `(d - k, k0)`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// `k` attributes per round, observed before the prediction.
    Oslr,
    /// `k` attributes before the prediction plus `k0` more after the label.
    Poslr { k0: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemConstants {
    pub d: usize,
    pub k: usize,
    pub sigma: f64,
    pub delta: f64,
    pub delta_s: f64,
    pub variant: Variant,
}

impl ProblemConstants {
    pub fn oslr(d: usize, k: usize, sigma: f64, delta: f64, delta_s: f64) -> Result<Self> {
        let pc = ProblemConstants {
            d,
            k,
            sigma,
            delta,
            delta_s,
            variant: Variant::Oslr,
        };
        pc.validate()?;
        Ok(pc)
    }

    pub fn poslr(
        d: usize,
        k: usize,
        k0: usize,
        sigma: f64,
        delta: f64,
        delta_s: f64,
    ) -> Result<Self> {
        let pc = ProblemConstants {
            d,
            k,
            sigma,
            delta,
            delta_s,
            variant: Variant::Poslr { k0 },
        };
        pc.validate()?;
        Ok(pc)
    }

    /// Checks that every derived constant is well defined. Budgets at the
    /// edge of the range (`k_eff > d_eff - 3`) are accepted here; see
    /// [`ProblemConstants::in_analyzed_range`].
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::param("sigma", "must be finite and >= 0"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::param("delta", "must lie in (0, 1)"));
        }
        if !(self.delta_s > 0.0 && self.delta_s.is_finite()) {
            return Err(Error::param("delta_s", "must be finite and > 0"));
        }
        if let Variant::Poslr { .. } = self.variant {
            if self.k < 1 || self.k >= self.d {
                return Err(Error::InvalidBudget { k: self.k, d: self.d });
            }
        }
        let (de, ke) = self.effective_dims();
        if ke < 3 || ke > de {
            return Err(Error::InvalidBudget { k: ke, d: de });
        }
        Ok(())
    }

    /// `(d, k)` for the base protocol, `(d - k, k0)` for the relaxed one.
    pub fn effective_dims(&self) -> (usize, usize) {
        match self.variant {
            Variant::Oslr => (self.d, self.k),
            Variant::Poslr { k0 } => (self.d - self.k, k0),
        }
    }

    /// `3 <= k_eff <= d_eff - 3`, the range the guarantees are stated for.
    pub fn in_analyzed_range(&self) -> bool {
        let (de, ke) = self.effective_dims();
        ke >= 3 && ke + 3 <= de
    }

    fn ln_d(&self) -> f64 {
        (self.d as f64 / self.delta).ln()
    }

    fn ln_d2(&self) -> f64 {
        ((self.d * self.d) as f64 / self.delta).ln()
    }
}

/// `g_{d,k} = (d-1)(d-2) / ((k-1)(k-2))`.
pub fn g_factor(d: usize, k: usize) -> Result<f64> {
    if k < 3 || k > d {
        return Err(Error::InvalidBudget { k, d });
    }
    if k == d {
        return Ok(1.0);
    }
    Ok(((d - 1) * (d - 2)) as f64 / ((k - 1) * (k - 2)) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleConstants {
    pub g: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub s0: f64,
    pub s1: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    pub a5: f64,
    /// Multiplier applied to `gamma_hat`; 1 reproduces the exact thresholds.
    pub scale: f64,
}

impl ScheduleConstants {
    /// `floor(s0)`: last index of the first regime.
    pub fn first_boundary(&self) -> u64 {
        self.s0.floor() as u64
    }

    /// `floor(s1)`: last index of the middle regime.
    pub fn second_boundary(&self) -> u64 {
        self.s1.floor() as u64
    }

    pub fn labeled(&self) -> [(&'static str, f64); 11] {
        [
            ("g", self.g),
            ("mu1", self.mu1),
            ("mu2", self.mu2),
            ("s0", self.s0),
            ("s1", self.s1),
            ("a1", self.a1),
            ("a2", self.a2),
            ("a3", self.a3),
            ("a4", self.a4),
            ("a5", self.a5),
            ("scale", self.scale),
        ]
    }
}

/// Evaluates every regime constant for `pc`.
pub fn derive_constants(pc: &ProblemConstants) -> Result<ScheduleConstants> {
    pc.validate()?;
    let (de, ke) = pc.effective_dims();
    let g = g_factor(de, ke)?;
    let k = pc.k as f64;
    let (def, kef) = (de as f64, ke as f64);
    let sigma = pc.sigma;
    let ds2 = pc.delta_s * pc.delta_s;
    let ds4 = ds2 * ds2;
    let ln_d = pc.ln_d();
    let ln_d2 = pc.ln_d2();
    let sqrt3 = 3f64.sqrt();

    let mu1 = 9.0 / (9.0 - 2.0 * sqrt3);
    let ratio = (def - 2.0) / (kef - 2.0);
    let mu2_den = 1.0 - 6f64.sqrt() / (9.0 * (ratio * ln_d2).sqrt());
    if !(mu2_den > 0.0) {
        return Err(Error::param(
            "mu2",
            format!("denominator {mu2_den} is not positive for these (d, k, delta)"),
        ));
    }
    let mu2 = 1.0 / mu2_den;

    let base = 24.0 * 24.0 * k * k * g / ds4;
    let s0 = base * ln_d2;
    let s1 = base * ratio * ln_d * ln_d2;

    let a1 = (64.0 / 3.0 + 32.0 / 3.0 * sigma) * ln_d;
    let a2 = 16.0 * (6.9 + 1.2 * sigma) / 3.0 * ln_d.sqrt();
    let a3 = 8.0 / 3.0 * (3.0 * ln_d).sqrt();
    let a4 = ds2 * a1 / k
        + 24.0 * a2 * (ln_d2 / ratio).sqrt()
        + 4.0 * a3 * (24.0 * ln_d2.sqrt() + ds2 / (k * g.sqrt()));
    let tail = a2 + 2.0 * sqrt3 * a2 / (9.0 - 2.0 * sqrt3) * (1.0 / (ratio * ln_d2)).sqrt();
    let a5 = match pc.variant {
        Variant::Oslr => {
            9.0 / (9.0 - 2.0 * sqrt3)
                * (ds2 * (8.0 + 4.0 * sigma) / (9.0 * k)
                    + 32.0 / sqrt3
                    + 4.0 * sqrt3 * ds2 / (9.0 * k * (g * ln_d2).sqrt()))
                + tail
        }
        Variant::Poslr { .. } => {
            36.0 / (9.0 - 2.0 * sqrt3)
                * (ds2 * (2.0 + sigma) / (9.0 * k)
                    + 8.0 / sqrt3
                    + (sqrt3 / 9.0) * ds2 / (k * (g * ln_d2).sqrt()))
                + tail
        }
    };

    Ok(ScheduleConstants {
        g,
        mu1,
        mu2,
        s0,
        s1,
        a1,
        a2,
        a3,
        a4,
        a5,
        scale: 1.0,
    })
}

/// Copy of `sc` whose `gamma_hat` is multiplied by `c` ("practical mode").
/// The regime boundaries are untouched.
pub fn practical_scale(sc: &ScheduleConstants, c: f64) -> Result<ScheduleConstants> {
    if !(c > 0.0 && c <= 1.0) {
        return Err(Error::param("c", format!("must lie in (0, 1], got {c}")));
    }
    Ok(ScheduleConstants {
        scale: sc.scale * c,
        ..*sc
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NuRegime {
    /// `s <= floor(s0)`.
    Initial,
    /// `s = floor(s0) + 1`.
    FirstAnchor,
    /// `floor(s0) + 1 < s <= floor(s1)`.
    Middle,
    /// `s = floor(s1) + 1`.
    SecondAnchor,
    /// `s > floor(s1) + 1`.
    Tail,
}

pub fn regime(s: u64, sc: &ScheduleConstants) -> NuRegime {
    let n0 = sc.first_boundary();
    let n1 = sc.second_boundary();
    if s <= n0 {
        NuRegime::Initial
    } else if s == n1 + 1 {
        // when floor(s0) == floor(s1) the two anchors coincide; the second
        // anchor formula reduces to the first with an empty sum
        NuRegime::SecondAnchor
    } else if s == n0 + 1 {
        NuRegime::FirstAnchor
    } else if s <= n1 {
        NuRegime::Middle
    } else {
        NuRegime::Tail
    }
}

struct NuTerms {
    root: f64,
    anchor_core: f64,
    middle_coef: f64,
    tail_coef: f64,
}

fn nu_terms(sc: &ScheduleConstants, pc: &ProblemConstants) -> NuTerms {
    let (de, ke) = pc.effective_dims();
    let k = pc.k as f64;
    let ds2 = pc.delta_s * pc.delta_s;
    let g = sc.g;
    NuTerms {
        root: (3.0 * g * pc.ln_d()).sqrt(),
        anchor_core: 48.0 * k / ds2 * (g * pc.ln_d2()).sqrt() + 2.0,
        // sqrt(sum k^4 g^2 / tau^2) = k^2 g sqrt(sum 1/tau^2)
        middle_coef: sc.mu1 * sc.a4 / (ds2 * ds2) * k * k * g,
        // sqrt(sum k^2 (d-1) / (tau (k-1))) = k sqrt((d-1)/(k-1)) sqrt(sum 1/tau)
        tail_coef: sc.mu2 * sc.a5 / ds2 * k * ((de as f64 - 1.0) / (ke as f64 - 1.0)).sqrt(),
    }
}

/// Incremental evaluation of `nu_s`, one exploration index at a time.
#[derive(Debug, Clone, PartialEq)]
pub struct NuState {
    s: u64,
    nu: f64,
    anchor0: f64,
    anchor1: f64,
    /// `sum_{tau = floor(s0)+1}^{s-1} 1/tau^2`
    inv_sq: f64,
    /// `sum_{tau = floor(s1)+1}^{s-1} 1/tau`
    inv: f64,
}

impl Default for NuState {
    fn default() -> Self {
        Self::new()
    }
}

impl NuState {
    pub fn new() -> Self {
        NuState {
            s: 0,
            nu: 0.0,
            anchor0: 0.0,
            anchor1: 0.0,
            inv_sq: 0.0,
            inv: 0.0,
        }
    }

    /// Index of the last evaluated `nu`; 0 before the first call.
    pub fn s(&self) -> u64 {
        self.s
    }

    pub fn value(&self) -> f64 {
        self.nu
    }

    /// Moves to `s + 1` and returns `nu_{s+1}`.
    pub fn advance(&mut self, sc: &ScheduleConstants, pc: &ProblemConstants) -> f64 {
        let t = nu_terms(sc, pc);
        let n0 = sc.first_boundary();
        let n1 = sc.second_boundary();
        let s = self.s + 1;
        let prev = s - 1;
        if prev > n0 {
            self.inv_sq += 1.0 / (prev as f64 * prev as f64);
        }
        if prev > n1 {
            self.inv += 1.0 / prev as f64;
        }
        let sf = s as f64;
        self.nu = match regime(s, sc) {
            NuRegime::Initial => 2.0 / sf.sqrt() * t.root,
            NuRegime::FirstAnchor => {
                self.anchor0 = t.root / sf * t.anchor_core;
                self.anchor0
            }
            NuRegime::Middle => {
                (n0 + 1) as f64 / sf * self.anchor0
                    + t.root / sf * t.middle_coef * self.inv_sq.sqrt()
            }
            NuRegime::SecondAnchor => {
                self.anchor1 =
                    t.root / sf * (t.anchor_core + t.middle_coef * self.inv_sq.sqrt());
                self.anchor1
            }
            NuRegime::Tail => {
                (n1 + 1) as f64 / sf * self.anchor1 + t.root / sf * t.tail_coef * self.inv.sqrt()
            }
        };
        self.s = s;
        self.nu
    }
}

/// `nu_s`, advancing `state` from its current index up to `s`.
///
/// Panics if `state` is already past `s`.
pub fn nu(s: u64, state: &mut NuState, sc: &ScheduleConstants, pc: &ProblemConstants) -> f64 {
    assert!(s >= 1, "nu is defined for s >= 1");
    assert!(state.s() <= s, "nu state is already at {} > {s}", state.s());
    while state.s() < s {
        state.advance(sc, pc);
    }
    state.value()
}

/// `nu_s` evaluated from scratch, summing each partial sum directly.
pub fn nu_closed_form(s: u64, sc: &ScheduleConstants, pc: &ProblemConstants) -> f64 {
    assert!(s >= 1, "nu is defined for s >= 1");
    let t = nu_terms(sc, pc);
    let n0 = sc.first_boundary();
    let n1 = sc.second_boundary();
    let inv_sq = |from: u64, to: u64| -> f64 { (from..=to).map(|x| 1.0 / (x as f64 * x as f64)).sum() };
    let inv = |from: u64, to: u64| -> f64 { (from..=to).map(|x| 1.0 / x as f64).sum() };
    let anchor0 = t.root / (n0 + 1) as f64 * t.anchor_core;
    let anchor1 = t.root / (n1 + 1) as f64 * (t.anchor_core + t.middle_coef * inv_sq(n0 + 1, n1).sqrt());
    let sf = s as f64;
    match regime(s, sc) {
        NuRegime::Initial => 2.0 / sf.sqrt() * t.root,
        NuRegime::FirstAnchor => anchor0,
        NuRegime::Middle => {
            (n0 + 1) as f64 / sf * anchor0 + t.root / sf * t.middle_coef * inv_sq(n0 + 1, s - 1).sqrt()
        }
        NuRegime::SecondAnchor => anchor1,
        NuRegime::Tail => {
            (n1 + 1) as f64 / sf * anchor1 + t.root / sf * t.tail_coef * inv(n1 + 1, s - 1).sqrt()
        }
    }
}

fn leading_terms(s: u64, sc: &ScheduleConstants, pc: &ProblemConstants) -> f64 {
    let (de, ke) = pc.effective_dims();
    let sf = s as f64;
    let ln_d = pc.ln_d();
    (8.0 / 3.0 + 2.0 * pc.sigma) * sc.g / sf * ln_d
        + (6.9 + 1.2 * pc.sigma) / sf.sqrt() * ((de as f64 - 1.0) / (ke as f64 - 1.0) * ln_d).sqrt()
}

/// `gamma_hat_s = scale * (lead_1 + lead_2 + nu_s)`.
pub fn gamma_hat(s: u64, nu_s: f64, sc: &ScheduleConstants, pc: &ProblemConstants) -> f64 {
    assert!(s >= 1, "gamma_hat is defined for s >= 1");
    sc.scale * (leading_terms(s, sc, pc) + nu_s)
}

/// The threshold that needs the hidden vector: `history[tau - 1]` holds
/// `||Delta_{tau-1}(S)||_1` for `tau = 1..=s`. Never scaled.
pub fn theoretical_gamma(
    s: u64,
    history: &[f64],
    sc: &ScheduleConstants,
    pc: &ProblemConstants,
) -> f64 {
    assert!(s >= 1, "gamma is defined for s >= 1");
    assert!(history.len() as u64 >= s, "need s entries of error history");
    let sum_sq: f64 = history[..s as usize].iter().map(|e| e * e).sum();
    leading_terms(s, sc, pc) + (3.0 * sc.g * sum_sq * pc.ln_d()).sqrt() / s as f64
}

/// Step parameters of the exploitation learner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OnsParams {
    pub y_delta: f64,
    pub rho: f64,
    pub epsilon: f64,
}

/// `Y_delta = 1 + sigma sqrt(2 ln(1/delta))`, `rho = 1 / (2 (1 + Y_delta)^2)`,
/// `epsilon = k`.
pub fn ons_params(sigma: f64, delta: f64, k: usize) -> Result<OnsParams> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param("delta", "must lie in (0, 1)"));
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::param("sigma", "must be finite and >= 0"));
    }
    let y_delta = 1.0 + sigma * (2.0 * (1.0 / delta).ln()).sqrt();
    Ok(OnsParams {
        y_delta,
        rho: 1.0 / (2.0 * (1.0 + y_delta).powi(2)),
        epsilon: k as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn worked() -> ProblemConstants {
        // d = 5, k = 3 sits outside 3 <= k <= d - 3 but every formula is defined
        ProblemConstants::oslr(5, 3, 1.0, 0.1, 1.0).unwrap()
    }

    #[test]
    fn g_examples() {
        assert_eq!(g_factor(5, 3).unwrap(), 6.0);
        assert_eq!(g_factor(7, 4).unwrap(), 5.0);
        assert_eq!(g_factor(9, 9).unwrap(), 1.0);
        assert!(g_factor(9, 2).is_err());
    }

    #[test]
    fn worked_example_constants() {
        let sc = derive_constants(&worked()).unwrap();
        assert!((sc.mu1 - 1.625_752_384_583_185).abs() < 1e-12);
        assert!((sc.a1 - 32.0 * 50f64.ln()).abs() < 1e-12);
        assert!((sc.a1 - 125.18).abs() < 0.01);
        let s0 = 576.0 * 9.0 * 6.0 * 250f64.ln();
        assert!((sc.s0 - s0).abs() < 1e-6);
        assert!((sc.s0 - 171_742.0).abs() < 5.0);
        assert!(sc.s0 <= sc.s1);
        assert!(sc.mu2 > 1.0);
        for (_, v) in sc.labeled() {
            assert!(v.is_finite() && v > 0.0);
        }
    }

    #[test]
    fn first_nu_and_gamma() {
        let pc = worked();
        let sc = derive_constants(&pc).unwrap();
        let mut st = NuState::new();
        let nu1 = nu(1, &mut st, &sc, &pc);
        assert!((nu1 - 2.0 * (18.0 * 50f64.ln()).sqrt()).abs() < 1e-12);
        assert!((nu1 - 16.783).abs() < 1e-3);
        let g1 = gamma_hat(1, nu1, &sc, &pc);
        let expect = 14.0 / 3.0 * 6.0 * 50f64.ln() + 8.1 * (2.0 * 50f64.ln()).sqrt() + nu1;
        assert!((g1 - expect).abs() < 1e-10);
        assert!((g1 - 148.98).abs() < 0.01);

        let practical = practical_scale(&sc, 0.02).unwrap();
        assert!((gamma_hat(1, nu1, &practical, &pc) - 0.02 * g1).abs() < 1e-12);
        assert_eq!(practical.s0, sc.s0);
        assert_eq!(practical.s1, sc.s1);
        assert_eq!(practical_scale(&sc, 1.0).unwrap(), sc);
        assert!(practical_scale(&sc, 0.0).is_err());
        assert!(practical_scale(&sc, 1.5).is_err());
    }

    #[test]
    fn noiseless_coefficients() {
        let pc = ProblemConstants::oslr(5, 3, 0.0, 0.1, 1.0).unwrap();
        let sc = derive_constants(&pc).unwrap();
        let l = 50f64.ln();
        let lead = gamma_hat(1, 0.0, &sc, &pc);
        assert!((lead - (8.0 / 3.0 * 6.0 * l + 6.9 * (2.0 * l).sqrt())).abs() < 1e-10);
    }

    #[test]
    fn initial_regime_scales_with_root_s() {
        let pc = worked();
        let sc = derive_constants(&pc).unwrap();
        let mut st = NuState::new();
        let c = 2.0 * (3.0 * sc.g * 50f64.ln()).sqrt();
        for s in 1..=500u64 {
            let v = nu(s, &mut st, &sc, &pc);
            assert!((v * (s as f64).sqrt() - c).abs() < 1e-10);
        }
    }

    #[test]
    fn worst_case_history_matches_initial_nu() {
        let pc = worked();
        let sc = derive_constants(&pc).unwrap();
        for s in [1u64, 7, 64] {
            let hist = vec![2.0; s as usize];
            let gamma = theoretical_gamma(s, &hist, &sc, &pc);
            let nu_s = nu_closed_form(s, &sc, &pc);
            assert!((gamma - gamma_hat(s, nu_s, &sc, &pc)).abs() < 1e-9);
            let zero = theoretical_gamma(s, &vec![0.0; s as usize], &sc, &pc);
            assert!((zero - gamma_hat(s, 0.0, &sc, &pc)).abs() < 1e-12);
        }
    }

    fn small_boundaries(pc: &ProblemConstants, s0: f64, s1: f64) -> ScheduleConstants {
        ScheduleConstants {
            s0,
            s1,
            ..derive_constants(pc).unwrap()
        }
    }

    #[test]
    fn incremental_matches_closed_form_across_regimes() {
        let pc = ProblemConstants::oslr(20, 4, 0.5, 0.05, 0.8).unwrap();
        for (s0, s1) in [(10.4, 37.9), (5.0, 5.5), (0.3, 12.0), (3.0, 4.0)] {
            let sc = small_boundaries(&pc, s0, s1);
            let mut st = NuState::new();
            for s in 1..=80u64 {
                let a = nu(s, &mut st, &sc, &pc);
                let b = nu_closed_form(s, &sc, &pc);
                assert!(
                    (a - b).abs() <= 1e-10 * b.abs().max(1.0),
                    "s={s} s0={s0} s1={s1}: {a} vs {b}"
                );
                assert!(a > 0.0);
            }
        }
    }

    #[test]
    fn regime_boundaries_use_floor() {
        let pc = worked();
        let sc = small_boundaries(&pc, 10.7, 20.2);
        assert_eq!(regime(10, &sc), NuRegime::Initial);
        assert_eq!(regime(11, &sc), NuRegime::FirstAnchor);
        assert_eq!(regime(12, &sc), NuRegime::Middle);
        assert_eq!(regime(20, &sc), NuRegime::Middle);
        assert_eq!(regime(21, &sc), NuRegime::SecondAnchor);
        assert_eq!(regime(22, &sc), NuRegime::Tail);
    }

    #[test]
    fn s_nu_does_not_drop_at_first_anchor() {
        let pc = worked();
        let sc = derive_constants(&pc).unwrap();
        let n0 = sc.first_boundary();
        let before = n0 as f64 * nu_closed_form(n0, &sc, &pc);
        let after = (n0 + 1) as f64 * nu_closed_form(n0 + 1, &sc, &pc);
        assert!(after >= before);
    }

    #[test]
    fn poslr_substitutes_complement_dims() {
        let pc = ProblemConstants::poslr(20, 4, 4, 0.1, 0.1, 1.0).unwrap();
        let sc = derive_constants(&pc).unwrap();
        assert_eq!(sc.g, g_factor(16, 4).unwrap());
        let l = 200f64.ln();
        let expect = (8.0 / 3.0 + 0.2) * sc.g / 9.0 * l + (6.9 + 0.12) / 3.0 * (15.0 / 3.0 * l).sqrt();
        assert!((gamma_hat(9, 0.0, &sc, &pc) - expect).abs() < 1e-10);
        let l2 = 4000f64.ln();
        let s0 = 576.0 * 16.0 * sc.g * l2;
        assert!((sc.s0 - s0).abs() < 1e-6 * s0);
    }

    #[test]
    fn poslr_a5_matches_base_form_on_complement() {
        // the relaxed display factors 36/(9-2sqrt3) where the base one has 9/(9-2sqrt3)
        let p = ProblemConstants::poslr(30, 5, 6, 0.7, 0.2, 0.6).unwrap();
        let sp = derive_constants(&p).unwrap();
        let (ds2, k, sigma) = (0.36f64, 5.0, 0.7);
        let ln_d2 = (900.0f64 / 0.2).ln();
        let sqrt3 = 3f64.sqrt();
        let base = 9.0 / (9.0 - 2.0 * sqrt3)
            * (ds2 * (8.0 + 4.0 * sigma) / (9.0 * k)
                + 32.0 / sqrt3
                + 4.0 * sqrt3 * ds2 / (9.0 * k * (sp.g * ln_d2).sqrt()));
        let tail = sp.a2 + 2.0 * sqrt3 * sp.a2 / (9.0 - 2.0 * sqrt3) * (4.0 / (23.0 * ln_d2)).sqrt();
        assert!((base + tail - sp.a5).abs() < 1e-10 * sp.a5);
    }

    #[test]
    fn ons_parameter_examples() {
        let p = ons_params(0.0, 0.3, 4).unwrap();
        assert_eq!(p.y_delta, 1.0);
        assert_eq!(p.rho, 0.125);
        assert_eq!(p.epsilon, 4.0);
        let p = ons_params(1.0, 0.1, 3).unwrap();
        assert!((p.y_delta - 3.1460).abs() < 1e-4);
        assert!((p.rho - 0.029089).abs() < 1e-6);
        assert!(ons_params(2.0, 0.1, 3).unwrap().rho < p.rho);
        assert!(ons_params(1.0, 0.01, 3).unwrap().rho < p.rho);
        assert!(ons_params(1.0, 1.0, 3).is_err());
    }

    #[test]
    fn constants_validation() {
        assert!(ProblemConstants::oslr(10, 2, 0.1, 0.1, 1.0).is_err());
        assert!(ProblemConstants::oslr(10, 3, 0.1, 1.0, 1.0).is_err());
        assert!(ProblemConstants::oslr(10, 3, 0.1, 0.1, 0.0).is_err());
        assert!(ProblemConstants::oslr(10, 3, -1.0, 0.1, 1.0).is_err());
        assert!(ProblemConstants::poslr(10, 4, 2, 0.1, 0.1, 1.0).is_err());
        let edge = ProblemConstants::oslr(5, 3, 0.1, 0.1, 1.0).unwrap();
        assert!(!edge.in_analyzed_range());
        assert!(ProblemConstants::oslr(10, 3, 0.1, 0.1, 1.0).unwrap().in_analyzed_range());
    }
}

//! Trial drivers: DS-OSLRC, DS-POSLRC, the uniform-sampling baseline, and the
//! full-information skyline.
//!
//! A learner never sees an instance directly. Each round the driver wraps
//! `x_t` in a [`Probe`] that counts distinct coordinate reads before and after
//! the label is revealed; the counts are checked against the protocol budget
//! and any excess is reported in [`TrialResult::budget_violations`].

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dantzig::{solve_dantzig, DantzigProblem};
use crate::error::{Error, Result};
use crate::estimation::{poslr_law, Observation, SelectorAccumulators};
use crate::ons::{init_epoch, OnsEpochState};
use crate::sampling::{sample_feature_set, InclusionLaw, SamplingWeights};
use crate::schedule::{
    derive_constants, gamma_hat, nu, ons_params, practical_scale, theoretical_gamma, NuState,
    OnsParams, ProblemConstants, ScheduleConstants, Variant,
};
use crate::simplex::SimplexOptions;
use crate::synth::{l1_errors, GroundTruth, SyntheticStream};

/// One labeled round as produced by an environment.
#[derive(Debug, Clone, PartialEq)]
pub struct Round {
    pub x: Vec<f64>,
    pub y: f64,
    /// `<w*, x>` when the environment knows the hidden vector.
    pub clean: Option<f64>,
}

pub trait Environment {
    fn dim(&self) -> usize;
    fn next_round(&mut self) -> Option<Round>;
    fn truth(&self) -> Option<&GroundTruth> {
        None
    }
}

impl Environment for SyntheticStream {
    fn dim(&self) -> usize {
        SyntheticStream::truth(self).dim()
    }

    fn next_round(&mut self) -> Option<Round> {
        let r = SyntheticStream::next_round(self);
        Some(Round {
            x: r.x,
            y: r.y,
            clean: Some(r.clean),
        })
    }

    fn truth(&self) -> Option<&GroundTruth> {
        Some(SyntheticStream::truth(self))
    }
}

/// A fixed, finite sequence of rounds.
#[derive(Debug, Clone)]
pub struct ReplayEnvironment {
    d: usize,
    rounds: std::vec::IntoIter<Round>,
    truth: Option<GroundTruth>,
}

impl ReplayEnvironment {
    pub fn new(d: usize, rounds: Vec<Round>, truth: Option<GroundTruth>) -> Result<Self> {
        for r in &rounds {
            if r.x.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: r.x.len(),
                });
            }
        }
        Ok(ReplayEnvironment {
            d,
            rounds: rounds.into_iter(),
            truth,
        })
    }
}

impl Environment for ReplayEnvironment {
    fn dim(&self) -> usize {
        self.d
    }

    fn next_round(&mut self) -> Option<Round> {
        self.rounds.next()
    }

    fn truth(&self) -> Option<&GroundTruth> {
        self.truth.as_ref()
    }
}

/// Read-counting view of one instance.
#[derive(Debug)]
pub struct Probe<'a> {
    x: &'a [f64],
    seen: Vec<bool>,
    pre: usize,
    post: usize,
    label_revealed: bool,
}

impl<'a> Probe<'a> {
    pub fn new(x: &'a [f64]) -> Self {
        Probe {
            x,
            seen: vec![false; x.len()],
            pre: 0,
            post: 0,
            label_revealed: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn read(&mut self, i: usize) -> f64 {
        if !self.seen[i] {
            self.seen[i] = true;
            if self.label_revealed {
                self.post += 1;
            } else {
                self.pre += 1;
            }
        }
        self.x[i]
    }

    pub fn read_many(&mut self, idx: &[usize]) -> Vec<f64> {
        idx.iter().map(|&i| self.read(i)).collect()
    }

    pub fn reveal_label(&mut self) {
        self.label_revealed = true;
    }

    /// Distinct coordinates read before the label.
    pub fn pre_label_reads(&self) -> usize {
        self.pre
    }

    /// Distinct coordinates first read after the label.
    pub fn post_label_reads(&self) -> usize {
        self.post
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    DsOslrc,
    DsPoslrc,
    UniformBaseline,
    FullInfoOracle,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::DsOslrc,
        Algorithm::DsPoslrc,
        Algorithm::UniformBaseline,
        Algorithm::FullInfoOracle,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::DsOslrc => "ds-oslrc",
            Algorithm::DsPoslrc => "ds-poslrc",
            Algorithm::UniformBaseline => "uniform-baseline",
            Algorithm::FullInfoOracle => "full-info-oracle",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.name() == name)
    }
}

/// How `gamma_hat_s` is obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    /// Exact schedule.
    Theory,
    /// Exact schedule multiplied by `c` in `(0, 1]`.
    Practical { c: f64 },
    /// Constant threshold, for controlled experiments.
    Fixed { gamma: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmConfig {
    pub problem: ProblemConstants,
    pub horizon: u64,
    pub mode: Mode,
    pub seed: u64,
    pub simplex: SimplexOptions,
    /// Keep a [`RoundLog`] for every round.
    pub record_rounds: bool,
    /// Track `||A A^-1 - I||_max` at every exploitation step.
    pub audit_inverse: bool,
}

impl AlgorithmConfig {
    pub fn new(problem: ProblemConstants, horizon: u64, mode: Mode, seed: u64) -> Self {
        AlgorithmConfig {
            problem,
            horizon,
            mode,
            seed,
            simplex: SimplexOptions::default(),
            record_rounds: false,
            audit_inverse: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.problem.validate()?;
        if self.horizon < 4 {
            return Err(Error::param("horizon", "need T >= 4"));
        }
        match self.mode {
            Mode::Theory if !self.problem.in_analyzed_range() => Err(Error::param(
                "mode",
                "theory mode needs 3 <= k <= d - 3 (on the complement for the relaxed protocol)",
            )),
            Mode::Practical { c } if !(c > 0.0 && c <= 1.0) => {
                Err(Error::param("c", format!("must lie in (0, 1], got {c}")))
            }
            Mode::Fixed { gamma } if !(gamma >= 0.0 && gamma.is_finite()) => {
                Err(Error::param("gamma", "must be finite and >= 0"))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Explore,
    Exploit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundLog {
    pub t: u64,
    pub phase: Phase,
    /// Every coordinate read in the round, in increasing order.
    pub observed: Vec<usize>,
    pub prediction: f64,
    pub label: f64,
    pub loss: f64,
    pub support: Vec<usize>,
    /// `||Delta_s(S)||_1` right after an update, when the truth is known.
    pub delta_on_support: Option<f64>,
}

/// State after one selector update.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplorationRecord {
    pub s: u64,
    pub t: u64,
    pub gamma_hat: f64,
    /// Ground-truth threshold `gamma_s` (unscaled).
    pub gamma_true: Option<f64>,
    pub w_hat_l1: f64,
    pub delta_on_support: Option<f64>,
    pub delta_off_support: Option<f64>,
    pub delta_total: Option<f64>,
    pub support: Vec<usize>,
    pub support_correct: Option<bool>,
    /// The selector LP failed and the previous estimate was kept.
    pub lp_fallback: bool,
    pub lp_iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub horizon: u64,
    /// Cumulative regret against `w*`; empty without ground truth.
    pub regret: Vec<f64>,
    pub explorations: Vec<ExplorationRecord>,
    pub rounds: Vec<RoundLog>,
    pub final_w_hat: DVector<f64>,
    pub lp_fallbacks: usize,
    pub budget_violations: usize,
    pub max_pre_label_reads: usize,
    pub max_post_label_reads: usize,
    /// Largest `|<w_bar_t, x_t(S_s)>|` over exploitation rounds.
    pub max_exploit_prediction: f64,
    /// Largest `||A A^-1 - I||_max` seen; zero unless audited.
    pub max_inverse_defect: f64,
}

impl TrialResult {
    pub fn error_series(&self) -> Vec<f64> {
        self.explorations
            .iter()
            .filter_map(|e| e.delta_on_support)
            .collect()
    }

    pub fn total_error_series(&self) -> Vec<f64> {
        self.explorations.iter().filter_map(|e| e.delta_total).collect()
    }

    pub fn support_series(&self) -> Vec<bool> {
        self.explorations
            .iter()
            .filter_map(|e| e.support_correct)
            .collect()
    }
}

/// Top-`k` coordinates by magnitude, ties to the lower index, returned in
/// increasing order.
pub fn select_support(w_hat: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..w_hat.len()).collect();
    idx.sort_by(|&a, &b| {
        w_hat[b]
            .abs()
            .partial_cmp(&w_hat[a].abs())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    idx.truncate(k.min(w_hat.len()));
    idx.sort_unstable();
    idx
}

/// `Reg_t = sum_{tau <= t} (yhat - y)^2 - (<w*, x> - y)^2`.
pub fn compute_regret(predictions: &[f64], labels: &[f64], comparator: &[f64]) -> Result<Vec<f64>> {
    if predictions.len() != labels.len() || comparator.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: labels.len(),
            got: predictions.len().min(comparator.len()),
        });
    }
    let mut acc = 0.0;
    Ok(predictions
        .iter()
        .zip(labels)
        .zip(comparator)
        .map(|((p, y), c)| {
            acc += (p - y).powi(2) - (c - y).powi(2);
            acc
        })
        .collect())
}

/// `Some(s)` when `t = s^2`.
pub fn exploration_index(t: u64) -> Option<u64> {
    let s = (t as f64).sqrt().round() as u64;
    [s.saturating_sub(1), s, s + 1]
        .into_iter()
        .find(|&c| c >= 1 && c * c == t)
}

/// Threshold bookkeeping shared by every learner.
#[derive(Debug, Clone)]
struct Threshold {
    mode: Mode,
    pc: ProblemConstants,
    sc: Option<ScheduleConstants>,
    exact: Option<ScheduleConstants>,
    nu: NuState,
}

impl Threshold {
    fn new(mode: Mode, pc: ProblemConstants) -> Result<Self> {
        let exact = match mode {
            Mode::Fixed { .. } => derive_constants(&pc).ok(),
            _ => Some(derive_constants(&pc)?),
        };
        let sc = match (mode, exact) {
            (Mode::Theory, Some(e)) => Some(e),
            (Mode::Practical { c }, Some(e)) => Some(practical_scale(&e, c)?),
            _ => None,
        };
        Ok(Threshold {
            mode,
            pc,
            sc,
            exact,
            nu: NuState::new(),
        })
    }

    fn gamma_hat(&mut self, s: u64) -> f64 {
        match (self.mode, self.sc) {
            (Mode::Fixed { gamma }, _) => gamma,
            (_, Some(sc)) => {
                let v = nu(s, &mut self.nu, &sc, &self.pc);
                gamma_hat(s, v, &sc, &self.pc)
            }
            _ => unreachable!("schedule constants exist outside fixed mode"),
        }
    }

    fn gamma_true(&self, s: u64, history: &[f64]) -> Option<f64> {
        self.exact
            .as_ref()
            .map(|sc| theoretical_gamma(s, history, sc, &self.pc))
    }
}

/// Dantzig-selector state common to all learners.
#[derive(Debug, Clone)]
struct Selector {
    acc: SelectorAccumulators,
    threshold: Threshold,
    opts: SimplexOptions,
    w_hat: DVector<f64>,
    support: Vec<usize>,
    k: usize,
    s: u64,
    /// `||Delta_tau(S)||_1` for `tau = 0..s`.
    history: Vec<f64>,
    truth: Option<GroundTruth>,
    fallbacks: usize,
}

impl Selector {
    fn new(d: usize, k: usize, threshold: Threshold, opts: SimplexOptions, truth: Option<GroundTruth>) -> Self {
        let w_hat = DVector::from_element(d, 1.0 / d as f64);
        let history = truth
            .as_ref()
            .map(|gt| vec![l1_errors(&w_hat, gt).on_support])
            .unwrap_or_default();
        Selector {
            acc: SelectorAccumulators::new(d),
            threshold,
            opts,
            w_hat,
            support: (0..k).collect(),
            k,
            s: 0,
            history,
            truth,
            fallbacks: 0,
        }
    }

    /// Re-solves the selector after the accumulators absorbed round `s`.
    fn update(&mut self, t: u64) -> Result<ExplorationRecord> {
        self.s += 1;
        let s = self.s;
        let g_hat = self.threshold.gamma_hat(s);
        let gamma_true = if self.truth.is_some() {
            self.threshold.gamma_true(s, &self.history)
        } else {
            None
        };
        let problem = DantzigProblem::from_accumulators(&self.acc, g_hat)?;
        let (fallback, iterations) = match solve_dantzig(&problem, &self.opts) {
            Ok(sol) => {
                self.w_hat = sol.w;
                (false, sol.iterations)
            }
            Err(Error::Infeasible | Error::Unbounded | Error::IterationLimit(_)) => {
                self.fallbacks += 1;
                (true, 0)
            }
            Err(e) => return Err(e),
        };
        self.support = select_support(self.w_hat.as_slice(), self.k);
        let errs = self.truth.as_ref().map(|gt| l1_errors(&self.w_hat, gt));
        if let Some(e) = errs {
            self.history.push(e.on_support);
        }
        Ok(ExplorationRecord {
            s,
            t,
            gamma_hat: g_hat,
            gamma_true,
            w_hat_l1: self.w_hat.lp_norm(1),
            delta_on_support: errs.map(|e| e.on_support),
            delta_off_support: errs.map(|e| e.off_support),
            delta_total: errs.map(|e| e.total),
            support_correct: self.truth.as_ref().map(|gt| gt.support == self.support),
            support: self.support.clone(),
            lp_fallback: fallback,
            lp_iterations: iterations,
        })
    }
}

/// Sampling rule of the learner.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Weighted,
    Uniform,
    Full,
    Relaxed { k0: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Stage {
    Query,
    Predict,
    Label,
    Complete,
}

/// Step-wise learner. Each round runs [`query`](Learner::query) (indices to
/// read before predicting), [`predict`](Learner::predict) with those values,
/// [`observe_label`](Learner::observe_label) (indices to read after the
/// label, empty for the base protocol), and [`complete`](Learner::complete)
/// with the follow-up values.
#[derive(Debug, Clone)]
pub struct Learner {
    algorithm: Algorithm,
    kind: Kind,
    sel: Selector,
    ons: Option<OnsEpochState>,
    params: OnsParams,
    rng: ChaCha8Rng,
    t: u64,
    stage: Stage,
    phase: Phase,
    query: Vec<usize>,
    values: Vec<f64>,
    followup: Vec<usize>,
    law_q: Option<SamplingWeights>,
    y_hat: f64,
    y: f64,
    audit_inverse: bool,
    max_defect: f64,
}

fn protocol(msg: &str) -> Error {
    Error::param("protocol", msg)
}

impl Learner {
    pub fn new(algorithm: Algorithm, cfg: &AlgorithmConfig) -> Result<Self> {
        Self::with_truth(algorithm, cfg, None)
    }

    /// As [`Learner::new`], additionally scoring every update against `truth`.
    pub fn with_truth(algorithm: Algorithm, cfg: &AlgorithmConfig, truth: Option<GroundTruth>) -> Result<Self> {
        cfg.validate()?;
        let pc = cfg.problem;
        if let Some(gt) = &truth {
            if gt.dim() != pc.d {
                return Err(Error::DimensionMismatch {
                    expected: pc.d,
                    got: gt.dim(),
                });
            }
        }
        let kind = match (algorithm, pc.variant) {
            (Algorithm::DsPoslrc, Variant::Poslr { k0 }) => Kind::Relaxed { k0 },
            (Algorithm::DsPoslrc, Variant::Oslr) => {
                return Err(Error::param("variant", "ds-poslrc needs the relaxed protocol (k0)"))
            }
            (_, Variant::Poslr { .. }) => {
                return Err(Error::param(
                    "variant",
                    format!("{} runs the base protocol", algorithm.name()),
                ))
            }
            (Algorithm::DsOslrc, _) => Kind::Weighted,
            (Algorithm::UniformBaseline, _) => Kind::Uniform,
            (Algorithm::FullInfoOracle, _) => Kind::Full,
        };
        let threshold = Threshold::new(cfg.mode, pc)?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(2);
        Ok(Learner {
            algorithm,
            kind,
            sel: Selector::new(pc.d, pc.k, threshold, cfg.simplex, truth),
            ons: None,
            params: ons_params(pc.sigma, pc.delta, pc.k)?,
            rng,
            t: 0,
            stage: Stage::Query,
            phase: Phase::Explore,
            query: Vec::new(),
            values: Vec::new(),
            followup: Vec::new(),
            law_q: None,
            y_hat: 0.0,
            y: 0.0,
            audit_inverse: cfg.audit_inverse,
            max_defect: 0.0,
        })
    }

    pub fn algorithm(&self) -> Algorithm {
        self.algorithm
    }

    pub fn dim(&self) -> usize {
        self.sel.acc.dim()
    }

    /// Index of the current (or last finished) round; 0 before the first.
    pub fn round(&self) -> u64 {
        self.t
    }

    /// Phase of the current round.
    pub fn phase(&self) -> Phase {
        self.phase
    }

    /// Current selector estimate `w_hat_s`.
    pub fn weights(&self) -> &DVector<f64> {
        &self.sel.w_hat
    }

    /// Current estimated support, in increasing order.
    pub fn support(&self) -> &[usize] {
        &self.sel.support
    }

    pub fn explorations(&self) -> u64 {
        self.sel.s
    }

    pub fn lp_fallbacks(&self) -> usize {
        self.sel.fallbacks
    }

    pub fn ons_state(&self) -> Option<&OnsEpochState> {
        self.ons.as_ref()
    }

    pub fn max_inverse_defect(&self) -> f64 {
        self.max_defect
    }

    /// Starts the next round and returns the coordinates to read before the
    /// prediction.
    pub fn query(&mut self) -> Result<&[usize]> {
        if self.stage != Stage::Query {
            return Err(protocol("query called before the previous round completed"));
        }
        self.t += 1;
        let d = self.dim();
        let k = self.sel.k;
        self.followup.clear();
        self.law_q = None;
        match self.kind {
            Kind::Relaxed { .. } => {
                self.phase = Phase::Explore;
                self.query = self.sel.support.clone();
            }
            _ if exploration_index(self.t).is_some() => {
                self.phase = Phase::Explore;
                let (q, budget) = match self.kind {
                    Kind::Weighted => (SamplingWeights::from_weights(self.sel.w_hat.as_slice()), k),
                    Kind::Full => (SamplingWeights::uniform(d), d),
                    _ => (SamplingWeights::uniform(d), k),
                };
                self.query = if budget == d {
                    (0..d).collect()
                } else {
                    sample_feature_set(&q, budget, &mut self.rng)?.indices().to_vec()
                };
                self.law_q = Some(q);
            }
            _ => {
                self.phase = Phase::Exploit;
                self.query = self
                    .ons
                    .as_ref()
                    .expect("the first round explores and opens an epoch")
                    .support()
                    .to_vec();
            }
        }
        self.stage = Stage::Predict;
        Ok(&self.query)
    }

    /// Prediction from the values at the queried coordinates.
    pub fn predict(&mut self, values: &[f64]) -> Result<f64> {
        if self.stage != Stage::Predict {
            return Err(protocol("predict called out of order"));
        }
        if values.len() != self.query.len() {
            return Err(Error::DimensionMismatch {
                expected: self.query.len(),
                got: values.len(),
            });
        }
        self.values = values.to_vec();
        self.y_hat = match self.phase {
            Phase::Explore => self
                .query
                .iter()
                .zip(values)
                .map(|(&i, v)| self.sel.w_hat[i] * v)
                .sum(),
            Phase::Exploit => self.ons.as_mut().expect("epoch is open").predict(values),
        };
        self.stage = Stage::Label;
        Ok(self.y_hat)
    }

    /// Records the label and returns the coordinates to read afterwards.
    pub fn observe_label(&mut self, y: f64) -> Result<&[usize]> {
        if self.stage != Stage::Label {
            return Err(protocol("observe_label called out of order"));
        }
        if !y.is_finite() {
            return Err(Error::param("y", "label must be finite"));
        }
        self.y = y;
        if let Kind::Relaxed { k0 } = self.kind {
            let d = self.dim();
            let mut in_support = vec![false; d];
            for &i in &self.query {
                in_support[i] = true;
            }
            let complement: Vec<usize> = (0..d).filter(|&i| !in_support[i]).collect();
            let weights: Vec<f64> = complement.iter().map(|&i| self.sel.w_hat[i]).collect();
            let q = SamplingWeights::from_weights(&weights);
            let local = sample_feature_set(&q, k0, &mut self.rng)?;
            self.followup = local.indices().iter().map(|&l| complement[l]).collect();
            self.law_q = Some(q);
        }
        self.stage = Stage::Complete;
        Ok(&self.followup)
    }

    /// Finishes the round with the follow-up values; returns the update
    /// record when the selector was re-solved.
    pub fn complete(&mut self, values: &[f64]) -> Result<Option<ExplorationRecord>> {
        if self.stage != Stage::Complete {
            return Err(protocol("complete called out of order"));
        }
        if values.len() != self.followup.len() {
            return Err(Error::DimensionMismatch {
                expected: self.followup.len(),
                got: values.len(),
            });
        }
        self.stage = Stage::Query;
        let (y, y_hat) = (self.y, self.y_hat);
        if self.phase == Phase::Exploit {
            let ons = self.ons.as_mut().expect("epoch is open");
            ons.update(&self.values, y_hat, y);
            if self.audit_inverse {
                self.max_defect = self.max_defect.max(ons.inverse_defect());
            }
            return Ok(None);
        }
        let q = self.law_q.take().unwrap_or_else(|| SamplingWeights::uniform(self.dim()));
        let mut idx = std::mem::take(&mut self.query);
        let mut val = std::mem::take(&mut self.values);
        match self.kind {
            Kind::Relaxed { k0 } => {
                let law = poslr_law(&idx, q, k0, self.dim())?;
                idx.extend_from_slice(&self.followup);
                val.extend_from_slice(values);
                self.sel.acc.accumulate_observation(&Observation::new(idx, val)?, &law, y)?;
            }
            _ => {
                let budget = q.dim().min(if self.kind == Kind::Full { q.dim() } else { self.sel.k });
                let law = InclusionLaw::new(q, budget)?;
                self.sel.acc.accumulate_observation(&Observation::new(idx, val)?, &law, y)?;
            }
        }
        let rec = self.sel.update(self.t)?;
        if !matches!(self.kind, Kind::Relaxed { .. }) {
            let w = self.sel.w_hat.as_slice().to_vec();
            self.ons = Some(init_epoch(&w, &self.sel.support, self.ons.take(), &self.params)?);
        }
        Ok(Some(rec))
    }
}

/// Runs `algorithm` for `cfg.horizon` rounds (fewer if `env` runs dry).
pub fn run_trial<E: Environment + ?Sized>(
    algorithm: Algorithm,
    env: &mut E,
    cfg: &AlgorithmConfig,
) -> Result<TrialResult> {
    let d = cfg.problem.d;
    if env.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: env.dim(),
        });
    }
    let mut learner = Learner::with_truth(algorithm, cfg, env.truth().cloned())?;
    let (pre_budget, post_budget) = match cfg.problem.variant {
        Variant::Oslr => (cfg.problem.k, 0),
        Variant::Poslr { k0 } => (cfg.problem.k, k0),
    };

    let mut regret = Vec::new();
    let mut cum = 0.0;
    let mut explorations = Vec::new();
    let mut rounds = Vec::new();
    let mut violations = 0;
    let mut max_pre = 0;
    let mut max_post = 0;
    let mut max_exploit = 0.0f64;

    for _ in 0..cfg.horizon {
        let Some(round) = env.next_round() else { break };
        let mut probe = Probe::new(&round.x);
        let y = round.y;
        let pre = probe.read_many(learner.query()?);
        let y_hat = learner.predict(&pre)?;
        let phase = learner.phase();
        if phase == Phase::Exploit {
            max_exploit = max_exploit.max(y_hat.abs());
        }
        probe.reveal_label();
        let post = probe.read_many(learner.observe_label(y)?);
        let rec = learner.complete(&post)?;

        let exempt = algorithm == Algorithm::FullInfoOracle && phase == Phase::Explore;
        max_pre = max_pre.max(probe.pre_label_reads());
        max_post = max_post.max(probe.post_label_reads());
        if !exempt && (probe.pre_label_reads() > pre_budget || probe.post_label_reads() > post_budget) {
            violations += 1;
        }

        if let Some(c) = round.clean {
            cum += (y_hat - y).powi(2) - (c - y).powi(2);
            regret.push(cum);
        }
        if cfg.record_rounds {
            rounds.push(RoundLog {
                t: learner.round(),
                phase,
                observed: (0..d).filter(|&i| probe.seen[i]).collect(),
                prediction: y_hat,
                label: y,
                loss: (y_hat - y).powi(2),
                support: learner.support().to_vec(),
                delta_on_support: rec.as_ref().and_then(|r| r.delta_on_support),
            });
        }
        if let Some(r) = rec {
            explorations.push(r);
        }
    }

    Ok(TrialResult {
        algorithm,
        seed: cfg.seed,
        horizon: cfg.horizon,
        regret,
        explorations,
        rounds,
        final_w_hat: learner.sel.w_hat.clone(),
        lp_fallbacks: learner.sel.fallbacks,
        budget_violations: violations,
        max_pre_label_reads: max_pre,
        max_post_label_reads: max_post,
        max_exploit_prediction: max_exploit,
        max_inverse_defect: learner.max_defect,
    })
}

pub fn run_ds_oslrc<E: Environment + ?Sized>(env: &mut E, cfg: &AlgorithmConfig) -> Result<TrialResult> {
    run_trial(Algorithm::DsOslrc, env, cfg)
}

pub fn run_ds_poslrc<E: Environment + ?Sized>(env: &mut E, cfg: &AlgorithmConfig) -> Result<TrialResult> {
    run_trial(Algorithm::DsPoslrc, env, cfg)
}

pub fn run_uniform_baseline<E: Environment + ?Sized>(env: &mut E, cfg: &AlgorithmConfig) -> Result<TrialResult> {
    run_trial(Algorithm::UniformBaseline, env, cfg)
}

pub fn run_full_info_oracle<E: Environment + ?Sized>(env: &mut E, cfg: &AlgorithmConfig) -> Result<TrialResult> {
    run_trial(Algorithm::FullInfoOracle, env, cfg)
}

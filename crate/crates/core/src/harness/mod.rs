//! Experiment harness behind the command-line tool.

pub mod config;
pub mod plot;
pub mod table;

use std::fmt::Write as _;
use std::path::PathBuf;

use rayon::prelude::*;

use crate::error::Error;
use crate::orchestration::{run_trial, Algorithm, AlgorithmConfig, Mode, TrialResult};
use crate::sampling::{oracle, InclusionLaw, InclusionProbabilities, SamplingWeights};
use crate::schedule::{derive_constants, ons_params, ProblemConstants};
use crate::synth::{estimate_compatibility, gen_ground_truth, SyntheticStream};

pub use config::{DeltaS, ExperimentConfig, ModeSpec, OUTPUT_DIR_ENV};
pub use plot::{emit_plots, fit_loglog_slope, PlotReport};
pub use table::{ResultTable, Row, CSV_HEADER};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config key `{key}`: {message}")]
    Config { key: String, message: String },
    #[error("trial with seed {seed} ({algorithm}) failed: {source}")]
    Trial {
        seed: u64,
        algorithm: String,
        #[source]
        source: Error,
    },
    #[error("{0}")]
    Table(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl HarnessError {
    /// `1` for configuration problems, `2` for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config { .. } => 1,
            _ => 2,
        }
    }
}

/// Safety factor applied to the heuristic compatibility estimate.
pub const DELTA_S_SAFETY: f64 = 0.9;

/// One unit of work: an algorithm, a threshold scale, and a trial index.
#[derive(Debug, Clone, PartialEq)]
struct Job {
    algorithm: Algorithm,
    c: Option<f64>,
    label: String,
    trial: usize,
}

fn jobs(cfg: &ExperimentConfig) -> Vec<Job> {
    let scales: Vec<Option<f64>> = match cfg.mode {
        ModeSpec::Practical => cfg.c.iter().copied().map(Some).collect(),
        _ => vec![None],
    };
    let mut out = Vec::new();
    for &alg in &cfg.algorithms {
        for &c in &scales {
            let label = match c {
                Some(c) if scales.len() > 1 => format!("{}@c={c}", alg.name()),
                _ => alg.name().to_string(),
            };
            for trial in 0..cfg.trials {
                out.push(Job {
                    algorithm: alg,
                    c,
                    label: label.clone(),
                    trial,
                });
            }
        }
    }
    out
}

fn problem_constants(cfg: &ExperimentConfig, algorithm: Algorithm, delta_s: f64) -> Result<ProblemConstants, Error> {
    match algorithm {
        Algorithm::DsPoslrc => ProblemConstants::poslr(
            cfg.d,
            cfg.k,
            cfg.k0.unwrap_or(0),
            cfg.sigma,
            cfg.delta,
            delta_s,
        ),
        _ => ProblemConstants::oslr(cfg.d, cfg.k, cfg.sigma, cfg.delta, delta_s),
    }
}

/// `delta_s` for one trial's stream.
pub fn resolve_delta_s(cfg: &ExperimentConfig, stream: &SyntheticStream, seed: u64) -> Result<f64, Error> {
    match cfg.delta_s {
        DeltaS::Value(v) => Ok(v),
        DeltaS::Auto => {
            let mut prefix = stream.clone();
            let (x, _) = prefix.take_matrix(cfg.compat_prefix.max(1));
            let est = estimate_compatibility(&x, &stream.truth().support, 1.0, seed)?;
            Ok((DELTA_S_SAFETY * est.value.max(0.0).sqrt()).max(1e-6))
        }
    }
}

/// Runs one trial of `algorithm` as configured, with `seed + trial` driving
/// the hidden vector, the stream, and the learner.
pub fn run_configured_trial(
    cfg: &ExperimentConfig,
    algorithm: Algorithm,
    c: Option<f64>,
    trial: usize,
) -> Result<TrialResult, Error> {
    let seed = cfg.seed.wrapping_add(trial as u64);
    let truth = gen_ground_truth(cfg.d, cfg.k, cfg.h_min, cfg.sigma, seed)?;
    let mut stream = SyntheticStream::new(truth, cfg.design, seed);
    let delta_s = resolve_delta_s(cfg, &stream, seed)?;
    let pc = problem_constants(cfg, algorithm, delta_s)?;
    let mode = match (cfg.mode, c) {
        (ModeSpec::Theory, _) => Mode::Theory,
        (ModeSpec::Fixed { gamma }, _) => Mode::Fixed { gamma },
        (ModeSpec::Practical, Some(c)) => Mode::Practical { c },
        (ModeSpec::Practical, None) => Mode::Practical { c: cfg.c[0] },
    };
    let acfg = AlgorithmConfig::new(pc, cfg.horizon, mode, seed);
    run_trial(algorithm, &mut stream, &acfg)
}

/// Round indices kept for the regret series: every `t <= 10`, then
/// `per_decade` log-spaced points per decade, and always `T`.
pub fn regret_grid(horizon: u64, per_decade: usize) -> Vec<u64> {
    let mut out: Vec<u64> = (1..=horizon.min(10)).collect();
    let mut n = 1u64;
    loop {
        let t = 10f64.powf(1.0 + n as f64 / per_decade as f64).round() as u64;
        if t >= horizon {
            break;
        }
        if out.last() != Some(&t) {
            out.push(t);
        }
        n += 1;
    }
    if out.last() != Some(&horizon) {
        out.push(horizon);
    }
    out
}

/// Long-format rows for one trial.
pub fn trial_rows(result: &TrialResult, label: &str, trial: usize, per_decade: usize) -> Vec<Row> {
    let mut rows = Vec::new();
    let mut push = |index: u64, metric: &str, value: f64| {
        rows.push(Row {
            trial,
            algorithm: label.to_string(),
            index,
            metric: metric.to_string(),
            value,
        })
    };
    for e in &result.explorations {
        push(e.s, "gamma_hat", e.gamma_hat);
        push(e.s, "w_hat_l1", e.w_hat_l1);
        if let Some(v) = e.delta_on_support {
            push(e.s, plot::ERROR_METRIC, v);
        }
        if let Some(v) = e.delta_total {
            push(e.s, "l1_error_total", v);
        }
        if let Some(v) = e.support_correct {
            push(e.s, "support_correct", if v { 1.0 } else { 0.0 });
        }
    }
    let t_max = result.regret.len() as u64;
    if t_max > 0 {
        for t in regret_grid(t_max, per_decade) {
            push(t, plot::REGRET_METRIC, result.regret[t as usize - 1]);
        }
    }
    push(0, "lp_fallbacks", result.lp_fallbacks as f64);
    push(0, "budget_violations", result.budget_violations as f64);
    rows
}

/// Rejects parameter combinations no trial could run with, before any work
/// starts.
fn validate(cfg: &ExperimentConfig) -> Result<(), HarnessError> {
    let as_config = |e: Error| {
        let key = match &e {
            Error::InvalidParameter { name, .. } => name.to_string(),
            Error::InvalidBudget { .. } => "k".to_string(),
            _ => "config".to_string(),
        };
        HarnessError::Config {
            key,
            message: e.to_string(),
        }
    };
    gen_ground_truth(cfg.d, cfg.k, cfg.h_min, cfg.sigma, cfg.seed).map_err(as_config)?;
    let delta_s = match cfg.delta_s {
        DeltaS::Value(v) => v,
        DeltaS::Auto => 1.0,
    };
    for &alg in &cfg.algorithms {
        let pc = problem_constants(cfg, alg, delta_s).map_err(as_config)?;
        let mode = match cfg.mode {
            ModeSpec::Theory => Mode::Theory,
            ModeSpec::Fixed { gamma } => Mode::Fixed { gamma },
            ModeSpec::Practical => Mode::Practical { c: cfg.c[0] },
        };
        AlgorithmConfig::new(pc, cfg.horizon, mode, cfg.seed)
            .validate()
            .map_err(as_config)?;
    }
    Ok(())
}

/// Runs every configured trial (on `cfg.jobs` threads) and merges the rows
/// by trial index; the result does not depend on the thread count.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ResultTable, HarnessError> {
    if cfg.uses_relaxed_protocol() && cfg.k0.is_none() {
        return Err(HarnessError::Config {
            key: "k0".into(),
            message: "required by ds-poslrc".into(),
        });
    }
    validate(cfg)?;
    let work = jobs(cfg);
    let run_one = |job: &Job| -> Result<Vec<Row>, HarnessError> {
        let result = run_configured_trial(cfg, job.algorithm, job.c, job.trial).map_err(|source| HarnessError::Trial {
            seed: cfg.seed.wrapping_add(job.trial as u64),
            algorithm: job.label.clone(),
            source,
        })?;
        Ok(trial_rows(&result, &job.label, job.trial, cfg.regret_points))
    };
    let chunks: Vec<Result<Vec<Row>, HarnessError>> = if cfg.jobs <= 1 {
        work.iter().map(run_one).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build()
            .map_err(|e| HarnessError::Table(format!("thread pool: {e}")))?;
        pool.install(|| work.par_iter().map(run_one).collect())
    };
    let mut rows = Vec::new();
    for c in chunks {
        rows.extend(c?);
    }
    ResultTable::from_rows(rows)
}

/// Runs the experiment and writes `results.csv` plus the plots into
/// `cfg.output`.
pub fn run_and_write(cfg: &ExperimentConfig) -> Result<(ResultTable, PathBuf, PlotReport), HarnessError> {
    let table = run_experiment(cfg)?;
    std::fs::create_dir_all(&cfg.output)?;
    let csv = cfg.output.join("results.csv");
    let file = std::fs::File::create(&csv)?;
    table.write_csv(std::io::BufWriter::new(file))?;
    let report = emit_plots(&table, &cfg.output, cfg.slope_window)?;
    Ok((table, csv, report))
}

/// `name = value` lines for every schedule constant and the ONS parameters.
pub fn print_constants(cfg: &ExperimentConfig, relaxed: bool) -> Result<String, HarnessError> {
    let config_err = |e: Error| HarnessError::Config {
        key: "constants".into(),
        message: e.to_string(),
    };
    let delta_s = match cfg.delta_s {
        DeltaS::Value(v) => v,
        DeltaS::Auto => {
            let truth = gen_ground_truth(cfg.d, cfg.k, cfg.h_min, cfg.sigma, cfg.seed).map_err(config_err)?;
            let stream = SyntheticStream::new(truth, cfg.design, cfg.seed);
            resolve_delta_s(cfg, &stream, cfg.seed).map_err(config_err)?
        }
    };
    let pc = if relaxed {
        let k0 = cfg.k0.ok_or_else(|| HarnessError::Config {
            key: "k0".into(),
            message: "required for the relaxed-protocol constants".into(),
        })?;
        ProblemConstants::poslr(cfg.d, cfg.k, k0, cfg.sigma, cfg.delta, delta_s)
    } else {
        ProblemConstants::oslr(cfg.d, cfg.k, cfg.sigma, cfg.delta, delta_s)
    }
    .map_err(config_err)?;
    let sc = derive_constants(&pc).map_err(config_err)?;
    let ons = ons_params(cfg.sigma, cfg.delta, cfg.k).map_err(config_err)?;
    let (de, ke) = pc.effective_dims();
    let mut out = String::new();
    let mut line = |name: &str, v: f64| {
        let _ = writeln!(out, "{name} = {}", table::format_value(v));
    };
    line("d", cfg.d as f64);
    line("k", cfg.k as f64);
    line("d_eff", de as f64);
    line("k_eff", ke as f64);
    line("delta_s", delta_s);
    for (name, v) in sc.labeled() {
        if name != "scale" {
            line(name, v);
        }
    }
    line("y_delta", ons.y_delta);
    line("rho", ons.rho);
    line("epsilon", ons.epsilon);
    Ok(out)
}

/// Closed-form inclusion probabilities next to the enumerated ones, with
/// 1-based indices.
pub fn probe_sampling(weights: &[f64], k: usize) -> Result<String, Error> {
    let q = SamplingWeights::from_weights(weights);
    let d = q.dim();
    let law = InclusionLaw::new(q.clone(), k)?;
    let tables = if d <= oracle::MAX_DIM {
        Some(oracle::enumerate_distribution(&q, k)?)
    } else {
        None
    };
    let mut out = String::new();
    let _ = writeln!(out, "# d = {d}, k = {k}");
    let _ = writeln!(out, "# q = {}", q.as_slice().iter().map(|v| format!("{v:.6}")).collect::<Vec<_>>().join(" "));
    let _ = writeln!(out, "kind,indices,closed_form,enumerated,abs_diff");
    let mut emit = |kind: &str, idx: &[usize], closed: f64, exact: Option<f64>| {
        let label = idx.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(" ");
        match exact {
            Some(e) => {
                let _ = writeln!(out, "{kind},{label},{closed:.15},{e:.15},{:.3e}", (closed - e).abs());
            }
            None => {
                let _ = writeln!(out, "{kind},{label},{closed:.15},,");
            }
        }
    };
    for i in 0..d {
        emit("single", &[i], law.single(i), tables.as_ref().map(|t| t.single(i)));
    }
    if k >= 2 {
        for i in 0..d {
            for j in i + 1..d {
                emit("pair", &[i, j], law.pair(i, j), tables.as_ref().map(|t| t.pair(i, j)));
            }
        }
    }
    if k >= 3 {
        for i in 0..d {
            for j in i + 1..d {
                for r in j + 1..d {
                    emit("triple", &[i, j, r], law.triple(i, j, r), tables.as_ref().map(|t| t.triple(i, j, r)));
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regret_grid_shape() {
        let g = regret_grid(1000, 10);
        assert_eq!(&g[..10], &(1..=10).collect::<Vec<_>>()[..]);
        assert_eq!(*g.last().unwrap(), 1000);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(regret_grid(4, 10), vec![1, 2, 3, 4]);
    }

    #[test]
    fn sweep_labels() {
        let cfg = ExperimentConfig::parse("d=8\nk=3\nhorizon=16\ntrials=2\nc=0.01,0.05,0.2\n").unwrap();
        let labels: Vec<String> = jobs(&cfg).into_iter().map(|j| j.label).collect();
        assert_eq!(labels.len(), 6);
        assert_eq!(labels[0], "ds-oslrc@c=0.01");
        assert_eq!(labels[5], "ds-oslrc@c=0.2");
    }

    #[test]
    fn constants_text() {
        let cfg = ExperimentConfig::parse("d=5\nk=3\nsigma=1\ndelta=0.1\ndelta_s=1\nhorizon=16\n").unwrap();
        let text = print_constants(&cfg, false).unwrap();
        let mut map = std::collections::HashMap::new();
        for l in text.lines() {
            let (k, v) = l.split_once(" = ").unwrap();
            map.insert(k.to_string(), v.parse::<f64>().unwrap());
        }
        assert_eq!(map["g"], 6.0);
        assert!((map["mu1"] - 9.0 / (9.0 - 2.0 * 3f64.sqrt())).abs() < 1e-15);
        assert!(print_constants(&cfg, true).is_err());
    }
}

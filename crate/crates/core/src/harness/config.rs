//! Line-oriented `key = value` experiment configuration.
//!
//! Blank lines and text after `#` are ignored. Keys:
//!
//! | key | value | default |
//! |-----|-------|---------|
//! | `algorithms` | comma list of `ds-oslrc`, `ds-poslrc`, `uniform-baseline`, `full-info-oracle` | `ds-oslrc` |
//! | `d`, `k` | dimensions | required |
//! | `k0` | post-label budget | required with `ds-poslrc` |
//! | `sigma` | noise level | `0.1` |
//! | `delta` | confidence | `0.1` |
//! | `delta_s` | compatibility constant or `auto` | `auto` |
//! | `compat_prefix` | rounds used by `delta_s = auto` | `2000` |
//! | `horizon` | rounds per trial | required |
//! | `mode` | `theory`, `practical`, or `fixed` | `practical` |
//! | `c` | comma list of practical scales | `0.02` |
//! | `gamma` | threshold for `mode = fixed` | |
//! | `design` | `rademacher`, `uniform-box`, `correlated-gaussian` | `rademacher` |
//! | `design_rho` | correlation of the Gaussian design | `0.3` |
//! | `h_min` | smallest support magnitude | `0.2` |
//! | `trials` | trials per algorithm | `1` |
//! | `seed` | base seed; trial `i` uses `seed + i` | `0` |
//! | `output` | output directory | `$DSOSLRC_OUTPUT_DIR` or `dsoslrc-out` |
//! | `jobs` | worker threads | `1` |
//! | `slope_window` | `lo, hi` range of `s` for the plotted slope | whole series |
//! | `regret_points` | regret samples per decade of `t` in the CSV | `100` |

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::orchestration::Algorithm;
use crate::synth::DesignSpec;

use super::HarnessError;

const KEYS: [&str; 21] = [
    "algorithms", "d", "k", "k0", "sigma", "delta", "delta_s", "compat_prefix", "horizon", "mode", "c",
    "gamma", "design", "design_rho", "h_min", "trials", "seed", "output", "jobs", "slope_window",
    "regret_points",
];

/// Environment variable consulted when the config has no `output` key.
pub const OUTPUT_DIR_ENV: &str = "DSOSLRC_OUTPUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModeSpec {
    Theory,
    Practical,
    Fixed { gamma: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeltaS {
    Value(f64),
    /// `0.9` times the heuristic compatibility estimate on a stream prefix.
    Auto,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub algorithms: Vec<Algorithm>,
    pub d: usize,
    pub k: usize,
    pub k0: Option<usize>,
    pub sigma: f64,
    pub delta: f64,
    pub delta_s: DeltaS,
    pub compat_prefix: usize,
    pub horizon: u64,
    pub mode: ModeSpec,
    pub c: Vec<f64>,
    pub design: DesignSpec,
    pub h_min: f64,
    pub trials: usize,
    pub seed: u64,
    pub output: PathBuf,
    pub jobs: usize,
    pub slope_window: Option<(f64, f64)>,
    pub regret_points: usize,
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Config {
            key: "<file>".into(),
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let mut map = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(cfg_err(
                    &format!("line {}", n + 1),
                    "expected `key = value`",
                ));
            };
            let key = key.trim().to_string();
            if !KEYS.contains(&key.as_str()) {
                return Err(cfg_err(&key, "unknown key"));
            }
            if map.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(cfg_err(&key, "duplicate key"));
            }
        }
        Reader { map }.build()
    }

    pub fn uses_relaxed_protocol(&self) -> bool {
        self.algorithms.contains(&Algorithm::DsPoslrc)
    }
}

fn cfg_err(key: &str, message: impl Into<String>) -> HarnessError {
    HarnessError::Config {
        key: key.to_string(),
        message: message.into(),
    }
}

struct Reader {
    map: BTreeMap<String, String>,
}

impl Reader {
    fn take(&mut self, key: &str) -> Option<String> {
        self.map.remove(key)
    }

    fn num<T: std::str::FromStr>(&mut self, key: &str, default: Option<T>) -> Result<T, HarnessError> {
        match self.take(key) {
            Some(v) => v
                .parse()
                .map_err(|_| cfg_err(key, format!("cannot parse `{v}`"))),
            None => default.ok_or_else(|| cfg_err(key, "missing required key")),
        }
    }

    fn build(&mut self) -> Result<ExperimentConfig, HarnessError> {
        let algorithms = match self.take("algorithms") {
            Some(v) => v
                .split(',')
                .map(|s| {
                    let s = s.trim();
                    Algorithm::from_name(s)
                        .ok_or_else(|| cfg_err("algorithms", format!("unknown algorithm `{s}`")))
                })
                .collect::<Result<Vec<_>, _>>()?,
            None => vec![Algorithm::DsOslrc],
        };
        if algorithms.is_empty() {
            return Err(cfg_err("algorithms", "empty list"));
        }
        let d: usize = self.num("d", None)?;
        let k: usize = self.num("k", None)?;
        let k0 = match self.take("k0") {
            Some(v) => Some(v.parse().map_err(|_| cfg_err("k0", format!("cannot parse `{v}`")))?),
            None => None,
        };
        if algorithms.contains(&Algorithm::DsPoslrc) && k0.is_none() {
            return Err(cfg_err("k0", "required by ds-poslrc"));
        }
        let sigma = self.num("sigma", Some(0.1))?;
        let delta = self.num("delta", Some(0.1))?;
        let delta_s = match self.take("delta_s").as_deref() {
            None | Some("auto") => DeltaS::Auto,
            Some(v) => DeltaS::Value(
                v.parse()
                    .map_err(|_| cfg_err("delta_s", format!("cannot parse `{v}`")))?,
            ),
        };
        let compat_prefix = self.num("compat_prefix", Some(2000))?;
        let horizon: u64 = self.num("horizon", None)?;
        if horizon < 4 {
            return Err(cfg_err("horizon", "must be >= 4"));
        }
        let gamma = self.take("gamma");
        let mode = match self.take("mode").as_deref().unwrap_or("practical") {
            "theory" => ModeSpec::Theory,
            "practical" => ModeSpec::Practical,
            "fixed" => {
                let g = gamma.ok_or_else(|| cfg_err("gamma", "required by mode = fixed"))?;
                ModeSpec::Fixed {
                    gamma: g
                        .parse()
                        .map_err(|_| cfg_err("gamma", format!("cannot parse `{g}`")))?,
                }
            }
            other => return Err(cfg_err("mode", format!("unknown mode `{other}`"))),
        };
        let c = match self.take("c") {
            Some(v) => v
                .split(',')
                .map(|s| {
                    let s = s.trim();
                    s.parse::<f64>()
                        .ok()
                        .filter(|c| *c > 0.0 && *c <= 1.0)
                        .ok_or_else(|| cfg_err("c", format!("`{s}` is not in (0, 1]")))
                })
                .collect::<Result<Vec<_>, _>>()?,
            None => vec![0.02],
        };
        let rho = self.num("design_rho", Some(0.3))?;
        let design = match self.take("design").as_deref().unwrap_or("rademacher") {
            "rademacher" => DesignSpec::Rademacher,
            "uniform-box" => DesignSpec::UniformBox,
            "correlated-gaussian" => {
                if !(0.0..1.0).contains(&rho) {
                    return Err(cfg_err("design_rho", "must lie in [0, 1)"));
                }
                DesignSpec::CorrelatedGaussian { rho }
            }
            other => return Err(cfg_err("design", format!("unknown design `{other}`"))),
        };
        let h_min = self.num("h_min", Some(0.2))?;
        let trials: usize = self.num("trials", Some(1))?;
        if trials == 0 {
            return Err(cfg_err("trials", "must be >= 1"));
        }
        let seed = self.num("seed", Some(0))?;
        let output = match self.take("output") {
            Some(v) => PathBuf::from(v),
            None => std::env::var_os(OUTPUT_DIR_ENV)
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from("dsoslrc-out")),
        };
        let jobs: usize = self.num("jobs", Some(1))?;
        if jobs == 0 {
            return Err(cfg_err("jobs", "must be >= 1"));
        }
        let slope_window = match self.take("slope_window") {
            Some(v) => {
                let parts: Vec<f64> = v
                    .split(',')
                    .map(|s| s.trim().parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| cfg_err("slope_window", format!("cannot parse `{v}`")))?;
                match parts[..] {
                    [lo, hi] if lo > 0.0 && lo < hi => Some((lo, hi)),
                    _ => return Err(cfg_err("slope_window", "expected `lo, hi` with 0 < lo < hi")),
                }
            }
            None => None,
        };
        let regret_points = self.num("regret_points", Some(100))?;
        if regret_points == 0 {
            return Err(cfg_err("regret_points", "must be >= 1"));
        }
        Ok(ExperimentConfig {
            algorithms,
            d,
            k,
            k0,
            sigma,
            delta,
            delta_s,
            compat_prefix,
            horizon,
            mode,
            c,
            design,
            h_min,
            trials,
            seed,
            output,
            jobs,
            slope_window,
            regret_points,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config() {
        let cfg = ExperimentConfig::parse("d = 20\nk = 4 # budget\nhorizon = 100\noutput = out\n").unwrap();
        assert_eq!(cfg.algorithms, vec![Algorithm::DsOslrc]);
        assert_eq!(cfg.c, vec![0.02]);
        assert_eq!(cfg.delta_s, DeltaS::Auto);
        assert_eq!(cfg.output, PathBuf::from("out"));
    }

    #[test]
    fn errors_name_the_key() {
        let cases = [
            ("d = 5\nk = 3\n", "horizon"),
            ("d = 5\nk = 3\nhorizon = 10\nbogus = 1\n", "bogus"),
            ("d = x\nk = 3\nhorizon = 10\n", "d"),
            ("d = 5\nk = 3\nhorizon = 10\nc = 0.1, 2\n", "c"),
            ("d = 5\nk = 3\nhorizon = 10\nalgorithms = ds-poslrc\n", "k0"),
            ("d = 5\nk = 3\nk = 4\nhorizon = 10\n", "k"),
        ];
        for (text, key) in cases {
            match ExperimentConfig::parse(text) {
                Err(HarnessError::Config { key: got, .. }) => assert_eq!(got, key, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn sweep_and_modes() {
        let cfg = ExperimentConfig::parse(
            "d=8\nk=3\nk0=3\nhorizon=16\nalgorithms=ds-oslrc, ds-poslrc\nc=0.01,0.05,0.2\nmode=practical\ndelta_s=0.8\nslope_window=10,100\n",
        )
        .unwrap();
        assert_eq!(cfg.c, vec![0.01, 0.05, 0.2]);
        assert_eq!(cfg.delta_s, DeltaS::Value(0.8));
        assert!(cfg.uses_relaxed_protocol());
        assert_eq!(cfg.slope_window, Some((10.0, 100.0)));
        let fixed = ExperimentConfig::parse("d=8\nk=3\nhorizon=16\nmode=fixed\ngamma=0.1\n").unwrap();
        assert_eq!(fixed.mode, ModeSpec::Fixed { gamma: 0.1 });
    }
}

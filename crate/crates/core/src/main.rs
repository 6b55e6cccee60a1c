use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dsoslrc::harness::{self, ExperimentConfig, HarnessError, ResultTable};

#[derive(Parser)]
#[command(name = "dsoslrc", version, about = "Online sparse linear regression with limited attribute observation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the trials described by a config file and write CSV and SVG output.
    Run {
        config: PathBuf,
        /// Worker threads; overrides the config's `jobs`.
        #[arg(long)]
        jobs: Option<usize>,
        /// Output directory; overrides the config's `output`.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Print the threshold-schedule constants for a config.
    Constants {
        config: PathBuf,
        /// Use the relaxed protocol (requires `k0`).
        #[arg(long)]
        poslr: bool,
    },
    /// Redraw the plots from a results CSV.
    Plot {
        csv: PathBuf,
        outdir: PathBuf,
        /// Range of exploration rounds for the slope fit, as `lo,hi`.
        #[arg(long, value_parser = parse_window)]
        window: Option<(f64, f64)>,
    },
    /// Print closed-form and enumerated inclusion probabilities (1-based indices).
    ProbeSampling {
        d: usize,
        k: usize,
        /// Sampling weights; uniform when omitted.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        q: Option<Vec<f64>>,
    },
}

fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected lo,hi")?;
    let lo: f64 = a.trim().parse().map_err(|_| "bad lower bound")?;
    let hi: f64 = b.trim().parse().map_err(|_| "bad upper bound")?;
    if lo > 0.0 && lo < hi {
        Ok((lo, hi))
    } else {
        Err("need 0 < lo < hi".into())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cmd: Command) -> Result<(), HarnessError> {
    match cmd {
        Command::Run { config, jobs, output } => {
            let mut cfg = ExperimentConfig::from_file(&config)?;
            if let Some(j) = jobs {
                if j == 0 {
                    return Err(HarnessError::Config {
                        key: "jobs".into(),
                        message: "must be >= 1".into(),
                    });
                }
                cfg.jobs = j;
            }
            if let Some(o) = output {
                cfg.output = o;
            }
            let (table, csv, report) = harness::run_and_write(&cfg)?;
            println!("wrote {} rows to {}", table.rows().len(), csv.display());
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            for (alg, slope) in &report.slopes {
                println!("{alg}: error slope {slope:.4}");
            }
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            Ok(())
        }
        Command::Constants { config, poslr } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            print!("{}", harness::print_constants(&cfg, poslr)?);
            Ok(())
        }
        Command::Plot { csv, outdir, window } => {
            let file = std::fs::File::open(&csv)?;
            let table = ResultTable::read_csv(std::io::BufReader::new(file))?;
            let report = harness::emit_plots(&table, &outdir, window)?;
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            Ok(())
        }
        Command::ProbeSampling { d, k, q } => {
            let weights = q.unwrap_or_else(|| vec![1.0; d]);
            if weights.len() != d {
                return Err(HarnessError::Config {
                    key: "q".into(),
                    message: format!("expected {d} weights, got {}", weights.len()),
                });
            }
            if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
                return Err(HarnessError::Config {
                    key: "q".into(),
                    message: "weights must be finite and >= 0".into(),
                });
            }
            let text = harness::probe_sampling(&weights, k).map_err(|e| HarnessError::Config {
                key: "k".into(),
                message: e.to_string(),
            })?;
            print!("{text}");
            Ok(())
        }
    }
}

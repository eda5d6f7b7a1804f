#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use qthermo::channel::BathSpec;
use qthermo::metrology::m1_m2;
use qthermo::opalg::Operator;
use qthermo::scan::{run_difference_scan, run_n_scaling, run_time_scan, with_threads, ScalingConfig, ScanConfig};
use qthermo::{selftest, Error};

#[derive(Parser)]
#[command(name = "qthermo", version, about = "Qubit thermometry under thermalizing noise: QFI scans and reports")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads, 0 for one per core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Replace the configured inverse temperature(s) with this value.
    #[arg(long)]
    beta: Option<f64>,
    /// Replace the configured coupling rate.
    #[arg(long)]
    gamma: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Time scan: one CSV row per (beta, swept parameters, t).
    Scan {
        #[command(flatten)]
        common: Common,
        /// Replace the number of qubits.
        #[arg(long)]
        n: Option<usize>,
        /// Evaluate at this single time instead of the configured grid.
        #[arg(long)]
        t: Option<f64>,
    },
    /// Difference scan selected by the [diff] section of the config.
    Diff {
        #[command(flatten)]
        common: Common,
        /// Replace the number of qubits.
        #[arg(long)]
        n: Option<usize>,
        /// Evaluate at this single time instead of the configured grid.
        #[arg(long)]
        t: Option<f64>,
    },
    /// N-scaling fits at the QFI peak time of the largest ensemble (JSON).
    Scaling {
        #[command(flatten)]
        common: Common,
        /// Replace the largest number of qubits.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Channel QFI upper bound at one (beta, gamma, t) (JSON).
    Bound {
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long)]
        t: f64,
        /// Number of qubits.
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the built-in invariant checks.
    Selftest {
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
}

enum Failure {
    Run(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

fn read_config(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::Run(Error::Config(format!("cannot read {}: {e}", path.display()))))
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn scan_config(common: &Common, n: Option<usize>, t: Option<f64>) -> Result<ScanConfig, Failure> {
    let mut cfg = ScanConfig::from_toml(&read_config(&common.config)?)?;
    if let Some(beta) = common.beta {
        cfg.bath.beta = vec![beta];
    }
    if let Some(gamma) = common.gamma {
        cfg.bath.gamma = gamma;
    }
    if let Some(n) = n {
        cfg.state = cfg.state.with_param("n_qubits", n as f64)?;
    }
    if let Some(t) = t {
        cfg.time.values = Some(vec![t]);
    }
    cfg.cells()?;
    cfg.times()?;
    Ok(cfg)
}

fn matrix_json(m: &Operator) -> serde_json::Value {
    let rows: Vec<Vec<[f64; 2]>> =
        (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect();
    json!(rows)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Scan { common, n, t } => {
            let cfg = scan_config(&common, n, t)?;
            let table = with_threads(common.threads, || run_time_scan(&cfg))??;
            emit(&common.out, &table.to_csv_string())
        }
        Command::Diff { common, n, t } => {
            let cfg = scan_config(&common, n, t)?;
            let table = with_threads(common.threads, || run_difference_scan(&cfg))??;
            emit(&common.out, &table.to_csv_string())
        }
        Command::Scaling { common, n } => {
            let mut cfg = ScalingConfig::from_toml(&read_config(&common.config)?)?;
            if let Some(beta) = common.beta {
                cfg.bath.beta = beta;
            }
            if let Some(gamma) = common.gamma {
                cfg.bath.gamma = gamma;
            }
            if let Some(n) = n {
                cfg.n_max = n;
            }
            cfg.validate()?;
            let report = with_threads(common.threads, || run_n_scaling(&cfg))??;
            emit(&common.out, &report.to_json())
        }
        Command::Bound { beta, gamma, t, n, out } => {
            let bath = BathSpec::new(beta, gamma).map_err(|e| Error::Config(e.to_string()))?;
            if n == 0 {
                return Err(Error::Config("--n must be at least 1".into()).into());
            }
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::Config(format!("--t {t} must be positive and finite")).into());
            }
            let r = m1_m2(&bath, t)?;
            let doc = json!({
                "beta": beta,
                "gamma": gamma,
                "t": t,
                "n": n,
                "m1_norm": r.m1_norm,
                "m2_norm": r.m2_norm,
                "bound_value": r.bound_value(n),
                "m1": matrix_json(&r.m1),
                "m2": matrix_json(&r.m2),
            });
            emit(&out, &(serde_json::to_string_pretty(&doc).expect("JSON") + "\n"))
        }
        Command::Selftest { threads } => {
            let checks = with_threads(threads, selftest::run)?;
            let mut failed = 0;
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
                failed += usize::from(!c.passed);
            }
            if failed > 0 {
                return Err(Error::Numeric(format!("{failed} of {} checks failed", checks.len())).into());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Run(e)) => {
            eprintln!("qthermo: {e}");
            ExitCode::from(match e {
                Error::Config(_) => 2,
                _ => 3,
            })
        }
        Err(Failure::Io(msg)) => {
            eprintln!("qthermo: {msg}");
            ExitCode::from(1)
        }
    }
}

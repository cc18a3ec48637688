//! Command-line front end.

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::commands::{self, Outcome};
use crate::config::{self, Settings};
use crate::{RayonExecutor, RunError};

#[derive(Debug, Parser)]
#[command(name = "edgescale", version, about = "Edge statistics of 1D random Schrödinger operators")]
pub struct Cli {
    /// JSON config file (an earlier run's summary.json also works).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Root of the output tree.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Largest eigenvalues of H_n, rescaled by n².
    Spectrum(SpectrumArgs),
    /// Low eigenvalues of the continuum operator by discretization and/or Riccati counting.
    Continuum(ContinuumArgs),
    /// Eigenvalue Laplace sums against Feynman–Kac trace estimates.
    Trace(TraceArgs),
    /// Theta series against free Brownian bridge survival.
    Theta(ThetaArgs),
    /// Shifted-mean matrix edge against the stochastic Airy operator.
    Tw(TwArgs),
    /// Tail probabilities of the ground state and their decay exponent.
    Tails(TailsArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum(_) => "spectrum",
            Command::Continuum(_) => "continuum",
            Command::Trace(_) => "trace",
            Command::Theta(_) => "theta",
            Command::Tw(_) => "tw",
            Command::Tails(_) => "tails",
        }
    }
}

macro_rules! flag_struct {
    ($name:ident { $($(#[$meta:meta])* $field:ident : $ty:ty),* $(,)? }) => {
        #[derive(Debug, Clone, Default, Args, Serialize)]
        pub struct $name {
            $(
                $(#[$meta])*
                #[arg(long)]
                #[serde(skip_serializing_if = "Option::is_none")]
                pub $field: Option<$ty>,
            )*
        }
    };
}

flag_struct!(SpectrumArgs {
    n: usize,
    sigma: f64,
    alpha: f64,
    /// gaussian | rademacher | uniform_sym | shifted_bernoulli
    family: String,
    replicas: usize,
    k: usize,
});

flag_struct!(ContinuumArgs {
    sigma: f64,
    k: usize,
    /// discretize | riccati | both
    method: String,
    replicas: usize,
    grid: usize,
    tol: f64,
    agreement_tol: f64,
    agreement_fraction: f64,
});

flag_struct!(TraceArgs {
    n: usize,
    sigma: f64,
    t: f64,
    family: String,
    realizations: usize,
    x_grid: usize,
    replicas: usize,
    steps: usize,
    control_variate: bool,
    crossing_correction: bool,
    trend_n: usize,
    max_z: f64,
});

#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct ThetaArgs {
    /// Comma-separated times.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_values: Option<Vec<f64>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicas: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub crossing_correction: Option<bool>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_z: Option<f64>,
}

flag_struct!(TwArgs {
    beta: f64,
    n: usize,
    m: usize,
    replicas: usize,
    sao_length: f64,
    sao_m: usize,
    ks_max: f64,
    airy_tol: f64,
});

#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct TailsArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    /// right | left
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub side: Option<String>,
    /// Comma-separated levels.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a_grid: Option<Vec<f64>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicas: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exponent: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coefficient_min: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coefficient_max: Option<f64>,
}

/// A finished run: where it was written and whether every gate passed.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub dir: PathBuf,
    pub passed: bool,
    pub summary: Value,
}

fn overrides<A: Serialize>(cli: &Cli, args: &A) -> Map<String, Value> {
    let mut map = match serde_json::to_value(args) {
        Ok(Value::Object(m)) => m,
        _ => Map::new(),
    };
    if let Some(seed) = cli.seed {
        map.insert("seed".into(), seed.into());
    }
    if let Some(workers) = cli.workers {
        map.insert("workers".into(), workers.into());
    }
    if let Some(out) = &cli.out {
        map.insert("out".into(), out.to_string_lossy().into_owned().into());
    }
    map
}

fn execute<T, A, F>(cli: &Cli, args: &A, run: F) -> Result<RunReport, RunError>
where
    T: DeserializeOwned + Serialize,
    A: Serialize,
    F: FnOnce(&T, u64, &RayonExecutor) -> Result<Outcome, RunError>,
{
    let command = cli.command.name();
    let file = match &cli.config {
        Some(path) => config::load_file(path, command)?,
        None => Map::new(),
    };
    let (cfg, Settings { seed, workers, out }): (T, Settings) =
        config::resolve(file, overrides(cli, args))?;
    let exec = RayonExecutor::new(workers)?;
    let outcome = run(&cfg, seed, &exec)?;
    let passed = outcome.passed();
    let summary = json!({
        "command": command,
        "seed": seed,
        "config": config::embed(&cfg, seed),
        "results": outcome.results,
        "gates": outcome.gates,
        "passed": passed,
    });
    let dir = crate::io::write_artifacts(&out, command, seed, &outcome.samples, &summary)?;
    Ok(RunReport { dir, passed, summary })
}

/// Runs a parsed command line.
pub fn run(cli: &Cli) -> Result<RunReport, RunError> {
    match &cli.command {
        Command::Spectrum(a) => execute(cli, a, commands::spectrum),
        Command::Continuum(a) => execute(cli, a, commands::continuum),
        Command::Trace(a) => execute(cli, a, commands::trace),
        Command::Theta(a) => execute(cli, a, commands::theta),
        Command::Tw(a) => execute(cli, a, commands::tw),
        Command::Tails(a) => execute(cli, a, commands::tails),
    }
}

/// Parses `args`, runs the command and maps the result to an exit code:
/// 0 ok, 1 config error, 2 gate failure, 3 runtime error.
pub fn main_with<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(report) => {
            println!("{}", report.dir.display());
            for gate in report.summary["gates"].as_array().into_iter().flatten() {
                let status = if gate["passed"].as_bool() == Some(true) { "pass" } else { "FAIL" };
                eprintln!("{status} {} ({})", gate["name"].as_str().unwrap_or(""), gate["rule"].as_str().unwrap_or(""));
            }
            if report.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("edgescale: {e}");
            e.exit_code()
        }
    }
}

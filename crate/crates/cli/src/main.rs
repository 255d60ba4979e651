//! `qims`: command-line driver for the quantum isomonodromic Hamiltonians,
//! their Pfaffian systems and integral solutions.
//!
//! Exit codes: 0 success, 1 a check failed, 2 configuration error,
//! 3 numerical failure. Errors are reported as JSON on stdout.

mod commands;
mod config;
mod error;
mod plot;
mod report;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use commands::{CheckKind, Output};
use config::{Overrides, RunConfig};
use error::CliError;
use report::Sink;

#[derive(Parser, Debug)]
#[command(name = "qims", version, about = "Quantum isomonodromic Hamiltonians and their integral solutions")]
struct Cli {
    #[command(flatten)]
    common: Common,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// JSON configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long = "L", global = true)]
    l: Option<usize>,
    #[arg(long = "N", global = true)]
    n: Option<usize>,
    /// Total degree of the invariant space `V(M)` (copies in the integral).
    #[arg(long = "M", global = true)]
    m: Option<u32>,
    /// Comma-separated exact coordinates, e.g. `3/10,1/5`.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    z: Option<Vec<String>>,
    /// Direction `i` (1-based).
    #[arg(long, global = true)]
    i: Option<usize>,
    /// Quadrature nodes per axis.
    #[arg(long, global = true)]
    nodes: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; `.csv` switches `hamiltonian` to CSV.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// SVG line plot of coefficient trajectories (`verify`).
    #[arg(long, global = true)]
    plot: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Ordered basis of the invariant space.
    Basis,
    /// Matrix `M_i(z)` of `H_i` on the invariant space.
    Hamiltonian,
    /// Exact identity checks.
    Check {
        #[arg(value_enum)]
        kind: CheckKind,
    },
    /// Transport a coefficient vector along a path of `z` points.
    Pfaffian {
        /// Path file: a JSON list of waypoints.
        path: Option<PathBuf>,
    },
    /// Integral solution coefficients by quadrature.
    Integral,
    /// Power-series coefficients for `N = 1`.
    Series,
    /// PDE residual of the integral and the cohomology comparison.
    Verify,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Basis => "basis",
            Command::Hamiltonian => "hamiltonian",
            Command::Check { .. } => "check",
            Command::Pfaffian { .. } => "pfaffian",
            Command::Integral => "integral",
            Command::Series => "series",
            Command::Verify => "verify",
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(text) = std::env::var("QIMS_THREADS") else {
        return Ok(());
    };
    let n: usize = text
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("QIMS_THREADS must be a positive integer, got {text:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("cannot start {n} worker threads: {e}")))
}

fn load(common: &Common) -> Result<RunConfig, CliError> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cfg.apply(Overrides {
        l: common.l,
        n: common.n,
        m: common.m,
        z: common.z.clone(),
        i: common.i,
        nodes: common.nodes,
        seed: common.seed,
        out: common.out.clone(),
    });
    Ok(cfg)
}

fn execute(cli: &Cli, cfg: &RunConfig) -> Result<Output, CliError> {
    match &cli.command {
        Command::Basis => commands::basis(cfg),
        Command::Hamiltonian => {
            let csv = cfg
                .out
                .as_ref()
                .and_then(|p| p.extension())
                .is_some_and(|e| e == "csv");
            commands::hamiltonian(cfg, csv)
        }
        Command::Check { kind } => commands::check(cfg, *kind),
        Command::Pfaffian { path } => commands::pfaffian(cfg, path.as_deref()),
        Command::Integral => commands::integral(cfg),
        Command::Series => commands::series(cfg),
        Command::Verify => commands::verify(cfg, cli.common.plot.as_ref()),
    }
}

fn run(cli: &Cli) -> (Result<Output, CliError>, Sink) {
    let mut sink = Sink {
        out: cli.common.out.clone(),
    };
    if let Err(e) = configure_threads() {
        return (Err(e), sink);
    }
    let cfg = match load(&cli.common) {
        Ok(cfg) => cfg,
        Err(e) => return (Err(e), sink),
    };
    sink.out = cfg.out.clone();
    (execute(cli, &cfg), sink)
}

fn main() {
    let cli = Cli::parse();
    let name = cli.command.name();
    let start = Instant::now();
    let (result, sink) = run(&cli);
    let code = match result {
        Ok(out) => {
            let code = if out.passed { 0 } else { CliError::CheckFailed.exit_code() };
            match sink.emit(&out.text, name, start.elapsed()) {
                Ok(()) => code,
                Err(e) => {
                    print!("{}", report::render(&e.report(name)));
                    e.exit_code()
                }
            }
        }
        Err(e) => {
            let text = report::render(&e.report(name));
            if sink.emit(&text, name, start.elapsed()).is_err() {
                print!("{text}");
            }
            e.exit_code()
        }
    };
    std::process::exit(code);
}

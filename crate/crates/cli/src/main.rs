//! `szego-lab`: batch driver for the verification suites.
//!
//! Every subcommand writes `<out>/<command>.json` in the shared report schema
//! and exits 0 iff every case passes. Input problems exit with status 2.

mod cmd;
mod symbol;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;

use szego_lab::report::Report;

#[derive(Parser)]
#[command(name = "szego-lab", version, about = "Numerical checks for Szegő-type trace asymptotics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Clone)]
pub struct Common {
    /// JSON config file; missing keys take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for reports and series.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Multiplies every tolerance.
    #[arg(long, global = true, default_value_t = 1.0)]
    tolerance_scale: f64,
    /// Overrides the seed in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Hunt-Dyson and Bohnenblust-Spitzer sweeps over symmetric groups.
    Combinatorics,
    /// Trace differences, log-determinant series and their fitted expansion.
    Szego,
    /// Partial sums of per-level traces against the residue model.
    Prop3,
    /// Joint law of a random walk and its running maximum.
    Randomwalk,
    /// Multilinear maps and the running-minimum functionals.
    Funcmaps,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Combinatorics => "combinatorics",
            Command::Szego => "szego",
            Command::Prop3 => "prop3",
            Command::Randomwalk => "randomwalk",
            Command::Funcmaps => "funcmaps",
        }
    }
}

/// Shared run settings after the flags are resolved.
pub struct Ctx {
    pub tolerance_scale: f64,
    pub seed: Option<u64>,
    pub out: PathBuf,
}

impl Ctx {
    pub fn tol(&self, t: f64) -> f64 {
        t * self.tolerance_scale
    }

    pub fn write(&self, name: &str, contents: &str) -> Result<()> {
        let path = self.out.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
    }
}

pub fn load_config<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
}

fn run(cli: Cli) -> Result<Report> {
    let c = &cli.common;
    if !(c.tolerance_scale.is_finite() && c.tolerance_scale > 0.0) {
        anyhow::bail!("--tolerance-scale must be positive, got {}", c.tolerance_scale);
    }
    if let Some(j) = c.jobs {
        anyhow::ensure!(j > 0, "--jobs must be positive");
        rayon::ThreadPoolBuilder::new().num_threads(j).build_global().context("starting thread pool")?;
    }
    fs::create_dir_all(&c.out).with_context(|| format!("creating {}", c.out.display()))?;
    let ctx = Ctx { tolerance_scale: c.tolerance_scale, seed: c.seed, out: c.out.clone() };
    let cfg = c.config.as_deref();
    let report = match cli.command {
        Command::Combinatorics => cmd::combinatorics::run(load_config(cfg)?, &ctx)?,
        Command::Szego => cmd::szego::run(load_config(cfg)?, &ctx)?,
        Command::Prop3 => cmd::prop3::run(load_config(cfg)?, &ctx)?,
        Command::Randomwalk => cmd::randomwalk::run(load_config(cfg)?, &ctx)?,
        Command::Funcmaps => cmd::funcmaps::run(load_config(cfg)?, &ctx)?,
    };
    ctx.write(&format!("{}.json", cli.command.name()), &(report.to_json() + "\n"))?;
    Ok(report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(report) => {
            for case in &report.cases {
                let detail = match &case.error {
                    Some(e) => e.clone(),
                    None => format!("residual {:.3e} (tol {:.1e})", case.residual, case.tolerance),
                };
                println!("[{}] {}: {detail}", case.verdict.to_uppercase(), case.name);
            }
            let passed = report.cases.iter().filter(|c| c.passed()).count();
            println!("{passed}/{} cases passed", report.cases.len());
            if report.all_passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

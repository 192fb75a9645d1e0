//! Command-line front end.

pub mod commands;
pub mod config;
pub mod svg;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::checks;
use commands::{Context, Failure};
use config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "srgeo", version, about = "Sub-Riemannian geodesics on unit tangent bundles and their Legendre singularities")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (default: current directory).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Sample count, overriding `sweep.count`.
    #[arg(long, global = true)]
    pub count: Option<usize>,
    /// Seed, overriding `seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Integrator tolerance, overriding `tol`.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, Subcommand, PartialEq, Eq)]
pub enum Command {
    /// Integrate one extremal and write trajectory.csv.
    Simulate,
    /// Detect and classify singular events; write events.json.
    Classify,
    /// Classify a seeded batch of random initial states.
    Sweep,
    /// Compare a flat run with the closed form and the alternate Hamiltonian.
    Oracle,
    /// Draw the projected front to front.svg.
    Render,
    /// Run the whole invariant suite.
    Check,
}

fn load(cli: &Cli) -> Result<RunConfig, Failure> {
    let path = cli.config.as_ref().ok_or_else(|| config::ConfigError::Invalid("--config is required".into()))?;
    let mut cfg = RunConfig::from_path(path)?;
    if let Some(c) = cli.count {
        cfg.sweep.count = c;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(t) = cli.tol {
        cfg.tol = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn check(cli: &Cli) -> Result<String, Failure> {
    let seed = match &cli.config {
        Some(_) => load(cli)?.seed,
        None => cli.seed.unwrap_or(0),
    };
    let seed = cli.seed.unwrap_or(seed);
    let results = checks::run_with(seed, cli.count.unwrap_or(checks::SWEEP_COUNT));
    let text: String = results.iter().map(|r| format!("{r}\n")).collect();
    if let Some(out) = &cli.out {
        std::fs::create_dir_all(out)
            .and_then(|_| std::fs::write(out.join("check.txt"), &text))
            .map_err(|source| Failure::Io { path: out.display().to_string(), source })?;
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    if failed > 0 {
        return Err(Failure::Threshold(format!("{text}{failed} of {} criteria failed", results.len())));
    }
    Ok(text)
}

/// Runs the parsed command, printing its report. Returns the exit code.
pub fn run(cli: &Cli) -> u8 {
    let result = match cli.command {
        Command::Check => check(cli),
        cmd => load(cli).and_then(|config| {
            let ctx = Context { config, out: commands::output_dir(cli.out.as_deref()) };
            match cmd {
                Command::Simulate => commands::simulate(&ctx),
                Command::Classify => commands::classify(&ctx),
                Command::Sweep => commands::sweep(&ctx),
                Command::Oracle => commands::oracle(&ctx),
                Command::Render => commands::render(&ctx),
                Command::Check => unreachable!(),
            }
        }),
    };
    match result {
        Ok(text) => {
            print!("{text}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

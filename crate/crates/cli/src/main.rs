#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use config::ExperimentConfig;
use output::Writer;

/// Batch experiments on the quasi-periodic isotropic XY chain.
#[derive(Parser)]
#[command(name = "lrcone", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML config; omitted keys take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides the config).
    #[arg(long, global = true, env = "LRCONE_OUT")]
    out: Option<PathBuf>,

    /// Worker threads (overrides the config).
    #[arg(long, global = true, env = "LRCONE_WORKERS")]
    workers: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Field values h_1..h_N.
    Field,
    /// Eigenvalues, plus a trace-map escape scan for the Fibonacci field.
    Spectrum,
    /// Transport front positions.
    Front,
    /// Front exponent and alpha_u estimate.
    FitAlpha,
    /// Cone grid and light-cone fit.
    Cone,
    /// Front exponents of free, period-2, Fibonacci and random dimer fields.
    DimerCompare,
    /// Many-body oracle checks on small chains.
    Oracle,
    /// Front exponent per coupling.
    Sweep,
    /// Print the resolved config as TOML.
    Config,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Field => "field",
            Command::Spectrum => "spectrum",
            Command::Front => "front",
            Command::FitAlpha => "fit-alpha",
            Command::Cone => "cone",
            Command::DimerCompare => "dimer-compare",
            Command::Oracle => "oracle",
            Command::Sweep => "sweep",
            Command::Config => "config",
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(out) = &cli.out {
        cfg.output.dir = out.to_string_lossy().into_owned();
    }
    if let Some(w) = cli.workers {
        cfg.output.workers = w;
    }
    cfg.validate()?;

    if let Command::Config = cli.command {
        print!("{}", cfg.to_toml()?);
        return Ok(true);
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.output.workers)
        .build()
        .context("cannot start worker pool")?;
    let writer = Writer::new(&PathBuf::from(&cfg.output.dir), cli.command.name(), &cfg)?;
    let outcome = pool.install(|| match cli.command {
        Command::Field => commands::field(&cfg, &writer),
        Command::Spectrum => commands::spectrum(&cfg, &writer),
        Command::Front => commands::front(&cfg, &writer),
        Command::FitAlpha => commands::fit_alpha_cmd(&cfg, &writer),
        Command::Cone => commands::cone(&cfg, &writer),
        Command::DimerCompare => commands::dimer_compare(&cfg, &writer),
        Command::Oracle => commands::oracle(&cfg, &writer),
        Command::Sweep => commands::sweep(&cfg, &writer),
        Command::Config => unreachable!(),
    })?;
    for f in &outcome.files {
        println!("wrote {}", f.display());
    }
    println!("{}", outcome.summary);
    if !outcome.passed {
        eprintln!("lrcone {}: checks failed", cli.command.name());
    }
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

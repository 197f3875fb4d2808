//! Thin CLI over the library: one experiment per invocation, driven by
//! a JSON config. See `examples/` for library-level usage.

use clap::{Args, Parser, Subcommand};
use dotprod_trees::config::{ConfigError, ExperimentConfig, ExperimentKind};
use dotprod_trees::runner;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "dotprod-trees",
    version,
    about = "Seeded dot-product tree-embedding experiments on fractal point clouds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (JSON)
    #[arg(long)]
    config: PathBuf,
    /// Output directory for result artifacts
    #[arg(long)]
    out: Option<PathBuf>,
    /// Cap compute worker threads (results do not depend on this)
    #[arg(long)]
    threads: Option<usize>,
    /// Replace the config's seed
    #[arg(long)]
    seed_override: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a measure and write it as CSV plus metadata
    Gen(RunArgs),
    /// Build the symmetric cover of a tree with its embedding certificate
    Cover(RunArgs),
    /// Count approximate tree embeddings at one window width
    Count(RunArgs),
    /// Window-width ladder with log-log slope and upper-bound check
    Scale(RunArgs),
    /// Lower-bound check on a symmetric cover over a target interval
    Lower(RunArgs),
    /// Box-counting dimension of the embedding set across levels
    DimEmbed(RunArgs),
    /// Occupied-volume evidence for the gap set's positive measure
    Lambda(RunArgs),
    /// Low-frequency Fourier mass growth exponent
    Fourier(RunArgs),
    /// Two-sided ball-mass regularity probe
    Regularity(RunArgs),
    /// Print the execution plan without running
    Describe {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            let mut source = std::error::Error::source(err.as_ref());
            while let Some(cause) = source {
                eprintln!("  caused by: {cause}");
                source = cause.source();
            }
            ExitCode::FAILURE
        }
    }
}

fn real_main() -> Result<(), Box<dyn std::error::Error>> {
    let cli = Cli::parse();
    let (kind, args) = match &cli.command {
        Command::Gen(a) => (ExperimentKind::Gen, a),
        Command::Cover(a) => (ExperimentKind::Cover, a),
        Command::Count(a) => (ExperimentKind::Count, a),
        Command::Scale(a) => (ExperimentKind::Scale, a),
        Command::Lower(a) => (ExperimentKind::Lower, a),
        Command::DimEmbed(a) => (ExperimentKind::DimEmbed, a),
        Command::Lambda(a) => (ExperimentKind::Lambda, a),
        Command::Fourier(a) => (ExperimentKind::Fourier, a),
        Command::Regularity(a) => (ExperimentKind::Regularity, a),
        Command::Describe { config } => {
            let cfg = ExperimentConfig::from_file(config)?;
            print!("{}", runner::describe(&cfg)?);
            return Ok(());
        }
    };
    let cfg = ExperimentConfig::from_file(&args.config)?;
    if cfg.experiment != kind {
        return Err(ConfigError::invalid(
            "experiment",
            format!(
                "config declares '{}' but the subcommand is '{}'",
                cfg.experiment.name(),
                kind.name()
            ),
        )
        .into());
    }
    let out_dir = args
        .out
        .clone()
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let artifacts = runner::run(&cfg, &out_dir, args.threads, args.seed_override)?;
    println!("wrote {}", artifacts.result_json.display());
    for file in &artifacts.files {
        println!("wrote {}", file.display());
    }
    println!("log   {}", artifacts.log.display());
    Ok(())
}

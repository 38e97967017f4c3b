use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod frames;

use config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "depthkit", version, about = "Depth-map evaluation and voxel radiance-field tools")]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Seed for every random choice in the run
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Single-threaded with ordered reductions
    #[arg(long, global = true)]
    deterministic: bool,
    /// Output directory
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// JSON run configuration; flags take precedence
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate predicted depth maps against ground truth
    Eval(commands::EvalArgs),
    /// Write a synthetic dataset from an analytic scene
    Synth(commands::SynthArgs),
    /// Render images and depth maps from a voxel grid
    Render(commands::RenderArgs),
    /// Fit a voxel grid to a dataset
    Train(commands::TrainArgs),
    /// Fill masked depth (and optionally color) by harmonic interpolation
    Inpaint(commands::InpaintArgs),
    /// Summarize an evaluation report or plot a training log
    Report(commands::ReportArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Eval(_) => "eval",
            Command::Synth(_) => "synth",
            Command::Render(_) => "render",
            Command::Train(_) => "train",
            Command::Inpaint(_) => "inpaint",
            Command::Report(_) => "report",
        }
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let mut cfg = RunConfig::load(cli.common.config.as_deref())?;
    if let Some(seed) = cli.common.seed {
        cfg.seed = seed;
    }
    if cli.common.threads.is_some() {
        cfg.threads = cli.common.threads;
    }
    cfg.deterministic |= cli.common.deterministic;
    let threads = if cfg.deterministic { Some(1) } else { cfg.threads };
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    std::fs::create_dir_all(&cli.common.out)
        .with_context(|| format!("creating output directory {}", cli.common.out.display()))?;
    let ctx = commands::Context {
        out: cli.common.out.clone(),
        command: cli.command.name(),
        threads: rayon::current_num_threads(),
    };
    match cli.command {
        Command::Eval(a) => commands::eval(&ctx, cfg, a),
        Command::Synth(a) => commands::synth(&ctx, cfg, a),
        Command::Render(a) => commands::render(&ctx, cfg, a),
        Command::Train(a) => commands::train(&ctx, cfg, a),
        Command::Inpaint(a) => commands::inpaint(&ctx, cfg, a),
        Command::Report(a) => commands::report(&ctx, cfg, a),
    }
}

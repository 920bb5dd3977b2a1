use std::path::PathBuf;

use anyhow::Result;
use clap::{Parser, Subcommand};
use experiments::convergence::run_convergence;
use experiments::counterexample::run_counterexample;
use experiments::lemmas::run_lemmas;
use experiments::output::Output;
use experiments::scatter::run_scatter;
use experiments::stability::run_stability;
use experiments::ExperimentConfig;

#[derive(Parser)]
#[command(version, about = "Reconstruction experiments for planar potentials with jumps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides the configuration.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Grid size; overrides the configuration.
    #[arg(long, global = true)]
    grid: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    Counterexample,
    Convergence,
    Stability,
    Lemmas,
    Scatter,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    if let Some(j) = cli.jobs {
        rayon::ThreadPoolBuilder::new().num_threads(j).build_global()?;
    }
    let Some(path) = &cli.config else { anyhow::bail!("--config is required") };
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(n) = cli.grid {
        cfg.grid.n = n;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = cli.out {
        cfg.out_dir = o;
    }
    cfg.validate()?;
    let out = Output::create(&cfg.out_dir)?;
    let summary = match cli.command {
        Command::Counterexample => serde_json::to_string_pretty(&run_counterexample(&cfg, Some(&out))?)?,
        Command::Convergence => serde_json::to_string_pretty(&run_convergence(&cfg, Some(&out))?)?,
        Command::Stability => serde_json::to_string_pretty(&run_stability(&cfg, Some(&out))?)?,
        Command::Lemmas => serde_json::to_string_pretty(&run_lemmas(&cfg, Some(&out))?)?,
        Command::Scatter => serde_json::to_string_pretty(&run_scatter(&cfg, Some(&out))?)?,
    };
    println!("{summary}");
    eprintln!("outputs written to {}", out.dir().display());
    Ok(())
}

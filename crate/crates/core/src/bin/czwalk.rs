use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use czwalk::experiments::{run_experiment, ExperimentConfig};
use czwalk::Error;

#[derive(Parser)]
#[command(name = "czwalk", version, about = "Controlled-phase random walk simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Port angles and probabilities of the X-basis step over an alpha grid.
    Characterize(Common),
    /// Hitting-time histogram of one strategy.
    Simulate(Common),
    /// Expectation and N at the quantile for several strategies.
    Compare(Common),
    /// Coupling at which two-port steering becomes viable.
    Threshold(Common),
    /// Plan a packet and run Alice/Bob sessions.
    Protocol(Common),
    /// Regenerate a figure dataset.
    Figures {
        name: String,
        #[command(flatten)]
        common: Common,
    },
    /// Run whatever experiment the config file names.
    Run(Common),
}

#[derive(Args)]
struct Common {
    /// key = value experiment file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Angle or grid: `pi/16`, `0.73*pi/4`, `a,b,c`, `a..b:n`.
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    epsilon: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    quantile: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    /// Strategy or comma list: unguided, flip-undo, 1p1d, 1p2d, 2p1d, 2p2d.
    #[arg(long)]
    strategy: Option<String>,
    #[arg(long)]
    max_steps: Option<String>,
}

fn build(experiment: Option<&str>, c: &Common) -> czwalk::Result<ExperimentConfig> {
    let mut cfg = match &c.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(name) = experiment {
        cfg.experiment = name.to_string();
    }
    let flags = [
        ("alpha", &c.alpha),
        ("epsilon", &c.epsilon),
        ("trials", &c.trials),
        ("seed", &c.seed),
        ("quantile", &c.quantile),
        ("out", &c.out),
        ("strategy", &c.strategy),
        ("max_steps", &c.max_steps),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            cfg.set(key, v)?;
        }
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Characterize(c) => build(Some("characterize"), c),
        Command::Simulate(c) => build(Some("simulate"), c),
        Command::Compare(c) => build(Some("compare"), c),
        Command::Threshold(c) => build(Some("threshold"), c),
        Command::Protocol(c) => build(Some("protocol"), c),
        Command::Figures { name, common } => build(Some(name), common),
        Command::Run(c) => build(None, c),
    }
    .and_then(|cfg| run_experiment(&cfg));
    match result {
        Ok(report) => {
            println!("{}", serde_json::to_string_pretty(&report.summary).unwrap_or_default());
            for f in &report.files {
                eprintln!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::Parse(_) | Error::InvalidArgument(_) | Error::Unsupported(_) => ExitCode::from(2),
                _ => ExitCode::from(3),
            }
        }
    }
}

//! Writes every registered dataset with reduced trial counts.
//!
//! `cargo run --release --example figure_datasets -- [output_dir]`

use czwalk::experiments::{run_experiment, ExperimentConfig, EXPERIMENTS};

fn main() -> czwalk::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "figures".into());
    for name in EXPERIMENTS {
        let mut cfg = ExperimentConfig { experiment: name.to_string(), ..Default::default() };
        cfg.set("out", &out)?;
        cfg.set("trials", "2000")?;
        let report = run_experiment(&cfg)?;
        println!("{name:<20} {:>7.2}s  {}", report.summary["wall_clock_seconds"].as_f64().unwrap_or(0.0), report.files[0].display());
    }
    Ok(())
}

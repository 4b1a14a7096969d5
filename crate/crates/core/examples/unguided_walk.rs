//! Unguided walk: Monte Carlo hitting times against the exact lattice
//! propagation.
//!
//! `cargo run --release --example unguided_walk`

use std::f64::consts::PI;

use czwalk::analytics::{summarize, unguided_exact};
use czwalk::{run_trials, CouplingStrength, RunSpec, StrategyKind, TargetRule};

fn main() -> czwalk::Result<()> {
    let alpha = PI / 16.0;
    for eps in [PI / 100.0, PI / 50.0] {
        let dist = run_trials(&RunSpec::new(StrategyKind::Unguided, alpha, eps, 10_000, 1))?;
        let s = summarize(&dist, &[0.5, 0.9, 0.999])?;
        let exact = unguided_exact(CouplingStrength::new(alpha)?, &TargetRule::new(eps)?, 1_000_000, 1e-12);
        println!(
            "ε = π/{:.0}: sampled mean {:.2} std {:.2}, exact mean {:.2} std {:.2}, quantiles {:?}",
            PI / eps,
            s.mean,
            s.std,
            exact.mean(),
            exact.std(),
            s.quantiles
        );
    }

    let dist = run_trials(&RunSpec::new(StrategyKind::Unguided, alpha, PI / 100.0, 10_000, 1))?;
    println!("\nhistogram (bins of 20 steps)");
    let mut bins = std::collections::BTreeMap::new();
    for (&n, &c) in dist.counts() {
        *bins.entry((n - 1) / 20).or_insert(0u64) += c;
    }
    for (b, c) in bins.iter().take(15) {
        println!("{:>4}-{:<4} {}", b * 20 + 1, b * 20 + 20, "#".repeat((*c / 40) as usize));
    }
    Ok(())
}

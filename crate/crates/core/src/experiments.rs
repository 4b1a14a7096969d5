//! Experiment configuration and the registered figure datasets.
//!
//! A configuration is a plain `key = value` file; command-line flags are
//! applied on top of it with [`ExperimentConfig::set`]. Every experiment
//! writes `<name>.csv` and `<name>.summary.json` into the output directory.

use std::f64::consts::{FRAC_PI_4, PI};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use crate::analytics::{max_steps_bound, strategy_exact, summarize};
use crate::error::{Error, Result};
use crate::montecarlo::{derive_stream, run_trials, RunSpec, DEFAULT_MAX_STEPS};
use crate::optimizer::{solve_port1, threshold_alpha, ControlMode, Dof};
use crate::protocol::{execute_session, plan_session, run_sessions, write_transcript};
use crate::qcore::CouplingStrength;
use crate::stepmodel::{characterize_step, xbasis_config};
use crate::strategies::StrategyKind;

/// Names accepted by [`run_experiment`].
pub const EXPERIMENTS: &[&str] = &[
    "characterize",
    "threshold",
    "simulate",
    "compare",
    "protocol",
    "fig4-histogram",
    "fig6-expectation",
    "fig7-ancilla-count",
    "fig8-port-modes",
    "fig9-maxsteps",
];

/// Uncovered mass at which exact distributions are truncated.
const EXACT_TAIL: f64 = 1e-9;
const EXACT_MAX_STEPS: usize = 200_000;

/// Parses angles such as `0.3`, `pi/16`, `3pi/16`, `0.73*pi/4` or `π/4`.
pub fn parse_angle(s: &str) -> Result<f64> {
    let bad = || Error::Parse(format!("cannot parse angle '{s}'"));
    let t = s.trim().replace('π', "pi").replace(' ', "");
    if t.is_empty() {
        return Err(bad());
    }
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.to_string(), Some(d.to_string())),
        None => (t.clone(), None),
    };
    let factor = |f: &str| -> Result<f64> {
        if f == "pi" {
            return Ok(PI);
        }
        if let Some(c) = f.strip_suffix("pi") {
            return c.parse::<f64>().map(|c| c * PI).map_err(|_| bad());
        }
        f.parse::<f64>().map_err(|_| bad())
    };
    let mut value = 1.0;
    for f in num.split('*') {
        value *= factor(f)?;
    }
    if let Some(d) = den {
        let d = d.parse::<f64>().map_err(|_| bad())?;
        if d == 0.0 {
            return Err(bad());
        }
        value /= d;
    }
    if !value.is_finite() {
        return Err(bad());
    }
    Ok(value)
}

/// Parses a comma list of angles or an inclusive linear range `a..b:n`.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    if let Some((range, n)) = s.split_once(':') {
        let (a, b) = range.split_once("..").ok_or_else(|| Error::Parse(format!("bad grid '{s}'")))?;
        let (a, b) = (parse_angle(a)?, parse_angle(b)?);
        let n: usize = n.trim().parse().map_err(|_| Error::Parse(format!("bad grid size in '{s}'")))?;
        return Ok(match n {
            0 => Vec::new(),
            1 => vec![a],
            _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
        });
    }
    s.split(',').filter(|p| !p.trim().is_empty()).map(parse_angle).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: String,
    /// Empty selects the experiment's default grid.
    pub alpha_grid: Vec<f64>,
    pub epsilon: f64,
    pub n_trials: u64,
    pub seed: u64,
    pub quantile: f64,
    pub output_dir: PathBuf,
    /// Empty selects the experiment's default strategies.
    pub strategies: Vec<StrategyKind>,
    pub max_steps: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: "characterize".into(),
            alpha_grid: Vec::new(),
            epsilon: PI / 100.0,
            n_trials: 10_000,
            seed: 0,
            quantile: 0.999,
            output_dir: PathBuf::from("results"),
            strategies: Vec::new(),
            max_steps: DEFAULT_MAX_STEPS,
        }
    }
}

impl ExperimentConfig {
    /// Applies one setting; later calls win.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let num =
            |v: &str| -> Result<u64> { v.trim().parse().map_err(|_| Error::Config(format!("{key}: expected an integer, got '{v}'"))) };
        match key.trim() {
            "experiment" => self.experiment = value.trim().to_string(),
            "alpha" | "alpha_grid" => self.alpha_grid = parse_grid(value)?,
            "epsilon" => self.epsilon = parse_angle(value)?,
            "trials" | "n_trials" => self.n_trials = num(value)?,
            "seed" => self.seed = num(value)?,
            "max_steps" => self.max_steps = num(value)?,
            "quantile" => self.quantile = value.trim().parse().map_err(|_| Error::Config(format!("quantile: bad value '{value}'")))?,
            "out" | "output_dir" => self.output_dir = PathBuf::from(value.trim()),
            "strategy" | "strategies" => {
                self.strategies =
                    value.split(',').filter(|s| !s.trim().is_empty()).map(|s| StrategyKind::parse(s.trim())).collect::<Result<_>>()?
            }
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Reads `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if !EXPERIMENTS.contains(&self.experiment.as_str()) {
            return Err(Error::Config(format!("unknown experiment '{}'; known: {}", self.experiment, EXPERIMENTS.join(", "))));
        }
        if self.n_trials == 0 || self.max_steps == 0 {
            return Err(Error::Config("trials and max_steps must be at least 1".into()));
        }
        if !(self.quantile > 0.0 && self.quantile < 1.0) {
            return Err(Error::Config(format!("quantile {} outside (0, 1)", self.quantile)));
        }
        if !(0.0..PI).contains(&self.epsilon) {
            return Err(Error::Config(format!("epsilon {} outside [0, π)", self.epsilon)));
        }
        for &a in &self.grid() {
            CouplingStrength::new(a)?;
        }
        Ok(())
    }

    /// The alpha grid, or the experiment's default.
    pub fn grid(&self) -> Vec<f64> {
        if !self.alpha_grid.is_empty() {
            return self.alpha_grid.clone();
        }
        let frac = |n: usize, lo: f64| (1..=n).map(|k| FRAC_PI_4 * (lo + (1.0 - lo) * k as f64 / n as f64)).collect();
        match self.experiment.as_str() {
            "characterize" | "fig9-maxsteps" => frac(40, 0.0),
            "fig6-expectation" | "fig7-ancilla-count" | "compare" => frac(20, 0.0),
            "fig8-port-modes" => frac(10, 0.73),
            _ => vec![PI / 16.0],
        }
    }

    pub fn kinds(&self) -> Vec<StrategyKind> {
        if !self.strategies.is_empty() {
            return self.strategies.clone();
        }
        let one = StrategyKind::OneStep(ControlMode::ONE_PORT);
        match self.experiment.as_str() {
            "fig8-port-modes" => {
                vec![one, StrategyKind::OneStep(ControlMode::TWO_PORT_ONE_DOF), StrategyKind::OneStep(ControlMode::TWO_PORT_TWO_DOF)]
            }
            "protocol" => vec![StrategyKind::FlipUndo],
            "simulate" | "fig4-histogram" => vec![StrategyKind::Unguided],
            _ => vec![StrategyKind::Unguided, one, StrategyKind::FlipUndo],
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub files: Vec<PathBuf>,
    pub summary: Value,
}

fn create(dir: &Path, name: &str) -> Result<(PathBuf, csv::Writer<BufWriter<File>>)> {
    let path = dir.join(name);
    let file = File::create(&path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    Ok((path, csv::Writer::from_writer(BufWriter::new(file))))
}

fn coupling(a: f64) -> Result<CouplingStrength> {
    CouplingStrength::new(a)
}

/// Runs the configured experiment and writes its outputs.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.output_dir)?;
    let started = Instant::now();
    let name = cfg.experiment.as_str();
    let (csv_path, mut w) = create(&cfg.output_dir, &format!("{name}.csv"))?;
    let mut files = vec![csv_path];
    let stats = match name {
        "characterize" => characterize(cfg, &mut w)?,
        "threshold" => threshold(&mut w)?,
        "simulate" | "fig4-histogram" => histogram(cfg, &mut w)?,
        "compare" | "fig6-expectation" | "fig8-port-modes" => expectation(cfg, &mut w)?,
        "fig7-ancilla-count" => ancilla_count(cfg, &mut w)?,
        "fig9-maxsteps" => maxsteps(cfg, &mut w)?,
        "protocol" => protocol(cfg, &mut w, &mut files)?,
        _ => unreachable!("validated experiment name"),
    };
    w.flush()?;
    let summary = json!({
        "experiment": name,
        "config": cfg,
        "stats": stats,
        "wall_clock_seconds": started.elapsed().as_secs_f64(),
        "seed": cfg.seed,
    });
    let json_path = cfg.output_dir.join(format!("{name}.summary.json"));
    let mut f = BufWriter::new(File::create(&json_path)?);
    serde_json::to_writer_pretty(&mut f, &summary)?;
    writeln!(f)?;
    f.flush()?;
    files.push(json_path);
    Ok(ExperimentReport { files, summary })
}

type Csv = csv::Writer<BufWriter<File>>;

fn characterize(cfg: &ExperimentConfig, w: &mut Csv) -> Result<Value> {
    w.write_record(["alpha", "phi0", "phi1", "p0", "p1", "valid"])?;
    let grid = cfg.grid();
    for &a in &grid {
        let o = characterize_step(coupling(a)?, &xbasis_config());
        w.serialize((a, o.phi_port0, o.phi_port1, o.p_port0, o.p_port1, o.valid))?;
    }
    Ok(json!({ "rows": grid.len() }))
}

fn threshold(w: &mut Csv) -> Result<Value> {
    let t = threshold_alpha(1e-13)?;
    let closed = (PI / 8.0).tan().sqrt().atan();
    w.write_record(["alpha_star", "ratio_to_max"])?;
    w.serialize((t.value(), t.fraction_of_max()))?;
    Ok(json!({ "alpha_star": t.value(), "ratio_to_max": t.fraction_of_max(), "closed_form": closed }))
}

fn histogram(cfg: &ExperimentConfig, w: &mut Csv) -> Result<Value> {
    let kind = cfg.kinds()[0];
    let a = cfg.grid()[0];
    let spec = RunSpec::new(kind, a, cfg.epsilon, cfg.n_trials, cfg.seed).with_max_steps(cfg.max_steps);
    let dist = run_trials(&spec)?;
    w.write_record(["hitting_time", "count"])?;
    for (n, c) in dist.counts() {
        w.serialize((n, c))?;
    }
    let s = summarize(&dist, &[0.5, 0.9, cfg.quantile])?;
    if s.overflow > 0 {
        eprintln!("warning: {} trials exceeded {} steps and are excluded from the mean", s.overflow, cfg.max_steps);
    }
    Ok(json!({
        "strategy": kind.label(),
        "alpha": a,
        "mean": s.mean,
        "std": s.std,
        "standard_error": dist.standard_error(),
        "quantiles": s.quantiles,
        "n_trials": s.n_trials,
        "overflow": s.overflow,
    }))
}

fn expectation(cfg: &ExperimentConfig, w: &mut Csv) -> Result<Value> {
    w.write_record(["alpha", "strategy", "mean", "std", "n999"])?;
    let mut rows = Vec::new();
    let mut overflow = 0;
    for &a in &cfg.grid() {
        for kind in cfg.kinds() {
            // Same master seed for every cell: common random numbers across
            // strategies and couplings.
            let spec = RunSpec::new(kind, a, cfg.epsilon, cfg.n_trials, cfg.seed).with_max_steps(cfg.max_steps);
            let dist = run_trials(&spec)?;
            let n = dist.quantile(cfg.quantile)?;
            overflow += dist.overflow();
            w.serialize((a, kind.label(), dist.mean(), dist.std(), n.steps))?;
            rows.push(json!({ "alpha": a, "strategy": kind.label(), "mean": dist.mean(), "standard_error": dist.standard_error(), "quantile_certified": n.certified }));
        }
    }
    Ok(json!({ "cells": rows, "overflow": overflow }))
}

fn ancilla_count(cfg: &ExperimentConfig, w: &mut Csv) -> Result<Value> {
    w.write_record(["alpha", "strategy", "quantile", "n"])?;
    let mut missing = 0;
    for &a in &cfg.grid() {
        for kind in cfg.kinds() {
            let tail = EXACT_TAIL.min((1.0 - cfg.quantile) * 1e-3);
            let d = strategy_exact(kind, coupling(a)?, cfg.epsilon, tail, EXACT_MAX_STEPS)?;
            let n = d.quantile(cfg.quantile)?;
            if n.is_none() {
                missing += 1;
            }
            w.serialize((a, kind.label(), cfg.quantile, n))?;
        }
    }
    Ok(json!({ "method": "exact", "beyond_horizon": missing, "horizon": EXACT_MAX_STEPS }))
}

fn maxsteps(cfg: &ExperimentConfig, w: &mut Csv) -> Result<Value> {
    w.write_record(["alpha", "p1", "p2", "max_steps"])?;
    for &a in &cfg.grid() {
        let alpha = coupling(a)?;
        let first = characterize_step(alpha, &xbasis_config());
        let remaining = PI - first.phi_port0.abs();
        if remaining < 1e-12 {
            w.serialize((a, first.p_port1, None::<f64>, None::<u64>))?;
            continue;
        }
        let p2 = solve_port1(alpha, remaining, Dof::One)?.success_prob;
        w.serialize((a, first.p_port1, p2, max_steps_bound(p2)?))?;
    }
    Ok(json!({ "rows": cfg.grid().len() }))
}

fn protocol(cfg: &ExperimentConfig, w: &mut Csv, files: &mut Vec<PathBuf>) -> Result<Value> {
    let kind = cfg.kinds()[0];
    let a = cfg.grid()[0];
    let alpha = coupling(a)?;
    let tape = plan_session(kind, alpha, cfg.quantile, cfg.epsilon)?;
    let stats = run_sessions(&tape, alpha, cfg.n_trials, cfg.seed)?;
    w.write_record(["hitting_time", "count"])?;
    for (n, c) in stats.hitting.counts() {
        w.serialize((n, c))?;
    }
    let mut first = execute_session(&tape, alpha, &mut derive_stream(cfg.seed, 0))?;
    first.seed = Some(cfg.seed);
    let path = cfg.output_dir.join("protocol.transcript.txt");
    let mut f = BufWriter::new(File::create(&path)?);
    write_transcript(&first, &mut f)?;
    f.flush()?;
    files.push(path);
    Ok(json!({
        "strategy": kind.label(),
        "alpha": a,
        "packet_size": tape.packet_size,
        "tape_entries": tape.entries.len(),
        "sessions": stats.sessions,
        "failures": stats.failures,
        "failure_rate": stats.failure_rate(),
        "mean_consumed_on_success": stats.hitting.mean(),
        "discarded_total": stats.discarded,
        "mid_session_messages": stats.mid_session_messages,
    }))
}

//! Reproducible parallel trial runner.
//!
//! Every trial draws from its own ChaCha8 stream: the master seed keys the
//! generator and the trial index selects the stream, so results do not
//! depend on how trials are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::HittingDistribution;
use crate::error::{Error, Result};
use crate::optimizer::StepPlan;
use crate::qcore::CouplingStrength;
use crate::stepmodel::Port;
use crate::strategies::{advance, Policy, StrategyKind, TargetRule, WalkState};

pub type TrialRng = ChaCha8Rng;

pub const DEFAULT_MAX_STEPS: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub kind: StrategyKind,
    pub alpha: f64,
    pub epsilon: f64,
    pub n_trials: u64,
    pub master_seed: u64,
    pub max_steps: u64,
}

impl RunSpec {
    pub fn new(kind: StrategyKind, alpha: f64, epsilon: f64, n_trials: u64, master_seed: u64) -> Self {
        Self { kind, alpha, epsilon, n_trials, master_seed, max_steps: DEFAULT_MAX_STEPS }
    }

    pub fn with_max_steps(mut self, max_steps: u64) -> Self {
        self.max_steps = max_steps;
        self
    }

    pub fn validate(&self) -> Result<(CouplingStrength, TargetRule)> {
        if self.n_trials == 0 {
            return Err(Error::InvalidArgument("n_trials must be at least 1".into()));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidArgument("max_steps must be at least 1".into()));
        }
        Ok((CouplingStrength::new(self.alpha)?, self.kind.target_rule(self.epsilon)?))
    }
}

/// Random stream for one trial.
pub fn derive_stream(master_seed: u64, trial_index: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial_index);
    rng
}

/// Draws the port realized by `plan`.
pub fn sample_port(plan: &StepPlan, rng: &mut impl Rng) -> Port {
    let u: f64 = rng.random();
    if u < plan.probability(Port::One) {
        Port::One
    } else {
        Port::Zero
    }
}

/// Runs one walk; `None` when it exceeds `max_steps`.
pub fn run_trial(policy: &Policy, rule: &TargetRule, rng: &mut impl Rng, max_steps: u64) -> Result<Option<u64>> {
    let mut state = WalkState::origin();
    while state.steps < max_steps {
        let plan = policy.next(&state)?;
        let port = sample_port(&plan, rng);
        state = advance(&state, &plan, port, rule);
        if state.done {
            return Ok(Some(state.steps));
        }
    }
    Ok(None)
}

fn run_range(spec: &RunSpec, policy: &Policy, rule: &TargetRule, range: std::ops::Range<u64>) -> Result<HittingDistribution> {
    range
        .into_par_iter()
        .try_fold(HittingDistribution::new, |mut dist, i| {
            let mut rng = derive_stream(spec.master_seed, i);
            match run_trial(policy, rule, &mut rng, spec.max_steps)? {
                Some(n) => dist.record(n),
                None => dist.record_overflow(),
            }
            Ok(dist)
        })
        .try_reduce(HittingDistribution::new, |a, b| Ok(a.merge(&b)))
}

pub fn run_trials(spec: &RunSpec) -> Result<HittingDistribution> {
    let (alpha, rule) = spec.validate()?;
    let policy = Policy::new(spec.kind, alpha)?;
    run_range(spec, &policy, &rule, 0..spec.n_trials)
}

/// Same as [`run_trials`] but executes `shards` contiguous index blocks
/// one after another and merges them.
pub fn run_trials_sharded(spec: &RunSpec, shards: u64) -> Result<HittingDistribution> {
    let (alpha, rule) = spec.validate()?;
    let policy = Policy::new(spec.kind, alpha)?;
    let shards = shards.clamp(1, spec.n_trials);
    let per = spec.n_trials.div_ceil(shards);
    let mut out = HittingDistribution::new();
    for s in 0..shards {
        let lo = s * per;
        let hi = ((s + 1) * per).min(spec.n_trials);
        if lo < hi {
            out = out.merge(&run_range(spec, &policy, &rule, lo..hi)?);
        }
    }
    Ok(out)
}

/// Runs on a dedicated pool with `threads` workers.
pub fn run_trials_with_threads(spec: &RunSpec, threads: usize) -> Result<HittingDistribution> {
    let pool =
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    pool.install(|| run_trials(spec))
}

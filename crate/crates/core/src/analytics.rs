//! Hitting-time statistics: closed forms, exact distributions of the finite
//! chains the strategies induce, and empirical summaries.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::qcore::CouplingStrength;
use crate::stepmodel::xbasis_closed_form;
use crate::strategies::{one_step_chain, wrap_angle, StrategyKind, TargetRule};

/// Minimum expected number of samples beyond a quantile for it to count as
/// certified.
pub const CERTIFY_TAIL_SAMPLES: f64 = 10.0;

/// Counts of hitting times (step counts ≥ 1).
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HittingDistribution {
    counts: BTreeMap<u64, u64>,
    total: u64,
    /// Trials that hit the step cap without reaching the target.
    overflow: u64,
}

impl HittingDistribution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_counts(counts: impl IntoIterator<Item = (u64, u64)>) -> Self {
        let mut d = Self::new();
        for (n, c) in counts {
            d.record_many(n, c);
        }
        d
    }

    pub fn record(&mut self, steps: u64) {
        self.record_many(steps, 1);
    }

    pub fn record_many(&mut self, steps: u64, count: u64) {
        if count == 0 {
            return;
        }
        *self.counts.entry(steps).or_insert(0) += count;
        self.total += count;
    }

    pub fn record_overflow(&mut self) {
        self.overflow += 1;
    }

    /// Associative and commutative combination of two shards.
    pub fn merge(mut self, other: &HittingDistribution) -> Self {
        for (&n, &c) in &other.counts {
            *self.counts.entry(n).or_insert(0) += c;
        }
        self.total += other.total;
        self.overflow += other.overflow;
        self
    }

    pub fn counts(&self) -> &BTreeMap<u64, u64> {
        &self.counts
    }

    /// Trials that reached the target.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn overflow(&self) -> u64 {
        self.overflow
    }

    pub fn trials(&self) -> u64 {
        self.total + self.overflow
    }

    pub fn mean(&self) -> f64 {
        let s: u128 = self.counts.iter().map(|(&n, &c)| n as u128 * c as u128).sum();
        s as f64 / self.total as f64
    }

    /// Population standard deviation.
    pub fn std(&self) -> f64 {
        let m = self.mean();
        let ss: f64 = self.counts.iter().map(|(&n, &c)| c as f64 * (n as f64 - m).powi(2)).sum();
        (ss / self.total as f64).sqrt()
    }

    /// Standard error of the mean.
    pub fn standard_error(&self) -> f64 {
        self.std() / (self.total as f64).sqrt()
    }

    /// Empirical `P(T ≤ n)` over all trials, overflow included as `T > n`.
    pub fn ecdf(&self, n: u64) -> f64 {
        let below: u64 = self.counts.range(..=n).map(|(_, &c)| c).sum();
        below as f64 / self.trials() as f64
    }

    pub fn max_observed(&self) -> Option<u64> {
        self.counts.keys().next_back().copied()
    }

    /// Smallest `N` with empirical `P(T ≤ N) ≥ q`.
    pub fn quantile(&self, q: f64) -> Result<QuantileEstimate> {
        check_q(q)?;
        let n_trials = self.trials();
        if n_trials == 0 {
            return invalid("empty distribution");
        }
        let need = q * n_trials as f64;
        let mut cum = 0u64;
        let mut steps = None;
        for (&n, &c) in &self.counts {
            cum += c;
            if cum as f64 >= need - 1e-9 {
                steps = Some(n);
                break;
            }
        }
        let tail = (1.0 - q) * n_trials as f64;
        Ok(match steps {
            Some(steps) => QuantileEstimate { steps, certified: self.overflow == 0 && tail >= CERTIFY_TAIL_SAMPLES - 1e-9 },
            // The quantile lies in the overflow bucket.
            None => QuantileEstimate { steps: self.max_observed().unwrap_or(0), certified: false },
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuantileEstimate {
    pub steps: u64,
    /// False when too few trials lie beyond the quantile to trust it.
    pub certified: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub mean: f64,
    pub std: f64,
    pub quantiles: Vec<(f64, u64)>,
    pub n_trials: u64,
    pub overflow: u64,
}

pub fn summarize(dist: &HittingDistribution, qs: &[f64]) -> Result<SummaryStats> {
    if dist.total() == 0 {
        return invalid("cannot summarize an empty distribution");
    }
    let mut quantiles = Vec::with_capacity(qs.len());
    for &q in qs {
        quantiles.push((q, dist.quantile(q)?.steps));
    }
    quantiles.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(SummaryStats { mean: dist.mean(), std: dist.std(), quantiles, n_trials: dist.trials(), overflow: dist.overflow() })
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p <= 1.0) {
        return invalid(format!("probability {p} outside (0, 1]"));
    }
    Ok(())
}

fn check_q(q: f64) -> Result<()> {
    if !(q > 0.0 && q < 1.0) {
        return invalid(format!("quantile level {q} outside (0, 1)"));
    }
    Ok(())
}

/// Expected flip-undo hitting time `1 + 1/p`.
pub fn flip_undo_mean(p: f64) -> Result<f64> {
    check_p(p)?;
    Ok(1.0 + 1.0 / p)
}

/// `P(T ≤ n) = 1 − (1−p)(1 − 2p(1−p))^k` for odd `n = 2k + 1`.
pub fn flip_undo_cdf(p: f64, n: u64) -> Result<f64> {
    check_p(p)?;
    if n.is_multiple_of(2) {
        return invalid(format!("flip-undo successes occur at odd step counts, got {n}"));
    }
    let k = (n - 1) / 2;
    Ok(1.0 - (1.0 - p) * (1.0 - 2.0 * p * (1.0 - p)).powf(k as f64))
}

/// Smallest `N` with `P(T ≤ N) ≥ q` for the flip-undo loop.
pub fn flip_undo_quantile(p: f64, q: f64) -> Result<u64> {
    check_p(p)?;
    check_q(q)?;
    if p >= q {
        return Ok(1);
    }
    let cycle = 2.0 * p * (1.0 - p);
    // (1−p)(1−cycle)^k ≤ 1−q
    let k = (((1.0 - q) / (1.0 - p)).ln() / (1.0 - cycle).ln()).ceil().max(0.0) as u64;
    // Guard against rounding at the boundary.
    let mut k = k.saturating_sub(1);
    while flip_undo_cdf(p, 2 * k + 1)? < q {
        k += 1;
    }
    Ok(2 * k + 1)
}

/// Geometric envelope `(1 − (1−p₂)ⁿ, 1 − (1−p₁)ⁿ)` for the one-step CDF.
pub fn geometric_bounds(p1: f64, p2: f64, n: u64) -> Result<(f64, f64)> {
    if !(p2 > 0.0 && p2 <= p1 && p1 <= 1.0) {
        return invalid(format!("need 0 < p2 ≤ p1 ≤ 1, got p1={p1} p2={p2}"));
    }
    let n = n as f64;
    Ok((1.0 - (1.0 - p2).powf(n), 1.0 - (1.0 - p1).powf(n)))
}

/// Largest multi-step horizon for which an n-fold probability gain is
/// still possible: `⌊1/p₂⌋`.
pub fn max_steps_bound(p2: f64) -> Result<u64> {
    check_p(p2)?;
    Ok((1.0 / p2 + 1e-12).floor() as u64)
}

/// Smallest `N ≥ 1` with `cdf(N) ≥ q`, searching up to `max_n`.
pub fn quantile_from_cdf(cdf: impl Fn(u64) -> f64, q: f64, max_n: u64) -> Result<Option<u64>> {
    check_q(q)?;
    Ok((1..=max_n).find(|&n| cdf(n) >= q))
}

/// Exact hitting-time law of a walk whose `k`-th step (0-based) succeeds
/// with probability `success[k]`, independent of the past.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactDistribution {
    /// `pmf[n-1] = P(T = n)`.
    pmf: Vec<f64>,
}

impl ExactDistribution {
    pub fn from_pmf(pmf: Vec<f64>) -> Self {
        Self { pmf }
    }

    pub fn from_success_chain(success: &[f64]) -> Self {
        let mut survive = 1.0;
        let pmf = success
            .iter()
            .map(|&p| {
                let hit = survive * p;
                survive *= 1.0 - p;
                hit
            })
            .collect();
        Self { pmf }
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn covered_mass(&self) -> f64 {
        self.pmf.iter().sum()
    }

    pub fn cdf(&self, n: u64) -> f64 {
        self.pmf.iter().take(n as usize).sum::<f64>().min(1.0)
    }

    pub fn mean(&self) -> f64 {
        self.pmf.iter().enumerate().map(|(i, p)| (i + 1) as f64 * p).sum::<f64>() / self.covered_mass()
    }

    pub fn std(&self) -> f64 {
        let m = self.mean();
        let v = self.pmf.iter().enumerate().map(|(i, p)| p * ((i + 1) as f64 - m).powi(2)).sum::<f64>() / self.covered_mass();
        v.sqrt()
    }

    pub fn quantile(&self, q: f64) -> Result<Option<u64>> {
        check_q(q)?;
        let mut cum = 0.0;
        for (i, p) in self.pmf.iter().enumerate() {
            cum += p;
            if cum >= q {
                return Ok(Some(i as u64 + 1));
            }
        }
        Ok(None)
    }
}

/// Exact hitting-time law of the unguided X-basis walk.
///
/// The walk position after `n` steps is `parity·π + b·Φ₀` where `parity`
/// counts port-1 results mod 2 and `b` counts port-0 results, so the
/// surviving mass lives on a two-row lattice. Propagates until the
/// surviving mass drops below `tail` or `max_steps` is reached.
pub fn unguided_exact(alpha: CouplingStrength, rule: &TargetRule, max_steps: usize, tail: f64) -> ExactDistribution {
    let step = xbasis_closed_form(alpha);
    let (p, gamma) = (step.p_port1, step.phi_port0);
    let pi = std::f64::consts::PI;
    let mut alive = [vec![1.0f64], vec![0.0f64]];
    let mut pmf = Vec::new();
    for n in 1..=max_steps {
        let mut next = [vec![0.0; n + 1], vec![0.0; n + 1]];
        for parity in 0..2 {
            for (b, &m) in alive[parity].iter().enumerate() {
                if m == 0.0 {
                    continue;
                }
                next[1 - parity][b] += m * p;
                next[parity][b + 1] += m * (1.0 - p);
            }
        }
        let mut hit = 0.0;
        for (parity, row) in next.iter_mut().enumerate() {
            for (b, m) in row.iter_mut().enumerate() {
                let pos = wrap_angle(parity as f64 * pi + b as f64 * gamma);
                if *m != 0.0 && rule.reached(pos) {
                    hit += *m;
                    *m = 0.0;
                }
            }
        }
        pmf.push(hit);
        alive = next;
        let left: f64 = alive.iter().flatten().sum();
        if left < tail {
            break;
        }
    }
    ExactDistribution { pmf }
}

/// Exact flip-undo law: `P(T=1) = p` and, with `c = 2p(1−p)`,
/// `P(T=2k+1) = (1−p)·c·(1−c)^(k−1)` for `k ≥ 1`.
///
/// When the first failure already lands on the target every walk ends at
/// step 1.
pub fn flip_undo_exact(alpha: CouplingStrength, tail: f64, max_steps: usize) -> ExactDistribution {
    let step = xbasis_closed_form(alpha);
    if TargetRule::exact().reached(step.phi_port0) {
        return ExactDistribution::from_pmf(vec![1.0]);
    }
    let p = step.p_port1;
    let c = 2.0 * p * (1.0 - p);
    let mut pmf = vec![p];
    let mut left = 1.0 - p;
    while left >= tail && pmf.len() + 2 <= max_steps {
        pmf.push(0.0);
        pmf.push(left * c);
        left *= 1.0 - c;
    }
    ExactDistribution::from_pmf(pmf)
}

/// Exact hitting-time law of any strategy, truncated once the uncovered
/// mass drops below `tail` or at `max_steps`.
pub fn strategy_exact(kind: StrategyKind, alpha: CouplingStrength, epsilon: f64, tail: f64, max_steps: usize) -> Result<ExactDistribution> {
    let rule = kind.target_rule(epsilon)?;
    Ok(match kind {
        StrategyKind::Unguided => unguided_exact(alpha, &rule, max_steps, tail),
        StrategyKind::FlipUndo => flip_undo_exact(alpha, tail, max_steps),
        StrategyKind::OneStep(mode) => {
            let chain = one_step_chain(alpha, mode, 1.0 - tail, max_steps)?;
            ExactDistribution::from_success_chain(&chain.iter().map(|c| c.1).collect::<Vec<_>>())
        }
    })
}

/// Half-width of the Dvoretzky–Kiefer–Wolfowitz band for `n` samples at
/// `confidence`.
pub fn dkw_epsilon(n: u64, confidence: f64) -> f64 {
    ((2.0 / (1.0 - confidence)).ln() / (2.0 * n as f64)).sqrt()
}

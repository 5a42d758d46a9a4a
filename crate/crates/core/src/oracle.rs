//! Monte Carlo checks for the stochastic closed forms in [`crate::rates`].
//!
//! Draws use ChaCha8 (`rand_chacha::ChaCha8Rng`). Trials are split into
//! [`SHARDS`] fixed shards; shard `i` uses the master seed on ChaCha stream
//! `i`, and shard sums are merged in shard order, so results are
//! bit-identical for a given `(seed, trials)` regardless of thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{defaults, Wavelength};
use crate::error::{argument, Result};
use crate::rates::{
    decay_expectation, expected_n_max, expected_n_min, ndif_pmf, repeater_rate_bounds, swap_prefactor, ClassicalComms,
    HardwareParams,
};

pub const SHARDS: u64 = 64;

/// Smallest trial count accepted for acceptance comparisons.
pub const MIN_ACCEPTANCE_TRIALS: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub trials: u64,
    pub seed: u64,
    /// Per-attempt success probability of each elementary link.
    pub p: f64,
    pub t0_s: f64,
    pub t1_s: f64,
}

impl TrialConfig {
    pub fn new(trials: u64, seed: u64, p: f64, t0_s: f64, t1_s: f64) -> Result<Self> {
        let cfg = Self { trials, seed, p, t0_s, t1_s };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(argument("trials must be positive"));
        }
        if !(self.p > 0.0 && self.p <= 1.0) {
            return Err(argument(format!("p must lie in (0, 1], got {}", self.p)));
        }
        if !(self.t0_s > 0.0 && self.t1_s > 0.0) {
            return Err(argument("t0_s and t1_s must be positive"));
        }
        Ok(())
    }

    fn decay_per_step(&self) -> f64 {
        (-2.0 * self.t0_s / self.t1_s).exp()
    }
}

/// A sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

impl Estimate {
    fn from_sums(n: f64, sum: f64, sum_sq: f64) -> Self {
        let mean = sum / n;
        let var = ((sum_sq / n - mean * mean) * n / (n - 1.0).max(1.0)).max(0.0);
        Self { mean, stderr: (var / n).sqrt() }
    }

    /// Distance from `value` in standard errors. Zero spread counts as
    /// agreement only on an exact match.
    pub fn sigmas_from(&self, value: f64) -> f64 {
        let d = (self.mean - value).abs();
        if self.stderr == 0.0 {
            if d <= 1e-12 * value.abs().max(1.0) {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            d / self.stderr
        }
    }

    pub fn within_sigmas(&self, value: f64, k: f64) -> bool {
        self.sigmas_from(value) <= k
    }
}

fn shard_rng(seed: u64, shard: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shard);
    rng
}

fn shard_sizes(trials: u64) -> impl Iterator<Item = (u64, u64)> {
    let base = trials / SHARDS;
    let extra = trials % SHARDS;
    (0..SHARDS).map(move |i| (i, base + u64::from(i < extra)))
}

/// Runs `work` once per shard in parallel and returns the per-shard results
/// in shard order.
fn run_shards<T, F>(cfg: &TrialConfig, work: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, u64) -> T + Sync,
{
    let shards: Vec<(u64, u64)> = shard_sizes(cfg.trials).collect();
    shards.into_par_iter().map(|(i, n)| work(&mut shard_rng(cfg.seed, i), n)).collect()
}

/// Attempts up to and including the first success, sampled by inversion:
/// n = ⌈ln U / ln(1 − p)⌉ with U uniform on (0, 1], so P(n > k) = (1 − p)^k.
#[derive(Clone, Copy)]
struct AttemptCounts {
    log_fail: f64,
}

impl AttemptCounts {
    fn sample(&self, rng: &mut ChaCha8Rng) -> u64 {
        if self.log_fail == f64::NEG_INFINITY {
            return 1;
        }
        let u = 1.0 - rng.random::<f64>();
        let n = (u.ln() / self.log_fail).ceil();
        if n < 1.0 {
            1
        } else {
            n as u64
        }
    }
}

fn attempt_counts(p: f64) -> AttemptCounts {
    AttemptCounts { log_fail: (-p).ln_1p() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NdifSample {
    pub trials: u64,
    pub seed: u64,
    /// `counts[n]` is the number of trials with |n_a − n_b| = n.
    pub counts: Vec<u64>,
    /// Estimate of ⟨exp(−2·n_dif·T₀/T₁)⟩.
    pub decay: Estimate,
}

impl NdifSample {
    /// Empirical P(n_dif = n) with its binomial standard error.
    pub fn probability(&self, n: usize) -> Estimate {
        let total = self.trials as f64;
        let p = self.counts.get(n).copied().unwrap_or(0) as f64 / total;
        Estimate { mean: p, stderr: (p * (1.0 - p) / total).sqrt() }
    }
}

/// Draws pairs of independent attempt counts (support starting at 1) and
/// tabulates their difference.
pub fn simulate_ndif(cfg: &TrialConfig) -> Result<NdifSample> {
    cfg.validate()?;
    let dist = attempt_counts(cfg.p);
    let q = cfg.decay_per_step();
    let shards = run_shards(cfg, |rng, n| {
        let mut counts: Vec<u64> = Vec::new();
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for _ in 0..n {
            let a = dist.sample(rng);
            let b = dist.sample(rng);
            let dif = a.abs_diff(b);
            let idx = dif as usize;
            if idx >= counts.len() {
                counts.resize(idx + 1, 0);
            }
            counts[idx] += 1;
            let w = q.powf(dif as f64);
            sum += w;
            sum_sq += w * w;
        }
        (counts, sum, sum_sq)
    });
    let mut counts: Vec<u64> = Vec::new();
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for (c, s, s2) in shards {
        if c.len() > counts.len() {
            counts.resize(c.len(), 0);
        }
        for (acc, v) in counts.iter_mut().zip(c) {
            *acc += v;
        }
        sum += s;
        sum_sq += s2;
    }
    Ok(NdifSample {
        trials: cfg.trials,
        seed: cfg.seed,
        counts,
        decay: Estimate::from_sums(cfg.trials as f64, sum, sum_sq),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderStats {
    pub trials: u64,
    pub seed: u64,
    pub n_min: Estimate,
    pub n_max: Estimate,
}

pub fn simulate_order_stats(cfg: &TrialConfig) -> Result<OrderStats> {
    cfg.validate()?;
    let dist = attempt_counts(cfg.p);
    let shards = run_shards(cfg, |rng, n| {
        let mut s = [0.0f64; 4];
        for _ in 0..n {
            let a = dist.sample(rng);
            let b = dist.sample(rng);
            let (lo, hi) = (a.min(b) as f64, a.max(b) as f64);
            s[0] += lo;
            s[1] += lo * lo;
            s[2] += hi;
            s[3] += hi * hi;
        }
        s
    });
    let mut t = [0.0f64; 4];
    for s in shards {
        for (acc, v) in t.iter_mut().zip(s) {
            *acc += v;
        }
    }
    let n = cfg.trials as f64;
    Ok(OrderStats {
        trials: cfg.trials,
        seed: cfg.seed,
        n_min: Estimate::from_sums(n, t[0], t[1]),
        n_max: Estimate::from_sums(n, t[2], t[3]),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepeaterSample {
    pub trials: u64,
    pub seed: u64,
    /// Mean entanglement distribution time ⟨T_r⟩, seconds.
    pub time_s: Estimate,
    /// 1/⟨T_r⟩, per second.
    pub rate_per_s: f64,
}

/// Renewal simulation of the two-link repeater: each round both links retry
/// until they hold a pair, the earlier link's memories decay while waiting,
/// and a swap is attempted; failed swaps restart the round. Efficiencies
/// come from `hw`; T₀ and T₁ from `cfg`.
pub fn simulate_two_link_repeater(cfg: &TrialConfig, hw: &HardwareParams) -> Result<RepeaterSample> {
    cfg.validate()?;
    hw.validate()?;
    let dist = attempt_counts(cfg.p);
    let q = cfg.decay_per_step();
    let prefactor = swap_prefactor(hw);
    // swap success by attempt-count difference; powf only past the table
    let table: Vec<f64> = (0..256).map(|d| prefactor * q.powi(d)).collect();
    let success = |d: u64| table.get(d as usize).copied().unwrap_or_else(|| prefactor * q.powf(d as f64));
    let shards = run_shards(cfg, |rng, n| {
        // accumulated in units of T₀
        let (mut sum, mut sum_sq) = (0.0f64, 0.0f64);
        for _ in 0..n {
            let mut slots = 0u64;
            loop {
                let a = dist.sample(rng);
                let b = dist.sample(rng);
                slots += a.max(b);
                if rng.random::<f64>() < success(a.abs_diff(b)) {
                    break;
                }
            }
            let s = slots as f64;
            sum += s;
            sum_sq += s * s;
        }
        (sum, sum_sq)
    });
    let (sum, sum_sq) = shards.into_iter().fold((0.0, 0.0), |(a, b), (s, s2)| (a + s, b + s2));
    let slots = Estimate::from_sums(cfg.trials as f64, sum, sum_sq);
    let time_s = Estimate { mean: slots.mean * cfg.t0_s, stderr: slots.stderr * cfg.t0_s };
    Ok(RepeaterSample { trials: cfg.trials, seed: cfg.seed, time_s, rate_per_s: 1.0 / time_s.mean })
}

/// One comparison of a simulated quantity against its closed form. Point
/// checks have `expected_low == expected_high`; the repeater check compares
/// against its bound interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleCheck {
    pub name: String,
    pub expected_low: f64,
    pub expected_high: f64,
    pub estimate: Estimate,
    /// Distance outside the expected interval in standard errors, 0 inside.
    pub sigmas: f64,
    pub pass: bool,
}

impl OracleCheck {
    fn new(name: String, low: f64, high: f64, estimate: Estimate, k: f64) -> Self {
        let sigmas = if estimate.mean < low {
            estimate.sigmas_from(low)
        } else if estimate.mean > high {
            estimate.sigmas_from(high)
        } else {
            0.0
        };
        Self { name, expected_low: low, expected_high: high, estimate, sigmas, pass: sigmas <= k }
    }
}

/// Attempt period used by [`oracle_suite`].
pub const SUITE_T0_S: f64 = 1e-9;

/// Simulates every closed form on a fixed grid: n_dif pmf and decay
/// expectation, order statistics, and the repeater mean time against its
/// bounds (table hardware, T₁ set from the ratio). Each check passes within
/// `k_sigma` standard errors.
pub fn oracle_suite(seed: u64, trials: u64, k_sigma: f64) -> Result<Vec<OracleCheck>> {
    let t0 = SUITE_T0_S;
    let ratios = [1e-4, 1e-2, 1.0];
    let mut out = Vec::new();
    for p in [0.9, 0.5, 0.1, 1e-3] {
        for r in ratios {
            let cfg = TrialConfig::new(trials, seed, p, t0, t0 / r)?;
            let sample = simulate_ndif(&cfg)?;
            let expected = decay_expectation(p, t0, cfg.t1_s)?;
            out.push(OracleCheck::new(format!("decay p={p} T0/T1={r}"), expected, expected, sample.decay, k_sigma));
            if r == 1e-2 && (p == 0.5 || p == 0.1) {
                for n in 0..5u64 {
                    let f = ndif_pmf(p, n);
                    let est = sample.probability(n as usize);
                    out.push(OracleCheck::new(format!("pmf p={p} n={n}"), f, f, est, k_sigma));
                }
            }
        }
    }
    for p in [0.9, 0.5, 0.1] {
        let o = simulate_order_stats(&TrialConfig::new(trials, seed, p, t0, 1e-7)?)?;
        let (lo, hi) = (expected_n_min(p), expected_n_max(p));
        out.push(OracleCheck::new(format!("n_min p={p}"), lo, lo, o.n_min, k_sigma));
        out.push(OracleCheck::new(format!("n_max p={p}"), hi, hi, o.n_max, k_sigma));
    }
    let base = HardwareParams::from_defaults(&defaults(Wavelength::Nm785), 0.05)?;
    let comms = ClassicalComms::new(0.0)?;
    for p in [0.9, 0.5, 0.1] {
        for r in ratios {
            let hw = HardwareParams { rep_rate_hz: 1.0 / t0, t1_s: t0 / r, ..base };
            let bounds = repeater_rate_bounds(&hw, p, &comms)?;
            let sim = simulate_two_link_repeater(&TrialConfig::new(trials, seed, p, t0, hw.t1_s)?, &hw)?;
            let name = format!("repeater time p={p} T0/T1={r}");
            out.push(OracleCheck::new(name, bounds.time_lower_s, bounds.time_upper_s, sim.time_s, k_sigma));
        }
    }
    Ok(out)
}

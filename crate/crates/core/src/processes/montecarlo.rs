//! Reproducible Monte Carlo draws of `Z`.
//!
//! Every uniform is a pure function of `(seed, trial_index, coordinate)`:
//!
//! ```text
//! key   = mix64(mix64(seed + 0x9E3779B97F4A7C15) ^ trial_index)
//! bits  = mix64(key ^ (coordinate + 1) · 0xD1B54A32D192ED03)
//! u     = (bits >> 11) · 2⁻⁵³                               ∈ [0, 1)
//! ```
//!
//! where `mix64` is the SplitMix64 finalizer. Trials can therefore be split
//! across any number of workers without changing a single draw; statistics
//! are merged over fixed-size chunks in chunk order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;
use statrs::function::erf::erfc;

use super::Scenario;
use crate::error::{Error, Result};
use crate::numerics::bisect;

/// One-sided confidence level of tail frequencies, in normal standard deviations.
pub const CONFIDENCE_SIGMAS: f64 = 3.0;
/// Below this many successes the exact Clopper–Pearson bound replaces the
/// normal approximation.
const EXACT_BELOW: u64 = 50;
const CHUNK: usize = 1 << 14;

/// SplitMix64 output function.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The uniform in `[0, 1)` used for `coordinate` in trial `trial_index`.
pub fn trial_uniform(seed: u64, trial_index: u64, coordinate: usize) -> f64 {
    let key = mix64(mix64(seed.wrapping_add(0x9E37_79B9_7F4A_7C15)) ^ trial_index);
    let bits = mix64(key ^ (coordinate as u64 + 1).wrapping_mul(0xD1B5_4A32_D192_ED03));
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// One draw of `Z`; identical for identical `(seed, trial_index)`.
pub fn sample_z(s: &Scenario, seed: u64, trial_index: u64) -> f64 {
    let mut atoms = Vec::with_capacity(s.n());
    for (k, coord) in s.coords().iter().enumerate() {
        let u = trial_uniform(seed, trial_index, k);
        let mut cumulative = 0.0;
        let mut pick = coord.len() - 1;
        for (j, a) in coord.atoms().iter().enumerate() {
            cumulative += a.prob;
            if u < cumulative {
                pick = j;
                break;
            }
        }
        atoms.push(pick);
    }
    s.z_at(&atoms)
}

/// Runs `f` on a pool of `workers` threads, or on the global pool for `None`.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w.max(1))
                .build()
                .map_err(|e| Error::ThreadPool(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

/// Draws for trials `0..trials`, in trial order.
pub fn draw_many(s: &Scenario, trials: u64, seed: u64, workers: Option<usize>) -> Result<Vec<f64>> {
    with_workers(workers, || {
        (0..trials).into_par_iter().map(|t| sample_z(s, seed, t)).collect()
    })
}

/// Streaming central moments up to order four; `merge` is exact algebra
/// (Chan/Pébay), so any partition of the data gives the same moments up to
/// rounding, and a fixed partition gives identical bits.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
    pub m3: f64,
    pub m4: f64,
}

impl Moments {
    pub fn from_slice(xs: &[f64]) -> Self {
        xs.iter().fold(Self::default(), |mut acc, &x| {
            acc.push(x);
            acc
        })
    }

    pub fn push(&mut self, x: f64) {
        let n1 = self.count as f64;
        self.count += 1;
        let n = self.count as f64;
        let delta = x - self.mean;
        let delta_n = delta / n;
        let delta_n2 = delta_n * delta_n;
        let term1 = delta * delta_n * n1;
        self.mean += delta_n;
        self.m4 += term1 * delta_n2 * (n * n - 3.0 * n + 3.0) + 6.0 * delta_n2 * self.m2 - 4.0 * delta_n * self.m3;
        self.m3 += term1 * delta_n * (n - 2.0) - 3.0 * delta_n * self.m2;
        self.m2 += term1;
    }

    pub fn merge(&self, other: &Self) -> Self {
        if self.count == 0 {
            return *other;
        }
        if other.count == 0 {
            return *self;
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        let delta = other.mean - self.mean;
        let d2 = delta * delta;
        let mean = self.mean + delta * nb / n;
        let m2 = self.m2 + other.m2 + d2 * na * nb / n;
        let m3 = self.m3
            + other.m3
            + d2 * delta * na * nb * (na - nb) / (n * n)
            + 3.0 * delta * (na * other.m2 - nb * self.m2) / n;
        let m4 = self.m4
            + other.m4
            + d2 * d2 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n)
            + 6.0 * d2 * (na * na * other.m2 + nb * nb * self.m2) / (n * n)
            + 4.0 * delta * (na * other.m3 - nb * self.m3) / n;
        Self {
            count: self.count + other.count,
            mean,
            m2,
            m3,
            m4,
        }
    }

    /// Unbiased sample variance (0 for a single observation).
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn mean_se(&self) -> Option<f64> {
        (self.count >= 2).then(|| (self.variance() / self.count as f64).sqrt())
    }

    /// Standard error of the variance estimate from
    /// `Var(s²) = (μ₄ − σ⁴)/n + 2σ⁴/(n(n − 1))`. The plug-in `μ₄ − σ⁴` is
    /// clamped at 0; the second term keeps the error positive when `(X − μ)²`
    /// is constant, as for two symmetric atoms.
    pub fn variance_se(&self) -> Option<f64> {
        (self.count >= 2).then(|| {
            let n = self.count as f64;
            let mu4 = self.m4 / n;
            let s4 = self.variance() * self.variance();
            ((mu4 - s4).max(0.0) / n + 2.0 * s4 / (n * (n - 1.0))).sqrt()
        })
    }
}

/// Frequency of a tail event with its one-sided lower confidence bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub threshold: f64,
    pub successes: u64,
    pub frequency: f64,
    /// `frequency − lower_confidence`
    pub radius: f64,
    pub lower_confidence: f64,
}

impl TailEstimate {
    pub fn from_count(threshold: f64, successes: u64, trials: u64) -> Self {
        let frequency = successes as f64 / trials as f64;
        let lower_confidence = lower_confidence_bound(successes, trials);
        Self {
            threshold,
            successes,
            frequency,
            radius: frequency - lower_confidence,
            lower_confidence,
        }
    }
}

fn one_sided_alpha() -> f64 {
    0.5 * erfc(CONFIDENCE_SIGMAS / std::f64::consts::SQRT_2)
}

/// Lower confidence bound for a binomial proportion: Clopper–Pearson when
/// successes are few, `p̂ − 3√(p̂(1 − p̂)/n)` otherwise.
pub fn lower_confidence_bound(successes: u64, trials: u64) -> f64 {
    if successes == 0 || trials == 0 {
        return 0.0;
    }
    let n = trials as f64;
    let k = successes as f64;
    let p_hat = k / n;
    if successes < EXACT_BELOW {
        // P(Bin(n, p) ≥ k) = I_p(k, n − k + 1); solve for = α
        let alpha = one_sided_alpha();
        let g = |p: f64| beta_reg(k, n - k + 1.0, p) - alpha;
        return bisect(g, 0.0, p_hat, 1e-15).unwrap_or(0.0);
    }
    (p_hat - CONFIDENCE_SIGMAS * (p_hat * (1.0 - p_hat) / n).sqrt()).max(0.0)
}

/// Monte Carlo summary of `Z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub trials: u64,
    pub seed: u64,
    pub mean_z: f64,
    pub mean_se: Option<f64>,
    pub var_z: f64,
    pub var_se: Option<f64>,
    pub median_z: f64,
    pub median_se: Option<f64>,
    /// Estimates of `P(Z ≥ threshold)`.
    pub tails: Vec<TailEstimate>,
}

impl SimResult {
    pub fn from_draws(draws: &[f64], seed: u64, thresholds: &[f64]) -> Result<Self> {
        if draws.is_empty() {
            return Err(Error::Domain {
                op: "estimate_stats",
                detail: "trials must be at least 1".into(),
            });
        }
        let moments = draws
            .par_chunks(CHUNK)
            .map(Moments::from_slice)
            .collect::<Vec<_>>()
            .iter()
            .fold(Moments::default(), |acc, m| acc.merge(m));
        let trials = draws.len() as u64;
        let mut sorted = draws.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let median_z = sorted[(n - 1) / 2];
        let median_se = (n >= 2).then(|| {
            let half = (n as f64).sqrt() / 2.0;
            let lo = ((n as f64 / 2.0 - half).floor().max(0.0)) as usize;
            let hi = ((n as f64 / 2.0 + half).ceil() as usize).min(n - 1);
            (sorted[hi] - sorted[lo]) / 2.0
        });
        let tails = thresholds
            .iter()
            .map(|&a| {
                let cut = a - 1e-12 * a.abs().max(1.0);
                let first = sorted.partition_point(|&z| z < cut);
                TailEstimate::from_count(a, (n - first) as u64, trials)
            })
            .collect();
        Ok(Self {
            trials,
            seed,
            mean_z: moments.mean,
            mean_se: moments.mean_se(),
            var_z: moments.variance(),
            var_se: moments.variance_se(),
            median_z,
            median_se,
            tails,
        })
    }
}

/// Monte Carlo estimates of `E(Z)`, `Var Z`, the median, and `P(Z ≥ a)` for
/// each threshold `a`. Output is independent of `workers`.
pub fn estimate_stats(
    s: &Scenario,
    trials: u64,
    seed: u64,
    thresholds: &[f64],
    workers: Option<usize>,
) -> Result<SimResult> {
    if trials == 0 {
        return Err(Error::Domain {
            op: "estimate_stats",
            detail: "trials must be at least 1".into(),
        });
    }
    let draws = draw_many(s, trials, seed, workers)?;
    with_workers(workers, || SimResult::from_draws(&draws, seed, thresholds))?
}

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::Scenario;
use crate::error::{Error, Result};

/// Default cap on the product-space size walked by [`enumerate_exact`].
pub const DEFAULT_ENUMERATION_CAP: u128 = 20_000_000;

// Thresholds within this (relative) distance of an atom of Z count as hit,
// so float noise in E(Z) can only enlarge a tail event.
const TIE_TOL: f64 = 1e-12;

/// Exact law of `Z` obtained by walking every outcome of the product space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactSummary {
    pub mean_z: f64,
    pub var_z: f64,
    /// Lower median: the smallest atom with `P(Z ≤ m) ≥ 1/2`.
    pub median_z: f64,
    /// `E max_i Σ_k s_i^k(X_k)²`
    pub talagrand_v: f64,
    pub outcomes: u128,
    pub support_size: usize,
    /// Atoms of `Z` in increasing order with their probabilities.
    pub distribution: Vec<(f64, f64)>,
}

impl ExactSummary {
    pub fn min_z(&self) -> f64 {
        self.distribution[0].0
    }

    pub fn max_z(&self) -> f64 {
        self.distribution[self.distribution.len() - 1].0
    }

    /// `P(Z ≥ a)`, ties within rounding included.
    pub fn upper_tail(&self, a: f64) -> f64 {
        let cut = a - TIE_TOL * a.abs().max(1.0);
        self.distribution
            .iter()
            .filter(|(z, _)| *z >= cut)
            .map(|(_, p)| p)
            .sum::<f64>()
            .min(1.0)
    }

    /// `P(Z ≤ a)`, ties within rounding included.
    pub fn lower_tail(&self, a: f64) -> f64 {
        let cut = a + TIE_TOL * a.abs().max(1.0);
        self.distribution
            .iter()
            .filter(|(z, _)| *z <= cut)
            .map(|(_, p)| p)
            .sum::<f64>()
            .min(1.0)
    }

    /// `(threshold, P(Z ≥ threshold))` for each requested threshold.
    pub fn tail(&self, thresholds: &[f64]) -> Vec<(f64, f64)> {
        thresholds.iter().map(|&a| (a, self.upper_tail(a))).collect()
    }

    /// `log E e^{t(Z − E(Z))}`, evaluated as `log1p(Σ p·expm1(t(z − E)))`
    /// so that small `t` keeps full relative precision.
    pub fn centered_log_mgf(&self, t: f64) -> f64 {
        let shifts: Vec<f64> = self.distribution.iter().map(|(z, _)| t * (z - self.mean_z)).collect();
        let top = shifts.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if top < 1.0 {
            let s: f64 = self
                .distribution
                .iter()
                .zip(&shifts)
                .map(|((_, p), u)| p * u.exp_m1())
                .sum();
            s.ln_1p()
        } else {
            let s: f64 = self
                .distribution
                .iter()
                .zip(&shifts)
                .map(|((_, p), u)| p * (u - top).exp())
                .sum();
            top + s.ln()
        }
    }

    /// `L(t) = log E e^{tZ}` for any real `t`.
    pub fn log_laplace(&self, t: f64) -> f64 {
        t * self.mean_z + self.centered_log_mgf(t)
    }
}

/// Size of the product space, saturating at `u128::MAX`.
pub fn outcome_count(s: &Scenario) -> u128 {
    s.coords()
        .iter()
        .try_fold(1u128, |acc, c| acc.checked_mul(c.len() as u128))
        .unwrap_or(u128::MAX)
}

pub fn enumerate_exact(s: &Scenario) -> Result<ExactSummary> {
    enumerate_exact_with_cap(s, DEFAULT_ENUMERATION_CAP)
}

/// Walks the product space depth-first, keeping per-level partial sums so
/// each outcome costs `O(m)`. Only the law of `Z` is retained.
pub fn enumerate_exact_with_cap(s: &Scenario, cap: u128) -> Result<ExactSummary> {
    let outcomes = outcome_count(s);
    if outcomes > cap {
        return Err(Error::EnumerationCap {
            required: outcomes,
            cap,
        });
    }
    let (n, m) = (s.n(), s.m());
    let mut walker = Walker {
        s,
        sums: vec![0.0; (n + 1) * m],
        squares: vec![0.0; (n + 1) * m],
        law: HashMap::new(),
        talagrand_v: 0.0,
    };
    walker.descend(0, 1.0);

    let mut distribution: Vec<(f64, f64)> = walker
        .law
        .into_iter()
        .map(|(bits, p)| (f64::from_bits(bits), p))
        .collect();
    distribution.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mean_z: f64 = distribution.iter().map(|(z, p)| z * p).sum();
    let var_z: f64 = distribution.iter().map(|(z, p)| p * (z - mean_z) * (z - mean_z)).sum();
    let mut cumulative = 0.0;
    let mut median_z = distribution[distribution.len() - 1].0;
    for &(z, p) in &distribution {
        cumulative += p;
        if cumulative >= 0.5 - 1e-12 {
            median_z = z;
            break;
        }
    }
    Ok(ExactSummary {
        mean_z,
        var_z,
        median_z,
        talagrand_v: walker.talagrand_v,
        outcomes,
        support_size: distribution.len(),
        distribution,
    })
}

/// Talagrand's variance factor `V = E max_i Σ_k s_i^k(X_k)²`.
pub fn compute_talagrand_v(s: &Scenario) -> Result<f64> {
    Ok(enumerate_exact(s)?.talagrand_v)
}

struct Walker<'a> {
    s: &'a Scenario,
    // level-major: sums[level * m + i] is Σ_{k < level} s_i^k
    sums: Vec<f64>,
    squares: Vec<f64>,
    law: HashMap<u64, f64>,
    talagrand_v: f64,
}

impl Walker<'_> {
    fn descend(&mut self, level: usize, prob: f64) {
        let m = self.s.m();
        if level == self.s.n() {
            let row = &self.sums[level * m..(level + 1) * m];
            let z = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            // fold -0.0 into 0.0 so equal atoms share one key
            let z = if z == 0.0 { 0.0 } else { z };
            *self.law.entry(z.to_bits()).or_insert(0.0) += prob;
            let sq = self.squares[level * m..(level + 1) * m]
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max);
            self.talagrand_v += prob * sq;
            return;
        }
        let coord = &self.s.coords()[level];
        for (j, atom) in coord.atoms().iter().enumerate() {
            for i in 0..m {
                let v = self.s.values(i, level)[j];
                self.sums[(level + 1) * m + i] = self.sums[level * m + i] + v;
                self.squares[(level + 1) * m + i] = self.squares[level * m + i] + v * v;
            }
            self.descend(level + 1, prob * atom.prob);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::processes::{build_rademacher, build_set_indexed, compute_Vn, CoordinateDist};
    use approx::assert_abs_diff_eq;

    #[test]
    fn single_row_signs() {
        let s = build_rademacher(&[vec![1.0, 1.0]], None).unwrap();
        let e = enumerate_exact(&s).unwrap();
        assert_eq!(e.outcomes, 4);
        assert_eq!(e.distribution, vec![(-2.0, 0.25), (0.0, 0.5), (2.0, 0.25)]);
        assert_eq!(e.mean_z, 0.0);
        assert_eq!(e.var_z, 2.0);
        assert_eq!(e.median_z, 0.0);
        assert_eq!(e.upper_tail(2.0), 0.25);
        assert_eq!(e.lower_tail(-2.0), 0.25);
        // symmetric signs: V = V_n
        assert_eq!(e.talagrand_v, compute_Vn(&s));
    }

    #[test]
    fn absolute_value_of_sum() {
        let s = build_rademacher(&[vec![1.0, 1.0], vec![-1.0, -1.0]], None).unwrap();
        let e = enumerate_exact(&s).unwrap();
        assert_eq!(e.mean_z, 1.0);
        assert_eq!(e.var_z, 1.0);
        assert_eq!(e.distribution, vec![(0.0, 0.5), (2.0, 0.5)]);
        assert_eq!(e.lower_tail(0.0), 0.5);
    }

    #[test]
    fn zero_class_is_point_mass() {
        let s =
            crate::processes::Scenario::new(vec![CoordinateDist::signs(); 2], vec![vec![vec![0.0, 0.0]; 2]]).unwrap();
        let e = enumerate_exact(&s).unwrap();
        assert_eq!(e.distribution, vec![(0.0, 1.0)]);
        assert_eq!(e.talagrand_v, 0.0);
        assert_eq!(e.log_laplace(0.7), 0.0);
    }

    #[test]
    fn set_indexed_talagrand_factor() {
        let s = build_set_indexed(2, &[vec![0.5, 0.5]], &[vec![1]]).unwrap();
        let e = enumerate_exact(&s).unwrap();
        assert_abs_diff_eq!(e.talagrand_v, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(compute_talagrand_v(&s).unwrap(), 0.25, epsilon = 1e-15);
    }

    #[test]
    fn exact_log_laplace() {
        let s = build_rademacher(&[vec![1.0, 1.0]], None).unwrap();
        let e = enumerate_exact(&s).unwrap();
        let expected = ((-1.0f64).exp() + 2.0 + 1.0f64.exp()) / 4.0;
        assert_abs_diff_eq!(e.log_laplace(0.5), expected.ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(e.log_laplace(-0.5), expected.ln(), epsilon = 1e-15);
        assert_eq!(e.log_laplace(0.0), 0.0);
        // large t takes the shifted branch
        let big: f64 = 40.0;
        let direct = (0.25 * (-2.0 * big).exp() + 0.5 + 0.25 * (2.0 * big).exp()).ln();
        assert!((e.log_laplace(big) - direct).abs() < 1e-12);
    }

    #[test]
    fn cap_is_enforced() {
        let s = build_rademacher(&[vec![1.0; 30]], None).unwrap();
        match enumerate_exact(&s).unwrap_err() {
            Error::EnumerationCap { required, cap } => {
                assert_eq!(required, 1u128 << 30);
                assert_eq!(cap, DEFAULT_ENUMERATION_CAP);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(enumerate_exact_with_cap(&build_rademacher(&[vec![1.0; 3]], None).unwrap(), 8).is_ok());
    }
}

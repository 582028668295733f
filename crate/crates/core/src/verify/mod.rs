//! Certification of the bounds against exact and Monte Carlo oracles, and
//! grid checks of the scalar inequalities behind them.
//!
//! Exact-mode reports are authoritative. Monte Carlo reports are always
//! marked advisory: when `E(Z)` is estimated, both the bound and the tail
//! threshold move with the estimate.

mod lemmas;
mod report;

pub use lemmas::{
    check_legendre_equivalence, check_lemma44, check_lemma_inequalities, check_roots, entropy_check_distributions,
    lemma_suite, series_coefficient, DEFAULT_GRID_POINTS, LEGENDRE_X_MAX, MIN_GRID_POINTS, SERIES_MAX_INDEX,
};
pub use report::{CheckReport, ReportBuilder, ViolationRecord, EXACT_TOL, MAX_LISTED_VIOLATIONS, NUMERIC_TOL};

use crate::bound_functions::{BoundConstants, BoundParams, Side, TailForm};
use crate::error::{domain, Error, Result};
use crate::numerics::{prop42_left_log_laplace, solve_t0};
use crate::processes::{
    compute_Vn, draw_many, enumerate_exact_with_cap, outcome_count, validate, with_workers, ExactSummary, Scenario,
    SimResult, TailEstimate, DEFAULT_ENUMERATION_CAP,
};

/// Agreement radius, in standard errors, between Monte Carlo and exact moments.
pub const AGREEMENT_SIGMAS: f64 = 4.0;

fn require_nonneg_grid(op: &'static str, name: &str, grid: &[f64]) -> Result<()> {
    match grid.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
        Some(v) => Err(domain(op, format!("{name} values must be finite and >= 0, got {v}"))),
        None => Ok(()),
    }
}

fn grid_label(name: &str, grid: &[f64]) -> String {
    match (grid.first(), grid.last()) {
        (Some(a), Some(b)) => format!("{} {name} in [{a}, {b}]", grid.len()),
        _ => format!("no {name}"),
    }
}

fn scenario_label(s: &Scenario) -> String {
    format!("n = {}, m = {}", s.n(), s.m())
}

/// Exact law of `Z` together with the weak variance `V_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactOracle {
    pub summary: ExactSummary,
    pub v_n: f64,
    pub label: String,
}

impl ExactOracle {
    pub fn new(s: &Scenario) -> Result<Self> {
        Self::with_cap(s, DEFAULT_ENUMERATION_CAP)
    }

    pub fn with_cap(s: &Scenario, cap: u128) -> Result<Self> {
        Ok(Self {
            summary: enumerate_exact_with_cap(s, cap)?,
            v_n: compute_Vn(s),
            label: scenario_label(s),
        })
    }

    /// `(E(Z), V_n)`, or `None` when `V_n + 2E(Z) = 0` and `Z ≡ 0`.
    fn params(&self) -> Option<BoundParams> {
        BoundParams::new(self.summary.mean_z.max(0.0), self.v_n)
            .ok()
            .filter(|p| p.v() > 0.0)
    }
}

/// Every tail form on both sides against the exact tails at `E(Z) ± x`.
pub fn check_tail_bounds_exact(o: &ExactOracle, x_grid: &[f64], c: &BoundConstants) -> Result<CheckReport> {
    require_nonneg_grid("check_tail_bounds", "x", x_grid)?;
    let mut b = ReportBuilder::new(
        "tail bounds",
        format!("{}, {}, exact", o.label, grid_label("x", x_grid)),
        EXACT_TOL,
    );
    let Some(p) = o.params() else {
        b.note("v = 0: Z is degenerate, tail checks skipped");
        return Ok(b.finish());
    };
    let mean = o.summary.mean_z;
    b.value("mean_z", mean);
    b.value("v_n", o.v_n);
    b.value("v", c.variance_factor(&p));
    for &x in x_grid {
        let upper = o.summary.upper_tail(mean + x);
        let lower = o.summary.lower_tail(mean - x);
        for form in TailForm::ALL {
            for (side, exact) in [(Side::Upper, upper), (Side::Lower, lower)] {
                let bound = c.tail(x, &p, form, side)?;
                b.dominates(bound, exact, || {
                    format!("{side} {form} at x = {x}: bound {bound}, exact {exact}")
                });
            }
        }
    }
    Ok(b.finish())
}

/// Monte Carlo draws of `Z`, sorted, plus their summary statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct McSample {
    pub sorted: Vec<f64>,
    pub sim: SimResult,
    pub label: String,
}

impl McSample {
    pub fn draw(s: &Scenario, trials: u64, seed: u64, workers: Option<usize>) -> Result<Self> {
        if trials == 0 {
            return Err(domain("monte_carlo", "trials must be at least 1"));
        }
        let draws = draw_many(s, trials, seed, workers)?;
        let sim = with_workers(workers, || SimResult::from_draws(&draws, seed, &[]))??;
        let mut sorted = draws;
        sorted.sort_by(f64::total_cmp);
        Ok(Self {
            sorted,
            sim,
            label: format!("{}, {trials} trials, seed {seed}", scenario_label(s)),
        })
    }

    fn tie(a: f64) -> f64 {
        1e-12 * a.abs().max(1.0)
    }

    /// Estimate of `P(Z ≥ a)`, ties within rounding included.
    pub fn upper(&self, a: f64) -> TailEstimate {
        let first = self.sorted.partition_point(|&z| z < a - Self::tie(a));
        TailEstimate::from_count(a, (self.sorted.len() - first) as u64, self.sorted.len() as u64)
    }

    /// Estimate of `P(Z ≤ a)`, ties within rounding included.
    pub fn lower(&self, a: f64) -> TailEstimate {
        let count = self.sorted.partition_point(|&z| z <= a + Self::tie(a));
        TailEstimate::from_count(a, count as u64, self.sorted.len() as u64)
    }
}

/// Tail bounds against the one-sided lower confidence bounds of simulated
/// frequencies. `params` fixes `(E(Z), V_n)` when they are known exactly;
/// otherwise the simulated mean is plugged in. Always advisory.
pub fn check_tail_bounds_mc(
    mc: &McSample,
    v_n: f64,
    params: Option<BoundParams>,
    x_grid: &[f64],
    c: &BoundConstants,
) -> Result<CheckReport> {
    require_nonneg_grid("check_tail_bounds", "x", x_grid)?;
    let mut b = ReportBuilder::new(
        "tail bounds",
        format!("{}, {}, monte carlo", mc.label, grid_label("x", x_grid)),
        0.0,
    )
    .advisory(true);
    let p = match params {
        Some(p) => {
            b.note("E(Z) and V_n exact; frequencies from simulation");
            p
        }
        None => {
            b.note("E(Z) estimated by simulation and plugged into v and the threshold");
            BoundParams::new(mc.sim.mean_z.max(0.0), v_n)?
        }
    };
    b.value("mean_z", p.mean_z());
    b.value("v_n", p.v_n());
    if !(c.variance_factor(&p) > 0.0) {
        b.note("v = 0: Z is degenerate, tail checks skipped");
        return Ok(b.finish());
    }
    let mean = p.mean_z();
    for &x in x_grid {
        let upper = mc.upper(mean + x);
        let lower = mc.lower(mean - x);
        for form in TailForm::ALL {
            for (side, est) in [(Side::Upper, upper), (Side::Lower, lower)] {
                let bound = c.tail(x, &p, form, side)?;
                b.dominates(bound, est.lower_confidence, || {
                    format!(
                        "{side} {form} at x = {x}: bound {bound}, frequency {} (lower confidence {})",
                        est.frequency, est.lower_confidence
                    )
                });
            }
        }
    }
    Ok(b.finish())
}

/// Simulated mean and variance within [`AGREEMENT_SIGMAS`] standard errors
/// of the exact ones. Advisory.
pub fn check_mc_agreement(o: &ExactOracle, mc: &McSample) -> CheckReport {
    let mut b = ReportBuilder::new("monte carlo agreement with enumeration", mc.label.clone(), 0.0).advisory(true);
    let sim = &mc.sim;
    b.value("exact_mean_z", o.summary.mean_z);
    b.value("mc_mean_z", sim.mean_z);
    b.value("exact_var_z", o.summary.var_z);
    b.value("mc_var_z", sim.var_z);
    for (name, exact, est, se) in [
        ("mean", o.summary.mean_z, sim.mean_z, sim.mean_se),
        ("variance", o.summary.var_z, sim.var_z, sim.var_se),
    ] {
        match se {
            Some(se) => {
                b.value(format!("{name}_se"), se);
                // a point mass has zero standard error; allow rounding only
                let radius = (AGREEMENT_SIGMAS * se).max(1e-12 * exact.abs().max(1.0));
                b.record(radius - (est - exact).abs(), || {
                    format!("{name}: simulated {est}, exact {exact}, radius {radius}")
                });
            }
            None => b.note(format!("{name}: too few trials for a standard error")),
        }
    }
    b.finish()
}

/// Exact `L(t) = log E e^{tZ}` and `L(−t) + tE(Z)` against every log-Laplace
/// bound on its domain. One report per bound.
pub fn check_log_laplace_bounds(o: &ExactOracle, t_grid: &[f64], c: &BoundConstants) -> Result<Vec<CheckReport>> {
    require_nonneg_grid("check_log_laplace_bounds", "t", t_grid)?;
    let e = &o.summary;
    let label = |domain: &str| format!("{}, {}, {domain}", o.label, grid_label("t", t_grid));
    let mut upper = ReportBuilder::new("upper log-Laplace bound", label("all t"), EXACT_TOL);
    let t_max = c.rational_t_max();
    let mut rational = ReportBuilder::new("rational log-Laplace bound", label(&format!("t < {t_max}")), EXACT_TOL);
    let mut lower = ReportBuilder::new("lower log-Laplace bound", label("all t"), EXACT_TOL);
    let t0 = solve_t0();
    let mut integral = ReportBuilder::new(
        "integral lower log-Laplace bound",
        label(&format!("t <= t0 = {t0}")),
        NUMERIC_TOL,
    );
    let Some(p) = o.params() else {
        for b in [&mut upper, &mut rational, &mut lower, &mut integral] {
            b.note("v = 0: Z is degenerate, log-Laplace checks skipped");
        }
        return Ok(vec![
            upper.finish(),
            rational.finish(),
            lower.finish(),
            integral.finish(),
        ]);
    };
    for &t in t_grid {
        let right = e.log_laplace(t);
        let left = e.log_laplace(-t) + t * e.mean_z;
        let bound = c.upper_log_laplace(t, &p)?;
        if bound.saturated {
            upper.note(format!("t = {t}: bound exceeds the double range"));
        }
        upper.dominates(bound.value, right, || {
            format!("t = {t}: bound {}, exact {right}", bound.value)
        });
        if t < t_max {
            let bound = c.rational_log_laplace(t, &p)?;
            rational.dominates(bound, right, || format!("t = {t}: bound {bound}, exact {right}"));
        }
        let bound = c.lower_log_laplace(t, &p)?;
        lower.dominates(bound.value, left, || {
            format!("t = {t}: bound {}, exact {left}", bound.value)
        });
        if t <= t0 {
            let bound = prop42_left_log_laplace(t, p.mean_z(), p.v_n())?;
            integral.dominates(bound, left, || format!("t = {t}: bound {bound}, exact {left}"));
        }
    }
    Ok(vec![
        upper.finish(),
        rational.finish(),
        lower.finish(),
        integral.finish(),
    ])
}

/// `Var Z ≤ v` and `V_n ≤ V ≤ V_n + 16E(Z)` for Talagrand's `V`.
pub fn check_variance_bound(o: &ExactOracle, c: &BoundConstants) -> CheckReport {
    let e = &o.summary;
    let mut b = ReportBuilder::new("variance bound", format!("{}, exact", o.label), EXACT_TOL);
    let mean = e.mean_z.max(0.0);
    let v = c.variance_vn_coeff * o.v_n + c.variance_mean_coeff * mean;
    b.value("var_z", e.var_z);
    b.value("v", v);
    b.value("v_n", o.v_n);
    b.value("talagrand_v", e.talagrand_v);
    b.dominates(v, e.var_z, || format!("Var Z = {} above v = {v}", e.var_z));
    b.dominates(e.talagrand_v, o.v_n, || {
        format!("V = {} below V_n = {}", e.talagrand_v, o.v_n)
    });
    let cap = o.v_n + c.talagrand_mean_coeff * mean;
    b.dominates(cap, e.talagrand_v, || {
        format!("V = {} above V_n + 16 E(Z) = {cap}", e.talagrand_v)
    });
    b.finish()
}

/// All exact-mode reports for one scenario.
pub fn certify_exact(o: &ExactOracle, x_grid: &[f64], t_grid: &[f64], c: &BoundConstants) -> Result<Vec<CheckReport>> {
    let mut out = vec![check_tail_bounds_exact(o, x_grid, c)?];
    out.extend(check_log_laplace_bounds(o, t_grid, c)?);
    out.push(check_variance_bound(o, c));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertifyMode {
    /// Exact when the product space fits under the cap, Monte Carlo otherwise.
    Auto,
    Exact,
    MonteCarlo,
}

impl std::str::FromStr for CertifyMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "auto" => Ok(Self::Auto),
            "exact" => Ok(Self::Exact),
            "mc" => Ok(Self::MonteCarlo),
            other => Err(format!("unknown mode '{other}' (expected auto, exact, mc)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertifyOptions {
    pub mode: CertifyMode,
    pub x_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    pub workers: Option<usize>,
    pub constants: BoundConstants,
    pub enumeration_cap: u128,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            mode: CertifyMode::Auto,
            x_grid: (0..50).map(|i| 0.1 * i as f64).collect(),
            t_grid: (0..=60).map(|i| 0.05 * i as f64).collect(),
            trials: 100_000,
            seed: 0,
            workers: None,
            constants: BoundConstants::default(),
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
        }
    }
}

/// Validates `s`, then runs exact certification (authoritative) or Monte
/// Carlo certification (advisory) according to `opts.mode`. In Monte Carlo
/// mode an enumerable scenario also gets an agreement report.
pub fn certify_scenario(s: &Scenario, opts: &CertifyOptions) -> Result<Vec<CheckReport>> {
    if let Some(v) = validate(s).first() {
        return Err(Error::Scenario(v.to_string()));
    }
    let enumerable = outcome_count(s) <= opts.enumeration_cap;
    let exact = match opts.mode {
        CertifyMode::Exact => true,
        CertifyMode::Auto => enumerable,
        CertifyMode::MonteCarlo => false,
    };
    let c = &opts.constants;
    if exact {
        let o = ExactOracle::with_cap(s, opts.enumeration_cap)?;
        return certify_exact(&o, &opts.x_grid, &opts.t_grid, c);
    }
    let mc = McSample::draw(s, opts.trials, opts.seed, opts.workers)?;
    let oracle = if enumerable {
        Some(ExactOracle::with_cap(s, opts.enumeration_cap)?)
    } else {
        None
    };
    let params = oracle.as_ref().and_then(ExactOracle::params);
    let mut out = vec![check_tail_bounds_mc(&mc, compute_Vn(s), params, &opts.x_grid, c)?];
    if let Some(o) = &oracle {
        out.push(check_mc_agreement(o, &mc));
    } else {
        let mut b = ReportBuilder::new("monte carlo agreement with enumeration", mc.label.clone(), 0.0).advisory(true);
        b.note(format!(
            "not enumerable: {} outcomes exceed the cap {}",
            outcome_count(s),
            opts.enumeration_cap
        ));
        out.push(b.finish());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bound_functions::ConstantId;
    use crate::processes::{build_rademacher, build_set_indexed, CoordinateDist};
    use approx::assert_abs_diff_eq;

    fn oracle(zeta: &[Vec<f64>]) -> ExactOracle {
        ExactOracle::new(&build_rademacher(zeta, None).unwrap()).unwrap()
    }

    fn all_pass(reports: &[CheckReport]) -> bool {
        reports.iter().all(|r| r.pass)
    }

    #[test]
    fn zero_scenario_passes_trivially() {
        let s = Scenario::new(vec![CoordinateDist::signs(); 2], vec![vec![vec![0.0, 0.0]; 2]]).unwrap();
        let reports = certify_scenario(&s, &CertifyOptions::default()).unwrap();
        assert!(all_pass(&reports));
        assert!(reports[0].notes.iter().any(|n| n.contains("degenerate")));
    }

    #[test]
    fn sign_examples() {
        let o = oracle(&[vec![1.0, 1.0]]);
        let r = check_tail_bounds_exact(&o, &[2.0], &BoundConstants::default()).unwrap();
        assert!(r.pass);
        // the c-simple upper bound exp(−4/10) ≈ 0.670 against P(Z ≥ 2) = 0.25 is one of the margins
        assert!(r.worst_margin <= (-0.4f64).exp() - 0.25 + 1e-15);

        let o = oracle(&[vec![1.0, 1.0], vec![-1.0, -1.0]]);
        assert_eq!(o.summary.lower_tail(0.0), 0.5);
        let r = check_tail_bounds_exact(&o, &[1.0], &BoundConstants::default()).unwrap();
        assert!(r.pass);
        let v = check_variance_bound(&o, &BoundConstants::default());
        assert!(v.pass);
        assert_abs_diff_eq!(v.values["v"] - v.values["var_z"], 3.0, epsilon = 1e-15);
    }

    #[test]
    fn log_laplace_examples() {
        let o = oracle(&[vec![1.0, 1.0], vec![-1.0, -1.0]]);
        let reports = check_log_laplace_bounds(&o, &[0.0, 0.3, 0.5, 1.0, 2.0], &BoundConstants::default()).unwrap();
        assert_eq!(reports.len(), 4);
        assert!(all_pass(&reports), "{reports:?}");
        // the t = 0 point makes every margin at most zero
        for r in &reports {
            assert!(r.worst_margin.abs() < 1e-15, "{r:?}");
        }
    }

    #[test]
    fn single_function_variance_is_an_equality() {
        let o = oracle(&[vec![0.5, 1.0, 0.25]]);
        let r = check_variance_bound(&o, &BoundConstants::default());
        assert!(r.pass);
        assert!(r.worst_margin.abs() < 1e-14);
        let tightened = BoundConstants::default().perturbed(ConstantId::VarianceVnCoeff, -0.05);
        assert!(!check_variance_bound(&o, &tightened).pass);
    }

    #[test]
    fn tightened_laplace_scale_is_caught() {
        let o = oracle(&[vec![1.0, 0.5]]);
        let grid: Vec<f64> = (0..=40).map(|i| 0.01 * i as f64).collect();
        let c = BoundConstants::default().perturbed(ConstantId::UpperLaplaceScale, -0.05);
        let reports = check_log_laplace_bounds(&o, &grid, &c).unwrap();
        assert!(!reports[0].pass);
        let c = BoundConstants::default().perturbed(ConstantId::UpperLaplaceScale, 0.05);
        assert!(all_pass(&check_log_laplace_bounds(&o, &grid, &c).unwrap()));
    }

    #[test]
    fn set_indexed_certifies() {
        let s = build_set_indexed(3, &[vec![0.2, 0.3, 0.5], vec![0.6, 0.2, 0.2]], &[vec![0], vec![1, 2]]).unwrap();
        assert!(all_pass(&certify_scenario(&s, &CertifyOptions::default()).unwrap()));
    }

    #[test]
    fn monte_carlo_mode_is_advisory_and_agrees() {
        let s = build_rademacher(&[vec![1.0, 1.0], vec![-1.0, -1.0]], None).unwrap();
        let opts = CertifyOptions {
            mode: CertifyMode::MonteCarlo,
            trials: 20_000,
            seed: 3,
            workers: Some(2),
            ..CertifyOptions::default()
        };
        let reports = certify_scenario(&s, &opts).unwrap();
        assert_eq!(reports.len(), 2);
        assert!(reports.iter().all(|r| r.advisory && r.pass), "{reports:?}");
    }

    #[test]
    fn mc_tail_counts_include_ties() {
        let s = build_rademacher(&[vec![1.0, 1.0]], None).unwrap();
        let mc = McSample::draw(&s, 4000, 1, Some(1)).unwrap();
        let (up, low) = (mc.upper(2.0), mc.lower(-2.0));
        assert!((up.frequency - 0.25).abs() < 0.05 && (low.frequency - 0.25).abs() < 0.05);
        assert_eq!(mc.upper(-2.0).frequency, 1.0);
        assert_eq!(mc.lower(2.0).frequency, 1.0);
    }

    #[test]
    fn bad_grids_and_scenarios_are_rejected() {
        let o = oracle(&[vec![1.0]]);
        assert!(check_tail_bounds_exact(&o, &[-1.0], &BoundConstants::default()).is_err());
        assert!(check_log_laplace_bounds(&o, &[f64::NAN], &BoundConstants::default()).is_err());
        let bad = Scenario::new(vec![CoordinateDist::signs()], vec![vec![vec![0.5, 1.0]]]).unwrap();
        assert!(matches!(
            certify_scenario(&bad, &CertifyOptions::default()),
            Err(Error::Scenario(_))
        ));
        let big = build_rademacher(&[vec![1.0; 30]], None).unwrap();
        let opts = CertifyOptions {
            mode: CertifyMode::Exact,
            ..CertifyOptions::default()
        };
        assert!(matches!(
            certify_scenario(&big, &opts),
            Err(Error::EnumerationCap { .. })
        ));
    }
}

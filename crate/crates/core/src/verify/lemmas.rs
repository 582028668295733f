//! Grid and exact-arithmetic checks of the scalar inequalities behind the
//! bounds. Everything here is deterministic and seed-free.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::report::{CheckReport, ReportBuilder, NUMERIC_TOL};
use crate::bound_functions::{legendre_lemma34, proof_scalars, BoundConstants, BoundParams, TailForm};
use crate::error::{domain, Result};
use crate::numerics::{integral_I, integral_J, minimize_scalar, solve_t0, solve_t1, J_DOMAIN_MAX};
use crate::processes::{Atom, CoordinateDist};

/// Default grid density, in points per unit length.
pub const DEFAULT_GRID_POINTS: usize = 512;
/// Smallest accepted grid density.
pub const MIN_GRID_POINTS: usize = 100;
/// Largest index `j` for which the series coefficients are checked.
pub const SERIES_MAX_INDEX: u32 = 30;
/// Residual required of the computed roots `t0`, `t1`.
pub const ROOT_RESIDUAL_TOL: f64 = 1e-12;
/// Right end of the interval on which the rational comparison is checked.
pub const RATIONAL_COMPARISON_MAX: f64 = 0.999;

/// `count + 1` equally spaced nodes on `[a, b]` with `count = ⌈(b − a)·density⌉`.
fn nodes(a: f64, b: f64, density: usize) -> Vec<f64> {
    let count = (((b - a) * density as f64).ceil() as usize).max(1);
    (0..=count)
        .map(|i| {
            if i == count {
                b
            } else {
                a + (b - a) * i as f64 / count as f64
            }
        })
        .collect()
}

/// `t0` (`φ(t0) = 1`) and `t1` (`eᵗ − t − 1 = t/2`) with their residuals and
/// the published enclosing intervals.
pub fn check_roots() -> CheckReport {
    let (t0, t1) = (solve_t0(), solve_t1());
    let phi_residual = proof_scalars(t0).map(|(_, phi)| phi - 1.0).unwrap_or(f64::NAN);
    let t1_residual = t1.exp_m1() - t1 - 0.5 * t1;
    let mut b = ReportBuilder::new("roots t0 and t1", "t0 in [0.46, 0.47], t1 in [0.76, 0.77]", 0.0);
    b.value("t0", t0);
    b.value("t1", t1);
    b.value("t0_residual", phi_residual);
    b.value("t1_residual", t1_residual);
    b.record(ROOT_RESIDUAL_TOL - phi_residual.abs(), || {
        format!("|phi(t0) - 1| = {phi_residual:e}")
    });
    b.record(ROOT_RESIDUAL_TOL - t1_residual.abs(), || {
        format!("t1 residual = {t1_residual:e}")
    });
    b.record((t0 - 0.46).min(0.47 - t0), || format!("t0 = {t0} outside [0.46, 0.47]"));
    b.record((t1 - 0.76).min(0.77 - t1), || format!("t1 = {t1} outside [0.76, 0.77]"));
    b.record(t1 - t0, || format!("t1 = {t1} not above t0 = {t0}"));
    b.finish()
}

/// `(j − 1)!((3/2)^j − (1/2)^j) − 2^{j−1}`, exactly.
pub fn series_coefficient(j: u32) -> BigRational {
    assert!(j >= 1, "series coefficients start at j = 1");
    let factorial: BigInt = (1..j).fold(BigInt::one(), |acc, k| acc * BigInt::from(k));
    let three_j = BigInt::from(3).pow(j);
    let two_j = BigInt::from(2).pow(j);
    let powers = BigRational::new(three_j - BigInt::one(), two_j);
    BigRational::from_integer(factorial) * powers - BigRational::from_integer(BigInt::from(2).pow(j - 1))
}

fn check_eta_quadratic(density: usize) -> CheckReport {
    // η(x) = t x e^{tx} + (t + 1)(1 − e^{tx}) ≤ −t²x + t²x²/2
    let ts: Vec<f64> = nodes(0.0, 3.0, density).into_iter().skip(1).collect();
    let xs = nodes(-3.0, 1.0, density);
    let mut b = ReportBuilder::new(
        "entropy remainder quadratic bound",
        format!("t in (0, 3] x x in [-3, 1], {} x {} points", ts.len(), xs.len()),
        NUMERIC_TOL,
    );
    for &t in &ts {
        for &x in &xs {
            let tx = t * x;
            let eta = tx * tx.exp() - (t + 1.0) * tx.exp_m1();
            let bound = -t * t * x + 0.5 * tx * tx;
            b.dominates(bound, eta, || format!("t = {t}, x = {x}"));
        }
    }
    b.finish()
}

fn check_series_coefficients() -> CheckReport {
    let mut b = ReportBuilder::new(
        "rational bound series coefficients",
        format!("j = 2..{SERIES_MAX_INDEX}, exact rationals"),
        0.0,
    );
    for j in 2..=SERIES_MAX_INDEX {
        let c = series_coefficient(j);
        let approx = c.to_f64().unwrap_or(f64::MAX);
        if j <= 3 {
            b.value(format!("b_{j}"), approx);
        }
        // sign decided exactly; the f64 value is only reported
        let slack = if c.is_negative() {
            approx.min(-f64::MIN_POSITIVE)
        } else {
            approx
        };
        b.record(slack, || format!("b_{j} = {c}"));
    }
    let b2 = series_coefficient(2);
    b.record(
        if b2.is_zero() {
            0.0
        } else {
            -b2.abs().to_f64().unwrap_or(f64::MAX)
        },
        || format!("b_2 = {b2}, expected exactly 0"),
    );
    b.finish()
}

fn check_phi_sandwich(density: usize) -> Result<CheckReport> {
    let t0 = solve_t0();
    let ts = nodes(0.0, t0, density);
    let mut b = ReportBuilder::new(
        "phi sandwich t <= phi(t) <= t e^{2t} - t^2/2",
        format!("t in [0, t0], {} points", ts.len()),
        NUMERIC_TOL,
    );
    for &t in &ts {
        let (_, phi) = proof_scalars(t)?;
        b.dominates(phi, t, || format!("lower side at t = {t}"));
        b.dominates(t * (2.0 * t).exp() - 0.5 * t * t, phi, || {
            format!("upper side at t = {t}")
        });
    }
    Ok(b.finish())
}

fn lower_laplace_shape(t: f64) -> f64 {
    let u = 3.0 * t;
    (u.exp_m1() - u) / 9.0
}

fn check_j_term(density: usize) -> Result<CheckReport> {
    let ts = nodes(0.0, J_DOMAIN_MAX, density);
    let mut b = ReportBuilder::new(
        "J-term bound t e^{-t} J(t) + e^t - t - 1 <= (e^{3t} - 3t - 1)/9",
        format!("t in [0, 4], {} points", ts.len()),
        NUMERIC_TOL,
    );
    for &t in &ts {
        let lhs = t * (-t).exp() * integral_J(t)? + t.exp_m1() - t;
        b.dominates(lower_laplace_shape(t), lhs, || format!("t = {t}"));
    }
    Ok(b.finish())
}

fn check_i_term(density: usize) -> Result<CheckReport> {
    let t0 = solve_t0();
    let ts = nodes(0.0, t0, density);
    let mut b = ReportBuilder::new(
        "I-term bound t(1 - e^{-I(t)}) <= (2/9)(e^{3t} - 3t - 1)",
        format!("t in [0, t0], {} points", ts.len()),
        NUMERIC_TOL,
    );
    for &t in &ts {
        let lhs = -t * (-integral_I(t)?.value).exp_m1();
        b.dominates(2.0 * lower_laplace_shape(t), lhs, || format!("t = {t}"));
    }
    Ok(b.finish())
}

fn check_rational_comparison(density: usize) -> CheckReport {
    let ts = nodes(0.0, RATIONAL_COMPARISON_MAX, density);
    let mut b = ReportBuilder::new(
        "(e^{3t} - 3t - 1)/9 <= t^2/(2 - 2t)",
        format!("t in [0, {RATIONAL_COMPARISON_MAX}], {} points", ts.len()),
        NUMERIC_TOL,
    );
    for &t in &ts {
        b.dominates(t * t / (2.0 - 2.0 * t), lower_laplace_shape(t), || format!("t = {t}"));
    }
    b.finish()
}

/// Dense-grid checks of every scalar inequality used by the proofs, with
/// `grid_points` nodes per unit length.
pub fn check_lemma_inequalities(grid_points: usize) -> Result<Vec<CheckReport>> {
    if grid_points < MIN_GRID_POINTS {
        return Err(domain(
            "check_lemma_inequalities",
            format!("grid_points must be at least {MIN_GRID_POINTS}, got {grid_points}"),
        ));
    }
    Ok(vec![
        check_eta_quadratic(grid_points),
        check_series_coefficients(),
        check_phi_sandwich(grid_points)?,
        check_j_term(grid_points)?,
        check_i_term(grid_points)?,
        check_rational_comparison(grid_points),
    ])
}

/// `E(tYe^{tY}) − E(e^{tY}) log E(e^{tY}) ≤ E(Y²)(1 + (t − 1)eᵗ)` with exact
/// expectations over the atoms of `dist`, whose values must lie in `[−1, 1]`.
pub fn check_lemma44(dist: &CoordinateDist, t_grid: &[f64]) -> Result<CheckReport> {
    if let Some(a) = dist.atoms().iter().find(|a| !(-1.0..=1.0).contains(&a.value)) {
        return Err(domain(
            "check_lemma44",
            format!("atom value {} outside [-1, 1]", a.value),
        ));
    }
    if let Some(t) = t_grid.iter().find(|t| !(**t > 0.0) || !t.is_finite()) {
        return Err(domain(
            "check_lemma44",
            format!("t must be positive and finite, got {t}"),
        ));
    }
    let label: Vec<String> = dist
        .atoms()
        .iter()
        .map(|a| format!("({}, {})", a.value, a.prob))
        .collect();
    let mut b = ReportBuilder::new(
        "entropy bound for variables at most 1",
        format!("Y ~ {{{}}}, {} values of t", label.join(", "), t_grid.len()),
        NUMERIC_TOL,
    );
    let second_moment = dist.expect(|a| a.value * a.value);
    for &t in t_grid {
        let mgf = dist.expect(|a| (t * a.value).exp());
        let lhs = dist.expect(|a| t * a.value * (t * a.value).exp()) - mgf * mgf.ln();
        let rhs = second_moment * (1.0 + (t - 1.0) * t.exp());
        b.dominates(rhs, lhs, || format!("t = {t}"));
    }
    Ok(b.finish())
}

/// A fixed family of two-atom laws on `[−1, 1]`, centred and uncentred.
pub fn entropy_check_distributions() -> Vec<CoordinateDist> {
    let two = |a: f64, p: f64, b: f64| {
        CoordinateDist::new(vec![
            Atom { value: a, prob: p },
            Atom {
                value: b,
                prob: 1.0 - p,
            },
        ])
        .expect("two-atom law")
    };
    let mut out = vec![
        CoordinateDist::new(vec![Atom { value: 0.0, prob: 1.0 }]).expect("point mass"),
        CoordinateDist::signs(),
        two(1.0, 1.0 / 3.0, -0.5),
    ];
    for &p in &[0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99] {
        // centred: a·p + b·(1 − p) = 0 with a = 1
        out.push(two(1.0, p, -p / (1.0 - p)));
        out.push(two(-1.0, p, 0.3));
        out.push(two(0.2, p, -0.9));
    }
    out.retain(|d| d.atoms().iter().all(|a| (-1.0..=1.0).contains(&a.value)));
    out
}

/// Largest `x` accepted by [`check_legendre_equivalence`].
pub const LEGENDRE_X_MAX: f64 = 50.0;
const LEGENDRE_TOL: f64 = 1e-8;

/// Compares the numerically optimised conjugate of `t ↦ t²/(2 − 3t)` with its
/// closed form, and checks that the Chernoff bound it induces after the
/// scaling `x → x/v` coincides with the tight closed-form upper tail.
pub fn check_legendre_equivalence(x_grid: &[f64]) -> Result<CheckReport> {
    if let Some(x) = x_grid.iter().find(|x| !(0.0..=LEGENDRE_X_MAX).contains(*x)) {
        return Err(domain(
            "check_legendre_equivalence",
            format!("x must lie in [0, {LEGENDRE_X_MAX}], got {x}"),
        ));
    }
    let mut b = ReportBuilder::new(
        "conjugate of t^2/(2 - 3t)",
        format!("{} values of x in [0, {LEGENDRE_X_MAX}]", x_grid.len()),
        LEGENDRE_TOL,
    );
    let t_hi = (2.0 / 3.0) * (1.0 - 1e-12);
    let constants = BoundConstants::default();
    for &x in x_grid {
        let (_, neg) = minimize_scalar(|t| t * t / (2.0 - 3.0 * t) - t * x, 0.0, t_hi, 1e-14)?;
        let searched = (-neg).max(0.0);
        let closed = legendre_lemma34(x)?;
        b.record(-(searched - closed).abs(), || {
            format!("x = {x}: search {searched}, closed form {closed}")
        });
        for &v in &[0.25, 1.0, 4.0] {
            let chernoff = (-v * legendre_lemma34(x / v)?).exp();
            let tight = constants.upper_tail(x, &BoundParams::new(0.0, v)?, TailForm::FormCTight)?;
            b.record(-(chernoff - tight).abs(), || {
                format!("x = {x}, v = {v}: Chernoff {chernoff}, tight form {tight}")
            });
        }
    }
    Ok(b.finish())
}

/// Every seed-free check: roots, scalar inequalities, the entropy bound over
/// [`entropy_check_distributions`], and the conjugate identity on 200 points.
pub fn lemma_suite(grid_points: usize) -> Result<Vec<CheckReport>> {
    let mut out = vec![check_roots()];
    out.extend(check_lemma_inequalities(grid_points)?);
    let t_grid: Vec<f64> = nodes(0.0, 3.0, grid_points).into_iter().skip(1).collect();
    for dist in entropy_check_distributions() {
        out.push(check_lemma44(&dist, &t_grid)?);
    }
    let x_grid: Vec<f64> = (0..200).map(|i| LEGENDRE_X_MAX * i as f64 / 199.0).collect();
    out.push(check_legendre_equivalence(&x_grid)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn first_series_coefficients() {
        assert!(series_coefficient(2).is_zero());
        assert_eq!(
            series_coefficient(3),
            BigRational::new(BigInt::from(5), BigInt::from(2))
        );
        // j = 4: 6·(80/16) − 8 = 22
        assert_eq!(series_coefficient(4), BigRational::from_integer(BigInt::from(22)));
    }

    #[test]
    fn roots_report() {
        let r = check_roots();
        assert!(r.pass, "{r:?}");
        assert_abs_diff_eq!(r.values["t0"], 0.4634067204742797, epsilon = 1e-15);
        assert_abs_diff_eq!(r.values["t1"], 0.762_688_560_850_339, epsilon = 1e-15);
    }

    #[test]
    fn lemma_inequalities_hold() {
        for r in check_lemma_inequalities(MIN_GRID_POINTS).unwrap() {
            assert!(r.pass, "{r:?}");
            assert!(r.points_checked > 0);
        }
        assert!(check_lemma_inequalities(99).is_err());
    }

    #[test]
    fn entropy_check_examples() {
        let zero = CoordinateDist::new(vec![Atom { value: 0.0, prob: 1.0 }]).unwrap();
        let r = check_lemma44(&zero, &[1.0]).unwrap();
        assert_eq!(r.worst_margin, 0.0);
        // ±1 at t = 1: sinh 1 − cosh 1·log cosh 1 ≈ 0.505842 against 1
        let r = check_lemma44(&CoordinateDist::signs(), &[1.0]).unwrap();
        let lhs = 1f64.sinh() - 1f64.cosh() * 1f64.cosh().ln();
        assert_abs_diff_eq!(lhs, 0.5058424, epsilon = 1e-7);
        assert_abs_diff_eq!(r.worst_margin, 1.0 - lhs, epsilon = 1e-14);
        assert!(entropy_check_distributions().len() >= 20);
        let wide = CoordinateDist::new(vec![Atom { value: 2.0, prob: 1.0 }]).unwrap();
        assert!(check_lemma44(&wide, &[1.0]).is_err());
        assert!(check_lemma44(&CoordinateDist::signs(), &[0.0]).is_err());
    }

    #[test]
    fn legendre_spot_values() {
        assert_eq!(legendre_lemma34(0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(legendre_lemma34(1.0).unwrap(), 2.0 / 9.0, epsilon = 1e-15);
        assert_abs_diff_eq!(legendre_lemma34(8.0).unwrap(), 32.0 / 9.0, epsilon = 1e-14);
        let r = check_legendre_equivalence(&[0.0, 1.0, 8.0, 50.0]).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(check_legendre_equivalence(&[51.0]).is_err());
    }
}

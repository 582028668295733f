//! Scalar numerics: adaptive quadrature, bisection, and bounded 1-D
//! minimization, plus the special integrals `I`, `J` and the roots `t0`, `t1`
//! that delimit the left-tail argument.
//!
//! ```text
//! I(t) = ∫₀ᵗ φ(u)/u du,                       φ = ψ log ψ, ψ(u) = (e^{2u} + 1)/2
//! J(t) = ½ ∫₀ᵗ u⁻² (e^{2u} − 1)(1 + (u − 1)eᵘ) eᵘ du
//! φ(t0) = 1,   e^{t1} − t1 − 1 = t1/2
//! ```

use std::sync::OnceLock;

use crate::bound_functions::proof_scalars;
use crate::error::{domain, Error, Result};

/// Tolerance and depth budget for [`quadrature`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    /// Maximum recursion depth of the adaptive bisection of `[a, b]`.
    pub max_subdivisions: u32,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            max_subdivisions: 60,
        }
    }
}

impl QuadratureSpec {
    pub fn new(abs_tol: f64, max_subdivisions: u32) -> Result<Self> {
        if !(abs_tol > 0.0) || !abs_tol.is_finite() {
            return Err(domain(
                "QuadratureSpec",
                format!("abs_tol must be positive, got {abs_tol}"),
            ));
        }
        if max_subdivisions < 1 {
            return Err(domain("QuadratureSpec", "max_subdivisions must be at least 1"));
        }
        Ok(Self {
            abs_tol,
            max_subdivisions,
        })
    }
}

// Hard cap on integrand evaluations; keeps an unreachable tolerance from
// turning the recursion into 2^depth work.
const MAX_EVALUATIONS: usize = 4_000_000;

struct Simpson<'f, F> {
    f: &'f F,
    max_depth: u32,
    evaluations: usize,
    failed: bool,
}

impl<F: Fn(f64) -> f64> Simpson<'_, F> {
    fn eval(&mut self, x: f64) -> f64 {
        self.evaluations += 1;
        (self.f)(x)
    }

    #[allow(clippy::too_many_arguments)]
    fn refine(&mut self, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = self.eval(lm);
        let frm = self.eval(rm);
        let h = b - a;
        let left = h / 12.0 * (fa + 4.0 * flm + fm);
        let right = h / 12.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        if depth >= self.max_depth || self.evaluations >= MAX_EVALUATIONS || lm <= a || rm >= b {
            self.failed = true;
            return left + right + delta / 15.0;
        }
        self.refine(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)
            + self.refine(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)
    }
}

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
///
/// The error budget is halved at each subdivision. `f` must be finite on the
/// closed interval; removable singularities are the caller's business.
pub fn quadrature<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, spec: QuadratureSpec) -> Result<f64> {
    if !(a <= b) || !a.is_finite() || !b.is_finite() {
        return Err(domain("quadrature", format!("need finite a <= b, got [{a}, {b}]")));
    }
    if a == b {
        return Ok(0.0);
    }
    let mut s = Simpson {
        f: &f,
        max_depth: spec.max_subdivisions,
        evaluations: 0,
        failed: false,
    };
    let fa = s.eval(a);
    let fb = s.eval(b);
    let fm = s.eval(0.5 * (a + b));
    if !(fa.is_finite() && fb.is_finite() && fm.is_finite()) {
        return Err(domain("quadrature", "integrand is not finite at a sample point"));
    }
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let value = s.refine(a, b, fa, fm, fb, whole, spec.abs_tol, 0);
    if s.failed || !value.is_finite() {
        return Err(Error::NonConvergence {
            a,
            b,
            max_subdivisions: spec.max_subdivisions,
        });
    }
    Ok(value)
}

/// Bisection for a root of `f` in `[lo, hi]`, stopping once the bracket is
/// no wider than `tol`.
pub fn bisect<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(domain("bisect", format!("tol must be positive, got {tol}")));
    }
    if !(lo < hi) {
        return Err(domain("bisect", format!("need lo < hi, got [{lo}, {hi}]")));
    }
    let (mut lo, mut hi) = (lo, hi);
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if !(f_lo * f_hi < 0.0) {
        return Err(Error::BracketViolation { lo, hi, f_lo, f_hi });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;
const SCAN_POINTS: usize = 64;

/// Minimizes `f` on `[lo, hi]` by a uniform scan followed by golden-section
/// refinement of the best cell. Returns `(x_star, f_star)`.
///
/// For unimodal objectives the result is the global minimizer to within `tol`.
pub fn minimize_scalar<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64)> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(domain(
            "minimize_scalar",
            format!("need finite lo < hi, got [{lo}, {hi}]"),
        ));
    }
    if !(tol > 0.0) {
        return Err(domain("minimize_scalar", format!("tol must be positive, got {tol}")));
    }
    let step = (hi - lo) / SCAN_POINTS as f64;
    let node = |i: usize| if i == SCAN_POINTS { hi } else { lo + step * i as f64 };
    let (mut best, mut best_f) = (0, f(lo));
    for i in 1..=SCAN_POINTS {
        let v = f(node(i));
        if v < best_f {
            best = i;
            best_f = v;
        }
    }
    let a = node(best.saturating_sub(1));
    let b = node((best + 1).min(SCAN_POINTS));
    let (x, fx) = golden_section(&f, a, b, tol);
    // The scan node can beat the refined point at a boundary minimum.
    if best_f < fx {
        Ok((node(best), best_f))
    } else {
        Ok((x, fx))
    }
}

pub(crate) fn golden_section<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let candidates = [(a, f(a)), (c, fc), (d, fd), (b, f(b))];
    candidates.into_iter().fold(
        (f64::NAN, f64::INFINITY),
        |acc, (x, fx)| if fx < acc.1 { (x, fx) } else { acc },
    )
}

/// `1 + (u − 1)eᵘ`, accurate near zero where it behaves like `u²/2`.
pub(crate) fn one_plus_u_minus_one_exp(u: f64) -> f64 {
    if u.abs() < 0.1 {
        // Σ_{k≥2} (k − 1) uᵏ / k!
        let mut term = u * u / 2.0;
        let mut sum = term;
        for k in 3..40 {
            term *= u / k as f64;
            let add = term * (k - 1) as f64;
            sum += add;
            if add.abs() <= 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        1.0 + (u - 1.0) * u.exp()
    }
}

fn i_integrand(u: f64) -> f64 {
    if u == 0.0 {
        return 1.0;
    }
    let (_, phi) = proof_scalars(u).expect("u is nonnegative");
    phi / u
}

fn j_integrand(u: f64) -> f64 {
    if u == 0.0 {
        return 0.0;
    }
    (2.0 * u).exp_m1() * one_plus_u_minus_one_exp(u) * u.exp() / (u * u)
}

/// Value of `I(t)` together with whether `t` lies past `t0`, where the
/// integral is still defined but no longer used by the left-tail bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralI {
    pub value: f64,
    pub beyond_t0: bool,
}

/// `I(t) = ∫₀ᵗ φ(u)/u du`, with the integrand taken as 1 at `u = 0`.
#[allow(non_snake_case)]
pub fn integral_I(t: f64) -> Result<IntegralI> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(domain("integral_I", format!("t must be finite and >= 0, got {t}")));
    }
    let value = quadrature(i_integrand, 0.0, t, QuadratureSpec::default())?;
    Ok(IntegralI {
        value,
        beyond_t0: t > solve_t0(),
    })
}

/// Largest argument accepted by [`integral_J`].
pub const J_DOMAIN_MAX: f64 = 4.0;

/// `J(t) = ½ ∫₀ᵗ u⁻²(e^{2u} − 1)(1 + (u − 1)eᵘ)eᵘ du` for `t` in `[0, 4]`.
///
/// The absolute tolerance is scaled by a crude size estimate of the integral,
/// since `J(4)` is of order 10⁵ and an absolute 1e−12 is below its rounding
/// floor.
#[allow(non_snake_case)]
pub fn integral_J(t: f64) -> Result<f64> {
    if !(0.0..=J_DOMAIN_MAX).contains(&t) {
        return Err(domain("integral_J", format!("t must lie in [0, 4], got {t}")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    // Integrand is increasing, so t·g(t) bounds the integral.
    let scale = (t * j_integrand(t)).max(1.0);
    let spec = QuadratureSpec {
        abs_tol: 1e-12 * scale,
        ..QuadratureSpec::default()
    };
    Ok(0.5 * quadrature(j_integrand, 0.0, t, spec)?)
}

/// Root of `φ(t) = 1` on `[0.4, 0.5]`, computed once per process.
pub fn solve_t0() -> f64 {
    static T0: OnceLock<f64> = OnceLock::new();
    *T0.get_or_init(|| {
        bisect(|t| proof_scalars(t).expect("t in [0.4, 0.5]").1 - 1.0, 0.4, 0.5, 1e-16)
            .expect("phi - 1 changes sign on [0.4, 0.5]")
    })
}

/// Positive root of `eᵗ − t − 1 = t/2` on `[0.7, 0.8]`, computed once per process.
pub fn solve_t1() -> f64 {
    static T1: OnceLock<f64> = OnceLock::new();
    *T1.get_or_init(|| bisect(|t| t.exp_m1() - 1.5 * t, 0.7, 0.8, 1e-16).expect("root bracketed on [0.7, 0.8]"))
}

/// Bound on `L_{−Z}(t) + t·E(Z)` on `[0, t0]` built from `I` and `J`:
///
/// ```text
/// t·E(Z)(1 − e^{−I(t)}) + V_n(t e^{−t} J(t) + eᵗ − t − 1)
/// ```
pub fn prop42_left_log_laplace(t: f64, mean_z: f64, v_n: f64) -> Result<f64> {
    let t0 = solve_t0();
    if !(0.0..=t0).contains(&t) {
        return Err(domain(
            "prop42_left_log_laplace",
            format!("t must lie in [0, t0 = {t0}], got {t}"),
        ));
    }
    if !(mean_z >= 0.0) || !(v_n >= 0.0) {
        return Err(domain(
            "prop42_left_log_laplace",
            format!("mean_z and v_n must be >= 0, got ({mean_z}, {v_n})"),
        ));
    }
    let i = integral_I(t)?.value;
    let j = integral_J(t)?;
    Ok(t * mean_z * -(-i).exp_m1() + v_n * (t * (-t).exp() * j + t.exp_m1() - t))
}

//! Closed-form concentration bounds for `Z = sup_s S_n(s)` around its mean.
//!
//! Every bound is parameterized by `E(Z)` and the maximal variance `V_n`
//! through the variance factor `v = V_n + 2E(Z)`:
//!
//! ```text
//! log E e^{tZ}         ≤ tE(Z) + (t/2) v (exp((e^{2t} − 1)/2) − 1)
//! log E e^{tZ}         ≤ tE(Z) + v t²/(2 − 3t)                     t < 2/3
//! log E e^{−tZ} + tE(Z) ≤ (v/9)(e^{3t} − 3t − 1)
//! P(Z ≥ E(Z) + x)      ≤ exp(−x²/(v + √(v² + 3vx) + 3x/2)) ≤ exp(−x²/(2v + 3x))
//! P(Z ≤ E(Z) − x)      ≤ exp(−x²/(v + √(v² + 2vx) + x))    ≤ exp(−x²/(2v + 2x))
//! ```
//!
//! The numeric constants of each bound live in [`BoundConstants`] so the
//! certification harness can perturb them (fault injection). The free
//! functions evaluate with the unperturbed constants.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::numerics::{bisect, golden_section};

/// `E(Z)` and `V_n`; the variance factor `v` is always derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    mean_z: f64,
    v_n: f64,
}

impl BoundParams {
    pub fn new(mean_z: f64, v_n: f64) -> Result<Self> {
        if !(mean_z >= 0.0) || !mean_z.is_finite() {
            return Err(domain(
                "BoundParams",
                format!("mean_z must be finite and >= 0, got {mean_z}"),
            ));
        }
        if !(v_n >= 0.0) || !v_n.is_finite() {
            return Err(domain("BoundParams", format!("v_n must be finite and >= 0, got {v_n}")));
        }
        Ok(Self { mean_z, v_n })
    }

    pub fn mean_z(&self) -> f64 {
        self.mean_z
    }

    pub fn v_n(&self) -> f64 {
        self.v_n
    }

    /// `v = V_n + 2E(Z)`.
    pub fn v(&self) -> f64 {
        self.v_n + 2.0 * self.mean_z
    }
}

/// Shape of a tail bound: the `h`/log-log form, the tight Legendre form, or
/// its simpler quadratic-over-linear relaxation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TailForm {
    #[serde(rename = "b")]
    FormB,
    #[serde(rename = "c-tight")]
    FormCTight,
    #[serde(rename = "c-simple")]
    FormCSimple,
}

impl TailForm {
    pub const ALL: [TailForm; 3] = [TailForm::FormB, TailForm::FormCTight, TailForm::FormCSimple];

    pub fn as_str(&self) -> &'static str {
        match self {
            TailForm::FormB => "b",
            TailForm::FormCTight => "c-tight",
            TailForm::FormCSimple => "c-simple",
        }
    }
}

impl fmt::Display for TailForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TailForm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "b" => Ok(TailForm::FormB),
            "c-tight" => Ok(TailForm::FormCTight),
            "c-simple" => Ok(TailForm::FormCSimple),
            other => Err(format!("unknown form '{other}' (expected b, c-tight, c-simple)")),
        }
    }
}

/// Deviation above (`Upper`) or below (`Lower`) the mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Upper,
    Lower,
}

impl Side {
    pub fn as_str(&self) -> &'static str {
        match self {
            Side::Upper => "upper",
            Side::Lower => "lower",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Side {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "upper" => Ok(Side::Upper),
            "lower" => Ok(Side::Lower),
            other => Err(format!("unknown side '{other}' (expected upper, lower)")),
        }
    }
}

/// A bound value that may have exceeded the double range. When `saturated`
/// is set, `value` is `f64::MAX` and the bound is vacuous.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Saturating {
    pub value: f64,
    pub saturated: bool,
}

impl Saturating {
    fn from_raw(value: f64) -> Self {
        if value.is_finite() {
            Self {
                value,
                saturated: false,
            }
        } else {
            Self::saturated()
        }
    }

    fn saturated() -> Self {
        Self {
            value: f64::MAX,
            saturated: true,
        }
    }
}

// exp(x) overflows past ~709.78; keep a margin for the outer multiplications.
const EXP_ARG_LIMIT: f64 = 700.0;

/// Largest `t` at which the upper log-Laplace bound is representable.
pub fn upper_saturation_t() -> f64 {
    (2.0 * EXP_ARG_LIMIT + 1.0).ln() / 2.0
}

/// Names of the perturbable constants in [`BoundConstants`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantId {
    VarianceVnCoeff,
    VarianceMeanCoeff,
    UpperLaplaceScale,
    RationalOffset,
    RationalPole,
    LowerLaplaceDivisor,
    LowerLaplaceRate,
    UpperBDivisor,
    UpperBInner,
    UpperCTightSqrt,
    UpperCTightLinear,
    UpperCSimpleVar,
    UpperCSimpleLinear,
    LowerBDivisor,
    LowerBInner,
    LowerCTightSqrt,
    LowerCTightLinear,
    LowerCSimpleVar,
    LowerCSimpleLinear,
    TalagrandMeanCoeff,
}

impl ConstantId {
    pub const ALL: [ConstantId; 20] = [
        ConstantId::VarianceVnCoeff,
        ConstantId::VarianceMeanCoeff,
        ConstantId::UpperLaplaceScale,
        ConstantId::RationalOffset,
        ConstantId::RationalPole,
        ConstantId::LowerLaplaceDivisor,
        ConstantId::LowerLaplaceRate,
        ConstantId::UpperBDivisor,
        ConstantId::UpperBInner,
        ConstantId::UpperCTightSqrt,
        ConstantId::UpperCTightLinear,
        ConstantId::UpperCSimpleVar,
        ConstantId::UpperCSimpleLinear,
        ConstantId::LowerBDivisor,
        ConstantId::LowerBInner,
        ConstantId::LowerCTightSqrt,
        ConstantId::LowerCTightLinear,
        ConstantId::LowerCSimpleVar,
        ConstantId::LowerCSimpleLinear,
        ConstantId::TalagrandMeanCoeff,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ConstantId::VarianceVnCoeff => "variance_vn_coeff",
            ConstantId::VarianceMeanCoeff => "variance_mean_coeff",
            ConstantId::UpperLaplaceScale => "upper_laplace_scale",
            ConstantId::RationalOffset => "rational_offset",
            ConstantId::RationalPole => "rational_pole",
            ConstantId::LowerLaplaceDivisor => "lower_laplace_divisor",
            ConstantId::LowerLaplaceRate => "lower_laplace_rate",
            ConstantId::UpperBDivisor => "upper_b_divisor",
            ConstantId::UpperBInner => "upper_b_inner",
            ConstantId::UpperCTightSqrt => "upper_c_tight_sqrt",
            ConstantId::UpperCTightLinear => "upper_c_tight_linear",
            ConstantId::UpperCSimpleVar => "upper_c_simple_var",
            ConstantId::UpperCSimpleLinear => "upper_c_simple_linear",
            ConstantId::LowerBDivisor => "lower_b_divisor",
            ConstantId::LowerBInner => "lower_b_inner",
            ConstantId::LowerCTightSqrt => "lower_c_tight_sqrt",
            ConstantId::LowerCTightLinear => "lower_c_tight_linear",
            ConstantId::LowerCSimpleVar => "lower_c_simple_var",
            ConstantId::LowerCSimpleLinear => "lower_c_simple_linear",
            ConstantId::TalagrandMeanCoeff => "talagrand_mean_coeff",
        }
    }

    /// +1 when increasing the constant loosens its bound, −1 when it tightens.
    pub fn loosening_direction(&self) -> f64 {
        match self {
            ConstantId::RationalOffset
            | ConstantId::LowerLaplaceDivisor
            | ConstantId::UpperBInner
            | ConstantId::LowerBInner => -1.0,
            _ => 1.0,
        }
    }
}

impl fmt::Display for ConstantId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ConstantId {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        ConstantId::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown bound constant '{s}'"))
    }
}

/// The numeric constants appearing in every bound. `Default` gives the
/// proven values; [`BoundConstants::perturbed`] produces fault-injected copies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundConstants {
    /// v = a·V_n + b·E(Z)
    pub variance_vn_coeff: f64,
    pub variance_mean_coeff: f64,
    /// (t/2) in the upper log-Laplace bound
    pub upper_laplace_scale: f64,
    /// t²/(offset − pole·t)
    pub rational_offset: f64,
    pub rational_pole: f64,
    /// (v/divisor)(e^{rate·t} − rate·t − 1)
    pub lower_laplace_divisor: f64,
    pub lower_laplace_rate: f64,
    /// (x/divisor) log(1 + inner·log(1 + x/v))
    pub upper_b_divisor: f64,
    pub upper_b_inner: f64,
    pub upper_c_tight_sqrt: f64,
    pub upper_c_tight_linear: f64,
    pub upper_c_simple_var: f64,
    pub upper_c_simple_linear: f64,
    /// (v/divisor) h(inner·x/v)
    pub lower_b_divisor: f64,
    pub lower_b_inner: f64,
    pub lower_c_tight_sqrt: f64,
    pub lower_c_tight_linear: f64,
    pub lower_c_simple_var: f64,
    pub lower_c_simple_linear: f64,
    /// V ≤ V_n + coeff·E(Z)
    pub talagrand_mean_coeff: f64,
}

impl Default for BoundConstants {
    fn default() -> Self {
        Self {
            variance_vn_coeff: 1.0,
            variance_mean_coeff: 2.0,
            upper_laplace_scale: 0.5,
            rational_offset: 2.0,
            rational_pole: 3.0,
            lower_laplace_divisor: 9.0,
            lower_laplace_rate: 3.0,
            upper_b_divisor: 4.0,
            upper_b_inner: 2.0,
            upper_c_tight_sqrt: 3.0,
            upper_c_tight_linear: 1.5,
            upper_c_simple_var: 2.0,
            upper_c_simple_linear: 3.0,
            lower_b_divisor: 9.0,
            lower_b_inner: 3.0,
            lower_c_tight_sqrt: 2.0,
            lower_c_tight_linear: 1.0,
            lower_c_simple_var: 2.0,
            lower_c_simple_linear: 2.0,
            talagrand_mean_coeff: 16.0,
        }
    }
}

impl BoundConstants {
    pub fn get(&self, id: ConstantId) -> f64 {
        let mut copy = *self;
        *copy.slot_mut(id)
    }

    pub fn slot_mut(&mut self, id: ConstantId) -> &mut f64 {
        match id {
            ConstantId::VarianceVnCoeff => &mut self.variance_vn_coeff,
            ConstantId::VarianceMeanCoeff => &mut self.variance_mean_coeff,
            ConstantId::UpperLaplaceScale => &mut self.upper_laplace_scale,
            ConstantId::RationalOffset => &mut self.rational_offset,
            ConstantId::RationalPole => &mut self.rational_pole,
            ConstantId::LowerLaplaceDivisor => &mut self.lower_laplace_divisor,
            ConstantId::LowerLaplaceRate => &mut self.lower_laplace_rate,
            ConstantId::UpperBDivisor => &mut self.upper_b_divisor,
            ConstantId::UpperBInner => &mut self.upper_b_inner,
            ConstantId::UpperCTightSqrt => &mut self.upper_c_tight_sqrt,
            ConstantId::UpperCTightLinear => &mut self.upper_c_tight_linear,
            ConstantId::UpperCSimpleVar => &mut self.upper_c_simple_var,
            ConstantId::UpperCSimpleLinear => &mut self.upper_c_simple_linear,
            ConstantId::LowerBDivisor => &mut self.lower_b_divisor,
            ConstantId::LowerBInner => &mut self.lower_b_inner,
            ConstantId::LowerCTightSqrt => &mut self.lower_c_tight_sqrt,
            ConstantId::LowerCTightLinear => &mut self.lower_c_tight_linear,
            ConstantId::LowerCSimpleVar => &mut self.lower_c_simple_var,
            ConstantId::LowerCSimpleLinear => &mut self.lower_c_simple_linear,
            ConstantId::TalagrandMeanCoeff => &mut self.talagrand_mean_coeff,
        }
    }

    /// Copy with one constant moved by `loosen_by` in relative terms: positive
    /// values loosen the affected bound, negative values tighten it.
    pub fn perturbed(&self, id: ConstantId, loosen_by: f64) -> Self {
        let mut out = *self;
        *out.slot_mut(id) *= 1.0 + id.loosening_direction() * loosen_by;
        out
    }

    pub fn is_default(&self) -> bool {
        *self == Self::default()
    }

    pub fn variance_factor(&self, p: &BoundParams) -> f64 {
        self.variance_vn_coeff * p.v_n + self.variance_mean_coeff * p.mean_z
    }

    /// Right end (exclusive) of the domain of the rational log-Laplace bound.
    pub fn rational_t_max(&self) -> f64 {
        self.rational_offset / self.rational_pole
    }

    pub fn upper_log_laplace(&self, t: f64, p: &BoundParams) -> Result<Saturating> {
        check_nonneg("upper_log_laplace_bound", "t", t)?;
        let inner = 0.5 * (2.0 * t).exp_m1();
        if inner > EXP_ARG_LIMIT {
            return Ok(Saturating::saturated());
        }
        let v = self.variance_factor(p);
        Ok(Saturating::from_raw(
            t * p.mean_z + self.upper_laplace_scale * t * v * inner.exp_m1(),
        ))
    }

    pub fn rational_log_laplace(&self, t: f64, p: &BoundParams) -> Result<f64> {
        check_nonneg("lemma34_log_laplace_bound", "t", t)?;
        let t_max = self.rational_t_max();
        if t >= t_max {
            return Err(domain(
                "lemma34_log_laplace_bound",
                format!("t must be below {t_max}, got {t}"),
            ));
        }
        let v = self.variance_factor(p);
        Ok(t * p.mean_z + v * t * t / (self.rational_offset - self.rational_pole * t))
    }

    /// Bound on `log E e^{−tZ} + tE(Z)`.
    pub fn lower_log_laplace(&self, t: f64, p: &BoundParams) -> Result<Saturating> {
        check_nonneg("lower_log_laplace_bound", "t", t)?;
        let rt = self.lower_laplace_rate * t;
        if rt > EXP_ARG_LIMIT {
            return Ok(Saturating::saturated());
        }
        let v = self.variance_factor(p);
        Ok(Saturating::from_raw(
            v / self.lower_laplace_divisor * (rt.exp_m1() - rt),
        ))
    }

    pub fn upper_tail(&self, x: f64, p: &BoundParams, form: TailForm) -> Result<f64> {
        let v = self.tail_preconditions("upper_tail_bound", x, p)?;
        if x == 0.0 {
            return Ok(1.0);
        }
        let exponent = match form {
            TailForm::FormB => x / self.upper_b_divisor * (self.upper_b_inner * (x / v).ln_1p()).ln_1p(),
            TailForm::FormCTight => {
                x * x / (v + (v * v + self.upper_c_tight_sqrt * v * x).sqrt() + self.upper_c_tight_linear * x)
            }
            TailForm::FormCSimple => x * x / (self.upper_c_simple_var * v + self.upper_c_simple_linear * x),
        };
        Ok((-exponent).exp())
    }

    pub fn lower_tail(&self, x: f64, p: &BoundParams, form: TailForm) -> Result<f64> {
        let v = self.tail_preconditions("lower_tail_bound", x, p)?;
        if x == 0.0 {
            return Ok(1.0);
        }
        let exponent = match form {
            TailForm::FormB => v / self.lower_b_divisor * bennett_h_unchecked(self.lower_b_inner * x / v),
            TailForm::FormCTight => {
                x * x / (v + (v * v + self.lower_c_tight_sqrt * v * x).sqrt() + self.lower_c_tight_linear * x)
            }
            TailForm::FormCSimple => x * x / (self.lower_c_simple_var * v + self.lower_c_simple_linear * x),
        };
        Ok((-exponent).exp())
    }

    pub fn tail(&self, x: f64, p: &BoundParams, form: TailForm, side: Side) -> Result<f64> {
        match side {
            Side::Upper => self.upper_tail(x, p, form),
            Side::Lower => self.lower_tail(x, p, form),
        }
    }

    fn tail_preconditions(&self, op: &'static str, x: f64, p: &BoundParams) -> Result<f64> {
        check_nonneg(op, "x", x)?;
        let v = self.variance_factor(p);
        if !(v > 0.0) {
            return Err(domain(op, format!("variance factor v must be positive, got {v}")));
        }
        Ok(v)
    }
}

fn check_nonneg(op: &'static str, name: &str, value: f64) -> Result<()> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(domain(op, format!("{name} must be finite and >= 0, got {value}")))
    }
}

fn bennett_h_unchecked(x: f64) -> f64 {
    if x == -1.0 {
        return 1.0;
    }
    if x.abs() < 1e-4 {
        // x²/2 − x³/6 + x⁴/12 − x⁵/20
        let x2 = x * x;
        return x2 * (0.5 - x / 6.0 + x2 / 12.0 - x2 * x / 20.0);
    }
    (1.0 + x) * x.ln_1p() - x
}

/// Bennett's rate function `h(x) = (1 + x) log(1 + x) − x` for `x ≥ −1`.
pub fn bennett_h(x: f64) -> Result<f64> {
    if !(x >= -1.0) || x.is_infinite() {
        return Err(domain("bennett_h", format!("x must be finite and >= -1, got {x}")));
    }
    Ok(bennett_h_unchecked(x))
}

/// `(ψ(t), φ(t))` with `ψ(t) = (e^{2t} + 1)/2` and `φ = ψ log ψ`.
pub fn proof_scalars(t: f64) -> Result<(f64, f64)> {
    check_nonneg("proof_scalars", "t", t)?;
    let half_excess = 0.5 * (2.0 * t).exp_m1();
    let psi = 1.0 + half_excess;
    Ok((psi, psi * half_excess.ln_1p()))
}

pub fn upper_log_laplace_bound(t: f64, p: &BoundParams) -> Result<Saturating> {
    BoundConstants::default().upper_log_laplace(t, p)
}

/// `tE(Z) + v t²/(2 − 3t)` for `0 ≤ t < 2/3`.
pub fn lemma34_log_laplace_bound(t: f64, p: &BoundParams) -> Result<f64> {
    BoundConstants::default().rational_log_laplace(t, p)
}

/// `(v/9)(e^{3t} − 3t − 1)`, a bound on `log E e^{−tZ} + tE(Z)`.
pub fn lower_log_laplace_bound(t: f64, p: &BoundParams) -> Result<Saturating> {
    BoundConstants::default().lower_log_laplace(t, p)
}

/// Talagrand-type bound `t·mean + V a b⁻² (e^{bt} − bt − 1)`.
#[allow(non_snake_case)]
pub fn generic_bennett_log_laplace(t: f64, mean_z: f64, V: f64, a: f64, b: f64) -> Result<Saturating> {
    check_nonneg("generic_bennett_log_laplace", "t", t)?;
    check_nonneg("generic_bennett_log_laplace", "V", V)?;
    if !(a > 0.0) || !(b > 0.0) {
        return Err(domain(
            "generic_bennett_log_laplace",
            format!("a and b must be positive, got a = {a}, b = {b}"),
        ));
    }
    let bt = b * t;
    if bt > EXP_ARG_LIMIT {
        return Ok(Saturating::saturated());
    }
    Ok(Saturating::from_raw(t * mean_z + V * a / (b * b) * (bt.exp_m1() - bt)))
}

/// Tail bound obtained from [`generic_bennett_log_laplace`] by the exact
/// Legendre transform: `exp(−(Va/b²) h(bx/(Va)))`.
#[allow(non_snake_case)]
pub fn generic_bennett_tail(x: f64, V: f64, a: f64, b: f64) -> Result<f64> {
    check_nonneg("generic_bennett_tail", "x", x)?;
    if !(V > 0.0) || !(a > 0.0) || !(b > 0.0) {
        return Err(domain(
            "generic_bennett_tail",
            format!("V, a, b must be positive, got V = {V}, a = {a}, b = {b}"),
        ));
    }
    let scale = V * a;
    Ok((-(scale / (b * b)) * bennett_h_unchecked(b * x / scale)).exp())
}

pub fn upper_tail_bound(x: f64, p: &BoundParams, form: TailForm) -> Result<f64> {
    BoundConstants::default().upper_tail(x, p, form)
}

pub fn lower_tail_bound(x: f64, p: &BoundParams, form: TailForm) -> Result<f64> {
    BoundConstants::default().lower_tail(x, p, form)
}

pub fn tail_bound(x: f64, p: &BoundParams, form: TailForm, side: Side) -> Result<f64> {
    BoundConstants::default().tail(x, p, form, side)
}

/// Median-centered bound `exp(−x²/(8V_n))` for Rademacher processes.
/// Not comparable to the mean-centered bounds except as a reference column.
pub fn rademacher_tail_bound(x: f64, v_n: f64) -> Result<f64> {
    check_nonneg("rademacher_tail_bound", "x", x)?;
    if !(v_n > 0.0) || !v_n.is_finite() {
        return Err(domain(
            "rademacher_tail_bound",
            format!("v_n must be positive, got {v_n}"),
        ));
    }
    Ok((-x * x / (8.0 * v_n)).exp())
}

/// Convex conjugate of `t ↦ t²/(2 − 3t)` on `[0, 2/3)`:
/// `(4/9)(1 + 3x/2 − √(1 + 3x))`.
pub fn legendre_lemma34(x: f64) -> Result<f64> {
    check_nonneg("legendre_lemma34", "x", x)?;
    // (4/9)·(9x²/4)/(1 + 3x/2 + √(1 + 3x)) avoids cancellation at small x
    Ok(x * x / (1.0 + 1.5 * x + (1.0 + 3.0 * x).sqrt()))
}

/// Variance bound `Var Z ≤ V_n + 2E(Z)`.
pub fn variance_upper_bound(v_n: f64, mean_z: f64) -> Result<f64> {
    Ok(BoundParams::new(mean_z, v_n)?.v())
}

/// Optimized Cramér–Chernoff bound and the minimizing `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChernoffTail {
    pub bound: f64,
    pub t_star: f64,
}

const CHERNOFF_GRID: usize = 96;
const LOWER_T_CAP: f64 = EXP_ARG_LIMIT / 3.0;

/// `inf_{t>0} exp(B(t) − t(E(Z) + x))` where `B` is the upper log-Laplace
/// bound (upper side) or the lower one (lower side, centred at `−E(Z)`).
pub fn chernoff_optimized_tail(x: f64, p: &BoundParams, side: Side) -> Result<ChernoffTail> {
    let c = BoundConstants::default();
    c.tail_preconditions("chernoff_optimized_tail", x, p)?;
    if x == 0.0 {
        return Ok(ChernoffTail {
            bound: 1.0,
            t_star: 0.0,
        });
    }
    // Exponent with the tE(Z) terms cancelled; both objectives are convex.
    let objective = |t: f64| -> f64 {
        let b = match side {
            Side::Upper => c.upper_log_laplace(t, p).map(|s| s.value - t * p.mean_z()),
            Side::Lower => c.lower_log_laplace(t, p).map(|s| s.value),
        };
        match b {
            Ok(b) if b < f64::MAX => b - t * x,
            _ => f64::INFINITY,
        }
    };
    let t_cap = match side {
        Side::Upper => upper_saturation_t(),
        Side::Lower => LOWER_T_CAP,
    };
    // Log-spaced scan: the minimizer ranges from ~x/v for small x up to the cap.
    let t_lo = 1e-12_f64;
    let ratio = (t_cap / t_lo).powf(1.0 / (CHERNOFF_GRID - 1) as f64);
    let nodes: Vec<f64> = (0..CHERNOFF_GRID)
        .map(|i| {
            if i + 1 == CHERNOFF_GRID {
                t_cap
            } else {
                t_lo * ratio.powi(i as i32)
            }
        })
        .collect();
    let (best, _) = nodes
        .iter()
        .enumerate()
        .map(|(i, &t)| (i, objective(t)))
        .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
    let lo = if best == 0 { 0.0 } else { nodes[best - 1] };
    let hi = nodes[(best + 1).min(CHERNOFF_GRID - 1)];
    let (t_star, f_star) = golden_section(&objective, lo, hi, 1e-15 * hi.max(1e-300));
    if f_star >= 0.0 {
        return Ok(ChernoffTail {
            bound: 1.0,
            t_star: 0.0,
        });
    }
    Ok(ChernoffTail {
        bound: f_star.exp(),
        t_star,
    })
}

/// Deviation `x ≥ 0` at which the chosen tail bound equals `delta`.
pub fn invert_tail_bound(delta: f64, p: &BoundParams, form: TailForm, side: Side) -> Result<f64> {
    BoundConstants::default().invert_tail(delta, p, form, side)
}

impl BoundConstants {
    pub fn invert_tail(&self, delta: f64, p: &BoundParams, form: TailForm, side: Side) -> Result<f64> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(domain(
                "invert_tail_bound",
                format!("delta must lie in (0, 1), got {delta}"),
            ));
        }
        let v = self.tail_preconditions("invert_tail_bound", 0.0, p)?;
        let level = -delta.ln();
        if form == TailForm::FormCSimple {
            let (var, lin) = match side {
                Side::Upper => (self.upper_c_simple_var, self.upper_c_simple_linear),
                Side::Lower => (self.lower_c_simple_var, self.lower_c_simple_linear),
            };
            // x² = L(var·v + lin·x)
            let b = lin * level;
            return Ok(0.5 * (b + (b * b + 4.0 * var * v * level).sqrt()));
        }
        self.invert_tail_bisect(delta, p, form, side)
    }

    /// Inversion by bracketed bisection on the log of the bound; the bracket
    /// starts at `[0, v]` and doubles until it encloses the level.
    pub fn invert_tail_bisect(&self, delta: f64, p: &BoundParams, form: TailForm, side: Side) -> Result<f64> {
        let v = self.tail_preconditions("invert_tail_bound", 0.0, p)?;
        let level = delta.ln();
        let g = |x: f64| -> f64 { self.tail(x, p, form, side).map(|b| b.ln() - level).unwrap_or(f64::NAN) };
        let mut hi = v;
        while g(hi) > 0.0 {
            hi *= 2.0;
            if !hi.is_finite() {
                return Err(domain("invert_tail_bound", "bracket growth overflowed"));
            }
        }
        bisect(g, 0.0, hi, 0.0_f64.max(f64::EPSILON * hi * 0.25))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn params(mean_z: f64, v_n: f64) -> BoundParams {
        BoundParams::new(mean_z, v_n).unwrap()
    }

    // v = 1 with E(Z) = 0
    fn unit() -> BoundParams {
        params(0.0, 1.0)
    }

    #[test]
    fn params_derive_v() {
        let p = params(1.0, 2.0);
        assert_eq!(p.v(), 4.0);
        assert!(BoundParams::new(-0.1, 1.0).is_err());
        assert!(BoundParams::new(0.0, f64::NAN).is_err());
    }

    #[test]
    fn bennett_h_values() {
        assert_eq!(bennett_h(0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(bennett_h(3.0).unwrap(), 2.545_177_444_479_562_5, epsilon = 1e-14);
        assert_abs_diff_eq!(bennett_h(1.0).unwrap(), 0.386_294_361_119_890_6, epsilon = 1e-15);
        assert_eq!(bennett_h(-1.0).unwrap(), 1.0);
        assert!(bennett_h(-1.5).is_err());
        // series branch: h(x) ≈ x²/2 at tiny x with no cancellation
        let x = 1e-9;
        assert!((bennett_h(x).unwrap() / (x * x / 2.0) - 1.0).abs() < 1e-8);
        // continuity across the series switch
        let a = bennett_h(0.999_99e-4).unwrap();
        let b = bennett_h(1.000_01e-4).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn proof_scalar_values() {
        assert_eq!(proof_scalars(0.0).unwrap(), (1.0, 0.0));
        let (psi, phi) = proof_scalars(0.5).unwrap();
        assert_abs_diff_eq!(psi, 1.859_140_914_229_522_6, epsilon = 1e-14);
        assert_abs_diff_eq!(phi, 1.152_880_251_393_401_7, epsilon = 1e-14);
        assert!(proof_scalars(-0.1).is_err());
    }

    #[test]
    fn upper_log_laplace_values() {
        assert_eq!(upper_log_laplace_bound(0.0, &params(3.0, 2.0)).unwrap().value, 0.0);
        let a = upper_log_laplace_bound(0.5, &unit()).unwrap();
        assert!(!a.saturated);
        assert_abs_diff_eq!(a.value, 0.340_282_851_942_655_6, epsilon = 1e-14);
        // mean 1, v = 3 (V_n = 1)
        let b = upper_log_laplace_bound(0.5, &params(1.0, 1.0)).unwrap();
        assert_abs_diff_eq!(b.value, 1.520_848_555_827_966_7, epsilon = 1e-13);
    }

    #[test]
    fn upper_log_laplace_saturates() {
        let s = upper_log_laplace_bound(4.0, &unit()).unwrap();
        assert!(s.saturated);
        assert_eq!(s.value, f64::MAX);
        let below = upper_log_laplace_bound(upper_saturation_t() * 0.999, &unit()).unwrap();
        assert!(!below.saturated && below.value.is_finite());
    }

    #[test]
    fn rational_bound_values() {
        assert_eq!(lemma34_log_laplace_bound(0.0, &unit()).unwrap(), 0.0);
        assert_abs_diff_eq!(lemma34_log_laplace_bound(0.5, &unit()).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(lemma34_log_laplace_bound(0.6, &unit()).unwrap(), 1.8, epsilon = 1e-13);
        assert!(lemma34_log_laplace_bound(2.0 / 3.0, &unit()).is_err());
        assert!(lemma34_log_laplace_bound(0.5, &unit()).unwrap() >= 0.340_282);
    }

    #[test]
    fn lower_log_laplace_values() {
        assert_eq!(lower_log_laplace_bound(0.0, &unit()).unwrap().value, 0.0);
        assert_abs_diff_eq!(
            lower_log_laplace_bound(0.5, &unit()).unwrap().value,
            0.220_187_674_482_007_2,
            epsilon = 1e-15
        );
        // v = 9
        assert_abs_diff_eq!(
            lower_log_laplace_bound(1.0, &params(0.0, 9.0)).unwrap().value,
            16.085_536_923_187_668,
            epsilon = 1e-12
        );
        assert!(lower_log_laplace_bound(300.0, &unit()).unwrap().saturated);
    }

    #[test]
    fn generic_bennett_values() {
        assert_eq!(generic_bennett_log_laplace(0.0, 2.0, 1.0, 1.0, 1.0).unwrap().value, 0.0);
        assert_abs_diff_eq!(
            generic_bennett_log_laplace(1.0, 0.0, 1.0, 1.0, 1.0).unwrap().value,
            std::f64::consts::E - 2.0,
            epsilon = 1e-15
        );
        let b3 = generic_bennett_log_laplace(1.0, 0.0, 1.0, 1.0, 3.0).unwrap().value;
        assert_abs_diff_eq!(b3, 1.787_281_880_354_185_3, epsilon = 1e-14);
        assert_abs_diff_eq!(
            b3,
            lower_log_laplace_bound(1.0, &unit()).unwrap().value,
            epsilon = 1e-14
        );
        assert!(generic_bennett_log_laplace(1.0, 0.0, 1.0, 0.0, 1.0).is_err());
        assert!(generic_bennett_log_laplace(1.0, 0.0, 1.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn generic_bennett_tail_matches_numeric_legendre() {
        for &(x, vv, a, b) in &[(1.0, 1.0, 1.0, 1.0), (0.3, 2.0, 1.0, 1.5), (5.0, 0.7, 8.0, 1.0)] {
            let closed = generic_bennett_tail(x, vv, a, b).unwrap();
            let obj = |t: f64| generic_bennett_log_laplace(t, 0.0, vv, a, b).unwrap().value - t * x;
            let (_, f) = crate::numerics::minimize_scalar(obj, 0.0, 20.0, 1e-13).unwrap();
            assert_abs_diff_eq!(closed, f.exp(), epsilon = 1e-10);
        }
    }

    #[test]
    fn upper_tail_values() {
        for form in TailForm::ALL {
            assert_eq!(upper_tail_bound(0.0, &unit(), form).unwrap(), 1.0);
            assert_eq!(lower_tail_bound(0.0, &unit(), form).unwrap(), 1.0);
        }
        let p = unit();
        assert_abs_diff_eq!(
            upper_tail_bound(1.0, &p, TailForm::FormCSimple).unwrap(),
            0.818_730_753_077_981_9,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            upper_tail_bound(1.0, &p, TailForm::FormCTight).unwrap(),
            0.800_737_402_916_808,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            upper_tail_bound(1.0, &p, TailForm::FormB).unwrap(),
            0.804_579_561_744_783_7,
            epsilon = 1e-15
        );
        assert!(upper_tail_bound(1.0, &params(0.0, 0.0), TailForm::FormB).is_err());
        assert!(upper_tail_bound(-1.0, &p, TailForm::FormB).is_err());
    }

    #[test]
    fn lower_tail_values() {
        let p = unit();
        assert_abs_diff_eq!(
            lower_tail_bound(1.0, &p, TailForm::FormB).unwrap(),
            0.753_672_395_716_67,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            lower_tail_bound(1.0, &p, TailForm::FormCSimple).unwrap(),
            0.778_800_783_071_404_9,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            lower_tail_bound(1.0, &p, TailForm::FormCTight).unwrap(),
            0.764_946_645_194_923_8,
            epsilon = 1e-15
        );
    }

    #[test]
    fn rademacher_values() {
        assert_eq!(rademacher_tail_bound(0.0, 1.0).unwrap(), 1.0);
        assert_abs_diff_eq!(
            rademacher_tail_bound(2.0, 1.0).unwrap(),
            (-0.5f64).exp(),
            epsilon = 1e-16
        );
        assert_abs_diff_eq!(
            rademacher_tail_bound(4.0, 2.0).unwrap(),
            (-1.0f64).exp(),
            epsilon = 1e-16
        );
        assert!(rademacher_tail_bound(1.0, 0.0).is_err());
    }

    #[test]
    fn legendre_values() {
        assert_eq!(legendre_lemma34(0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(legendre_lemma34(1.0).unwrap(), 2.0 / 9.0, epsilon = 1e-16);
        assert_abs_diff_eq!(legendre_lemma34(8.0).unwrap(), 32.0 / 9.0, epsilon = 1e-15);
        // literal form, away from cancellation
        let x = 3.7;
        let literal = 4.0 / 9.0 * (1.0 + 1.5 * x - (1.0_f64 + 3.0 * x).sqrt());
        assert_abs_diff_eq!(legendre_lemma34(x).unwrap(), literal, epsilon = 1e-14);
    }

    #[test]
    fn variance_bound_values() {
        assert_eq!(variance_upper_bound(0.0, 0.0).unwrap(), 0.0);
        assert_eq!(variance_upper_bound(2.0, 0.0).unwrap(), 2.0);
        assert_eq!(variance_upper_bound(2.0, 1.0).unwrap(), 4.0);
    }

    #[test]
    fn chernoff_examples() {
        assert_eq!(
            chernoff_optimized_tail(0.0, &unit(), Side::Upper).unwrap(),
            ChernoffTail {
                bound: 1.0,
                t_star: 0.0
            }
        );
        let up = chernoff_optimized_tail(1.0, &unit(), Side::Upper).unwrap();
        assert!(up.bound <= 0.800_737_402_916_808);
        assert!(up.t_star > 0.0);
        let low = chernoff_optimized_tail(1.0, &unit(), Side::Lower).unwrap();
        assert!(low.bound <= 0.764_946_645_194_923_8);
        // the lower-side optimum is exactly the h-form bound at t* = log(1 + 3x/v)/3
        assert_abs_diff_eq!(low.bound, 0.753_672_395_716_67, epsilon = 1e-13);
        assert_abs_diff_eq!(low.t_star, (4.0f64).ln() / 3.0, epsilon = 1e-6);
    }

    #[test]
    fn inversion_examples() {
        let x = invert_tail_bound((-0.2f64).exp(), &unit(), TailForm::FormCSimple, Side::Upper).unwrap();
        assert_abs_diff_eq!(x, 1.0, epsilon = 1e-14);
        let x = invert_tail_bound((-0.25f64).exp(), &unit(), TailForm::FormCSimple, Side::Lower).unwrap();
        assert_abs_diff_eq!(x, 1.0, epsilon = 1e-14);
        let x = invert_tail_bound(1.0 - 1e-12, &unit(), TailForm::FormB, Side::Upper).unwrap();
        assert!(x < 1e-3);
        assert!(invert_tail_bound(1.0, &unit(), TailForm::FormB, Side::Upper).is_err());
        assert!(invert_tail_bound(0.0, &unit(), TailForm::FormB, Side::Upper).is_err());
    }

    #[test]
    fn closed_quadratic_matches_bisection() {
        let c = BoundConstants::default();
        for side in [Side::Upper, Side::Lower] {
            for &delta in &[0.9, 0.5, 1e-3, 1e-30] {
                let p = params(0.4, 1.3);
                let closed = c.invert_tail(delta, &p, TailForm::FormCSimple, side).unwrap();
                let bis = c.invert_tail_bisect(delta, &p, TailForm::FormCSimple, side).unwrap();
                assert!(
                    (closed - bis).abs() <= 1e-12 * closed.max(1.0),
                    "{side} {delta}: {closed} vs {bis}"
                );
            }
        }
    }

    #[test]
    fn constants_lookup_and_perturbation() {
        let c = BoundConstants::default();
        assert!(c.is_default());
        for id in ConstantId::ALL {
            assert_eq!(id.as_str().parse::<ConstantId>().unwrap(), id);
            let looser = c.perturbed(id, 0.05);
            let expected = c.get(id) * (1.0 + 0.05 * id.loosening_direction());
            assert_eq!(looser.get(id), expected);
            assert!(!looser.is_default());
        }
        assert!("nope".parse::<ConstantId>().is_err());
        let tightened = c.perturbed(ConstantId::UpperCSimpleLinear, -0.05);
        assert_abs_diff_eq!(tightened.upper_c_simple_linear, 2.85, epsilon = 1e-15);
    }
}

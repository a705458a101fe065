//! Exact second and third moments for delta initial data.
//!
//! Every routine works in log space: the third moment grows like
//! `exp(λ⁴t/ν)` and the intermediate `exp(·)·erfc(·)` products are formed as
//! `erfcx` values with the exponent carried separately.

use std::cell::Cell;
use std::f64::consts::{LN_2, PI, SQRT_2};

use crate::error::{domain, ensure_finite, ensure_nonnegative, ensure_positive, PamError, Result};
use crate::logvalue::LogValue;
use crate::quadrature::{
    integrate_semi_infinite, integrate_semi_infinite_with, ErrorNorm, GaussianDecay,
    QuadratureConfig,
};
use crate::specfun::{raw, LN_2PI};

/// Diffusion `ν`, noise intensity `λ` and time `t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    pub nu: f64,
    pub lambda: f64,
    pub t: f64,
}

impl ModelParams {
    pub fn new(nu: f64, lambda: f64, t: f64) -> Result<Self> {
        let p = ModelParams { nu, lambda, t };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("nu", self.nu)?;
        ensure_finite("lambda", self.lambda)?;
        ensure_positive("t", self.t)
    }

    pub fn at_time(&self, t: f64) -> Result<Self> {
        ModelParams::new(self.nu, self.lambda, t)
    }

    /// `λ²`
    pub fn l2(&self) -> f64 {
        self.lambda * self.lambda
    }

    /// `λ⁴t/ν`, the exponential growth of the third moment.
    pub fn growth_exponent(&self) -> f64 {
        self.l2() * self.l2() * self.t / self.nu
    }
}

/// Three spatial points. Formulas sort them before use.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TriplePoint {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
}

impl TriplePoint {
    pub fn new(x1: f64, x2: f64, x3: f64) -> Result<Self> {
        ensure_finite("x1", x1)?;
        ensure_finite("x2", x2)?;
        ensure_finite("x3", x3)?;
        Ok(TriplePoint { x1, x2, x3 })
    }

    pub fn coincident(x: f64) -> Result<Self> {
        Self::new(x, x, x)
    }

    pub fn sorted(&self) -> [f64; 3] {
        let mut v = [self.x1, self.x2, self.x3];
        v.sort_by(f64::total_cmp);
        v
    }
}

/// Admissible range `0 ≤ a ≤ Φ(λ²√(t/2ν)) ≤ b ≤ 1` of the mean-value constants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ABRange {
    pub a_lo: f64,
    pub a_hi: f64,
    pub b_lo: f64,
    pub b_hi: f64,
}

impl ABRange {
    pub fn for_params(p: &ModelParams) -> Result<Self> {
        p.validate()?;
        let pivot = raw::phi(p.l2() * (p.t / (2.0 * p.nu)).sqrt());
        Ok(ABRange {
            a_lo: 0.0,
            a_hi: pivot,
            b_lo: pivot,
            b_hi: 1.0,
        })
    }

    pub fn contains(&self, a: f64, b: f64) -> bool {
        (self.a_lo..=self.a_hi).contains(&a) && (self.b_lo..=self.b_hi).contains(&b)
    }
}

/// A moment value with the quadrature error attached.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentValue {
    pub value: LogValue,
    /// Error estimate relative to `value`.
    pub rel_err: f64,
    pub evals: usize,
}

impl MomentValue {
    fn exact(value: LogValue) -> Self {
        MomentValue {
            value,
            rel_err: 0.0,
            evals: 0,
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.value.to_f64()
    }

    pub fn ln(&self) -> f64 {
        self.value.log_abs()
    }
}

/// Lower and upper bounds on the third moment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThirdMomentBounds {
    pub lower: LogValue,
    pub upper: LogValue,
}

/// `ln(exp(a) erfc(z))` where `a - z²` is supplied separately so that the
/// large exponents cancel analytically when `z > 0`.
fn ln_exp_erfc(a: f64, a_minus_z2: f64, z: f64) -> f64 {
    if z > 0.0 {
        a_minus_z2 + raw::ln_erfcx(z)
    } else {
        a + raw::erfc(z).ln()
    }
}

/// `E[u(t,x₁)u(t,x₂)]` in log form.
pub fn second_moment_two_point_log(p: &ModelParams, x1: f64, x2: f64) -> Result<LogValue> {
    p.validate()?;
    ensure_finite("x1", x1)?;
    ensure_finite("x2", x2)?;
    let (nu, t, l2) = (p.nu, p.t, p.l2());
    let product =
        LogValue::from_ln(raw::ln_heat_kernel(nu, t, x1) + raw::ln_heat_kernel(nu, t, x2));
    if l2 == 0.0 {
        return Ok(product);
    }
    let d = (x2 - x1).abs();
    let a = (t * l2 * l2 - 2.0 * l2 * d) / (4.0 * nu);
    let w = (d - t * l2) / (2.0 * (nu * t).sqrt());
    let ln_tail = ln_exp_erfc(a, -d * d / (4.0 * nu * t), w);
    let ln_corr =
        (l2 / (4.0 * nu)).ln() + raw::ln_heat_kernel(nu / 2.0, t, 0.5 * (x1 + x2)) + ln_tail;
    Ok(product + LogValue::from_ln(ln_corr))
}

pub fn second_moment_two_point(p: &ModelParams, x1: f64, x2: f64) -> Result<f64> {
    second_moment_two_point_log(p, x1, x2).map(LogValue::to_f64)
}

/// `E[u(t,x)²]`, taken as the two-point formula on the diagonal.
pub fn second_moment_log(p: &ModelParams, x: f64) -> Result<LogValue> {
    second_moment_two_point_log(p, x, x)
}

pub fn second_moment(p: &ModelParams, x: f64) -> Result<f64> {
    second_moment_log(p, x).map(LogValue::to_f64)
}

/// The one-point expression
/// `G_{ν/2}(t,x)(λ²/√(4πνt) + (λ⁴/2ν) e^{λ⁴t/4ν} Φ(λ²√(t/2ν)))`.
///
/// It agrees with [`second_moment`] only when `λ² = 1`; the diagonal of the
/// two-point formula carries `1/√(4πνt)` and `λ²/2ν` in place of the two
/// coefficients.
pub fn second_moment_display_log(p: &ModelParams, x: f64) -> Result<LogValue> {
    p.validate()?;
    ensure_finite("x", x)?;
    let (nu, t, l2) = (p.nu, p.t, p.l2());
    let first = LogValue::from_f64(l2 / (4.0 * PI * nu * t).sqrt());
    let second = LogValue::from_f64(l2 * l2 / (2.0 * nu))
        .scale_ln(l2 * l2 * t / (4.0 * nu) + raw::ln_phi(l2 * (t / (2.0 * nu)).sqrt()));
    Ok((first + second).scale_ln(raw::ln_heat_kernel(nu / 2.0, t, x)))
}

pub fn second_moment_display(p: &ModelParams, x: f64) -> Result<f64> {
    second_moment_display_log(p, x).map(LogValue::to_f64)
}

fn check_s(s: [f64; 3]) -> Result<()> {
    for (i, v) in s.iter().enumerate() {
        if !(v.is_finite() && *v >= 0.0) {
            return Err(domain(format!(
                "s{} must be nonnegative and finite, got {v}",
                i + 1
            )));
        }
    }
    Ok(())
}

/// Polynomial factor and exponent of the triple-integral integrand for sorted
/// points, without the constant prefactor.
#[inline]
fn triple_parts(l2n: f64, two_q2: f64, y: &[f64; 3], s1: f64, s2: f64, s3: f64) -> (f64, f64) {
    let [y1, y2, y3] = *y;
    let poly = (-s1 + s2 + 2.0 * s3 + (y3 - y2))
        * (s1 + 2.0 * s2 + s3 + (y3 - y1))
        * (2.0 * s1 + s2 - s3 + (y2 - y1));
    let a = y3 + s2 + s3;
    let b = y2 + s1 - s3;
    let c = y1 - s1 - s2;
    let expo = l2n * (s1 + s2 + s3) - (a * a + b * b + c * c) / two_q2;
    (poly, expo)
}

fn ln_triple_prefactor(q2: f64) -> f64 {
    -4.5 * q2.ln() - 1.5 * LN_2PI
}

/// Integrand of the triple-integral third-moment formula in log form.
pub fn third_moment_integrand_3d_log(
    p: &ModelParams,
    xs: &TriplePoint,
    s1: f64,
    s2: f64,
    s3: f64,
) -> Result<LogValue> {
    p.validate()?;
    check_s([s1, s2, s3])?;
    let y = xs.sorted();
    let q2 = p.nu * p.t;
    let (poly, expo) = triple_parts(p.l2() / p.nu, 2.0 * q2, &y, s1, s2, s3);
    Ok(LogValue::from_f64(poly).scale_ln(expo + ln_triple_prefactor(q2)))
}

pub fn third_moment_integrand_3d(
    p: &ModelParams,
    xs: &TriplePoint,
    s1: f64,
    s2: f64,
    s3: f64,
) -> Result<f64> {
    third_moment_integrand_3d_log(p, xs, s1, s2, s3).map(LogValue::to_f64)
}

/// `E[u(t,x₁)u(t,x₂)u(t,x₃)]` by iterated adaptive quadrature of the
/// triple integral (innermost `s₃`, then `s₂`, then `s₁`).
///
/// Inner levels run at `rel_tol/10` measured against the integral of the
/// absolute value, since the polynomial factor changes sign.
pub fn third_moment_three_point_log(
    p: &ModelParams,
    xs: &TriplePoint,
    cfg: &QuadratureConfig,
) -> Result<MomentValue> {
    p.validate()?;
    cfg.validate()?;
    let y = xs.sorted();
    let (nu, t, l2) = (p.nu, p.t, p.l2());
    if l2 == 0.0 {
        let ln: f64 = y.iter().map(|&x| raw::ln_heat_kernel(nu, t, x)).sum();
        return Ok(MomentValue::exact(LogValue::from_ln(ln)));
    }
    let q2 = nu * t;
    let two_q2 = 2.0 * q2;
    let l2n = l2 / nu;
    let shift = p.growth_exponent();
    let inner = QuadratureConfig {
        rel_tol: cfg.rel_tol / 10.0,
        ..*cfg
    };
    let spread = y[2] - y[0];
    let outer_decay = GaussianDecay::new(l2 * t + spread, (2.0 * q2).sqrt());

    let failure: Cell<Option<PamError>> = Cell::new(None);
    let evals = Cell::new(0usize);
    let record = |r: Result<crate::quadrature::Integral>| -> f64 {
        match r {
            Ok(v) => {
                evals.set(evals.get() + v.evals);
                v.value
            }
            Err(e) => {
                let prev = failure.take();
                failure.set(prev.or(Some(e)));
                0.0
            }
        }
    };

    let inner_s3 = |s1: f64, s2: f64| -> f64 {
        let c3 = 0.5 * (l2 * t + y[1] + s1 - y[2] - s2);
        let r = integrate_semi_infinite_with(
            |s3| {
                let (poly, expo) = triple_parts(l2n, two_q2, &y, s1, s2, s3);
                poly * (expo - shift).exp()
            },
            GaussianDecay::new(c3, q2.sqrt()),
            &inner,
            ErrorNorm::L1,
        );
        record(r)
    };
    let middle_s2 = |s1: f64| -> f64 {
        let r =
            integrate_semi_infinite_with(|s2| inner_s3(s1, s2), outer_decay, &inner, ErrorNorm::L1);
        record(r)
    };
    let outer = integrate_semi_infinite(middle_s2, outer_decay, cfg);
    if let Some(e) = failure.take() {
        return Err(e);
    }
    let outer = outer?;
    if outer.value.is_nan() || outer.value <= 0.0 {
        return Err(PamError::Accuracy(format!(
            "triple integral returned a non-positive value {}",
            outer.value
        )));
    }
    // nested errors enter at most at the inner tolerance level
    let rel_err = outer.err_est / outer.value.abs() + 2.0 * inner.rel_tol * outer.l1 / outer.value;
    Ok(MomentValue {
        value: LogValue::from_f64(outer.value).scale_ln(shift + ln_triple_prefactor(q2)),
        rel_err,
        evals: evals.get() + outer.evals,
    })
}

pub fn third_moment_three_point(
    p: &ModelParams,
    xs: &TriplePoint,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    third_moment_three_point_log(p, xs, cfg).map(|m| m.to_f64())
}

/// `ln` of the closed term `(2πνt)^{-3/2} e^{-3x²/2νt}`.
fn ln_heat_cubed(p: &ModelParams, x: f64) -> f64 {
    let q2 = p.nu * p.t;
    -1.5 * (LN_2PI + q2.ln()) - 1.5 * x * x / q2
}

/// `E[u(t,x)³]` through the single-integral formula.
///
/// The integral is truncated at `2λ²t + 4√(νt log(1/ε))` with
/// `ε = rel_tol/100`, then extended by tail panels until they are negligible.
pub fn third_moment_log(p: &ModelParams, x: f64, cfg: &QuadratureConfig) -> Result<MomentValue> {
    p.validate()?;
    cfg.validate()?;
    ensure_finite("x", x)?;
    let (nu, t, l2) = (p.nu, p.t, p.l2());
    let c1 = LogValue::from_ln(ln_heat_cubed(p, x));
    if l2 == 0.0 {
        return Ok(MomentValue::exact(c1));
    }
    let q2 = nu * t;
    let gauss = -1.5 * x * x / q2;
    let quarter = l2 * l2 * t / (4.0 * nu);
    let c2 = LogValue::from_ln(
        (l2 / (2.0 * SQRT_2 * PI * nu * nu * t)).ln()
            + quarter
            + raw::ln_phi(l2 * (t / (2.0 * nu)).sqrt())
            + gauss,
    );

    let big_l = l2 * t;
    let root = (2.0 * q2).sqrt();
    let second_shift = -2.0 * l2 * l2 * t / (3.0 * nu);
    // integrand divided by exp(3λ⁴t/4ν)
    let integrand = |s: f64| {
        let d1 = s - big_l;
        let d2 = s - big_l / 3.0;
        let a = (3.0 * s + big_l) * (-0.75 * d1 * d1 / q2).exp() * raw::phi((big_l + s) / root);
        let b = (3.0 * s - big_l)
            * (second_shift - 0.75 * d2 * d2 / q2).exp()
            * raw::phi((big_l - s) / root);
        a + b
    };
    let eps = cfg.rel_tol / 100.0;
    let mut qcfg = *cfg;
    qcfg.truncation_margin = cfg.truncation_margin.max(4.0 * (1.0 / eps).ln().sqrt());
    let decay = GaussianDecay::new(2.0 * big_l, q2.sqrt());
    let integral = integrate_semi_infinite(integrand, decay, &qcfg)?;
    let ln_pref =
        (l2 / (2f64.powf(2.5) * PI * nu.powi(3) * t * t)).ln() + quarter + 3.0 * quarter + gauss;
    let body = LogValue::from_f64(integral.value).scale_ln(ln_pref);
    let total = c1 + c2 + body;
    if !total.is_positive() {
        return Err(PamError::Accuracy(format!(
            "third moment evaluated to {total}"
        )));
    }
    let share = (body / total).to_f64().abs();
    let rel_err = if integral.value != 0.0 {
        integral.err_est / integral.value.abs() * share
    } else {
        0.0
    };
    Ok(MomentValue {
        value: total,
        rel_err,
        evals: integral.evals,
    })
}

pub fn third_moment(p: &ModelParams, x: f64, cfg: &QuadratureConfig) -> Result<f64> {
    third_moment_log(p, x, cfg).map(|m| m.to_f64())
}

/// The four-term mean-value expression for given constants `a`, `b`.
pub fn third_moment_mean_value_form_log(
    p: &ModelParams,
    x: f64,
    a: f64,
    b: f64,
) -> Result<LogValue> {
    p.validate()?;
    ensure_finite("x", x)?;
    let range = ABRange::for_params(p)?;
    if !range.contains(a, b) {
        return Err(domain(format!(
            "(a, b) = ({a}, {b}) outside 0 <= a <= {} <= b <= 1",
            range.a_hi
        )));
    }
    let (nu, t, l2) = (p.nu, p.t, p.l2());
    let q2 = nu * t;
    let gauss = -1.5 * x * x / q2;
    let t1 = LogValue::from_ln(ln_heat_cubed(p, x));
    if l2 == 0.0 {
        return Ok(t1);
    }
    let ln_k = (l2 / (2.0 * SQRT_2 * PI * nu * nu * t)).ln() + l2 * l2 * t / (4.0 * nu) + gauss;
    let t2 = LogValue::from_f64(b - a).scale_ln(ln_k);
    let t3 = LogValue::from_ln(ln_k + range.a_hi.ln());
    let t4 = LogValue::from_f64(b).scale_ln(
        (SQRT_2 * l2 * l2 / (3.0 * PI * nu.powi(5) * t).sqrt()).ln()
            + p.growth_exponent()
            + raw::ln_phi(l2 * (1.5 * t / nu).sqrt())
            + gauss,
    );
    Ok(t1 + t2 + t3 + t4)
}

/// Bounds from the mean-value form at the extreme admissible constants:
/// `a = b = Φ(λ²√(t/2ν))` for the lower bound and `a = 0, b = 1` for the upper.
pub fn third_moment_bounds(p: &ModelParams, x: f64) -> Result<ThirdMomentBounds> {
    let range = ABRange::for_params(p)?;
    let lower = third_moment_mean_value_form_log(p, x, range.a_hi, range.b_lo)?;
    let upper = third_moment_mean_value_form_log(p, x, range.a_lo, range.b_hi)?;
    Ok(ThirdMomentBounds { lower, upper })
}

/// A signed sum together with the sum of the magnitudes of its terms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SignedSum {
    pub value: LogValue,
    pub term_scale: LogValue,
}

impl SignedSum {
    fn of(terms: &[LogValue]) -> Self {
        let abs: Vec<LogValue> = terms.iter().map(|t| t.abs()).collect();
        SignedSum {
            value: LogValue::sum_slice(terms),
            term_scale: LogValue::sum_slice(&abs),
        }
    }
}

struct IPieces {
    q: f64,
    big_l: f64,
    spt: f64,
    /// `ln(exp(zp²) erfc(zp))`, `zp = (s₁+λ²t)/2q`
    ln_ep_e1: f64,
    /// `ln(exp(z3²) erfc(z3))`, `z3 = (λ²t-s₁)/2q`
    ln_em_e3: f64,
    /// `z3²`
    ln_em: f64,
    ln_pref: f64,
}

fn i_pieces(s1: f64, p: &ModelParams) -> IPieces {
    let (nu, t, l2) = (p.nu, p.t, p.l2());
    let q = (nu * t).sqrt();
    let big_l = l2 * t;
    let zp = (s1 + big_l) / (2.0 * q);
    let z3 = (big_l - s1) / (2.0 * q);
    IPieces {
        q,
        big_l,
        spt: (PI * nu * t).sqrt(),
        ln_ep_e1: raw::ln_erfcx(zp),
        ln_em_e3: raw::ln_erfcx(z3),
        ln_em: z3 * z3,
        ln_pref: (l2 * nu * t * t / 16.0).ln(),
    }
}

fn check_i_args(r: f64, s1: f64, p: &ModelParams) -> Result<()> {
    p.validate()?;
    ensure_nonnegative("r", r)?;
    ensure_nonnegative("s1", s1)
}

/// The closed-form antiderivative `I(r)` with its term magnitudes.
///
/// Terms are grouped by exponential factor; each `exp(·)·erfc(·)` product is
/// formed through `erfcx`.
pub fn antideriv_i_parts(r: f64, s1: f64, p: &ModelParams) -> Result<SignedSum> {
    check_i_args(r, s1, p)?;
    if p.l2() == 0.0 {
        return Ok(SignedSum {
            value: LogValue::ZERO,
            term_scale: LogValue::ZERO,
        });
    }
    let (nu, t) = (p.nu, p.t);
    let k = i_pieces(s1, p);
    let (q, big_l, spt) = (k.q, k.big_l, k.spt);
    let q2 = q * q;
    let z3 = (big_l - s1) / (2.0 * q);
    let z2 = (2.0 * r + s1 - big_l) / (2.0 * q);
    let z4 = (-r + s1 + big_l) / (2.0 * q);
    // exponent shared by exp(·)erfc(z4)/erfcx(z4) and the last term
    let d = -r * (r + s1 - big_l) / q2;
    let ln_em_e2 = ln_exp_erfc(k.ln_em, -r * r / q2 + 2.0 * r * z3 / q, z2);
    let ln_er_e4 = ln_exp_erfc(d + z4 * z4, d, z4);

    let lv = LogValue::from_f64;
    let ln = LogValue::from_ln;
    let terms = [
        lv(-spt * (4.0 * big_l + 12.0 * s1)) * ln(k.ln_ep_e1),
        lv(spt * (5.0 * big_l + 3.0 * s1)) * ln(ln_em_e2),
        lv(spt * (5.0 * big_l + 3.0 * s1)) * ln(k.ln_em_e3),
        lv(spt * (4.0 * (3.0 * r + big_l) + 12.0 * s1)) * ln(ln_er_e4),
        lv(-spt * (6.0 * s1 + 10.0 * big_l)) * ln(k.ln_em),
        lv(-6.0 * t * nu),
        lv(6.0 * t * nu) * ln(d),
    ];
    let mut s = SignedSum::of(&terms);
    s.value = s.value.scale_ln(k.ln_pref);
    s.term_scale = s.term_scale.scale_ln(k.ln_pref);
    Ok(s)
}

pub fn antideriv_i_log(r: f64, s1: f64, p: &ModelParams) -> Result<LogValue> {
    antideriv_i_parts(r, s1, p).map(|s| s.value)
}

pub fn antideriv_i(r: f64, s1: f64, p: &ModelParams) -> Result<f64> {
    antideriv_i_log(r, s1, p).map(LogValue::to_f64)
}

/// The integrand whose antiderivative is `I`:
/// `exp(-s²/νt + (λ²/ν - s₁/νt)s) · A₃(s)`.
pub fn antideriv_i_integrand_log(s2: f64, s1: f64, p: &ModelParams) -> Result<LogValue> {
    check_i_args(s2, s1, p)?;
    let (nu, t, l2) = (p.nu, p.t, p.l2());
    let q2 = nu * t;
    let w = (s1 - s2 + l2 * t) / (2.0 * q2.sqrt());
    let poly = t * (6.0 * nu + l2 * l2 * t) - 9.0 * (s1 + s2) * (s1 + s2);
    let coef = (PI * nu).sqrt() * l2 * t.powf(1.5) / 8.0 * poly;
    let expo = -s2 * s2 / q2 + (l2 / nu - s1 / q2) * s2 + raw::ln_erfcx(w);
    Ok(LogValue::from_f64(coef).scale_ln(expo))
}

pub fn antideriv_i_integrand(s2: f64, s1: f64, p: &ModelParams) -> Result<f64> {
    antideriv_i_integrand_log(s2, s1, p).map(LogValue::to_f64)
}

/// `lim_{r→∞} I(r)`.
pub fn antideriv_i_limit_parts(s1: f64, p: &ModelParams) -> Result<SignedSum> {
    check_i_args(0.0, s1, p)?;
    if p.l2() == 0.0 {
        return Ok(SignedSum {
            value: LogValue::ZERO,
            term_scale: LogValue::ZERO,
        });
    }
    let k = i_pieces(s1, p);
    let (big_l, spt) = (k.big_l, k.spt);
    let lv = LogValue::from_f64;
    let ln = LogValue::from_ln;
    let terms = [
        lv(-spt * (4.0 * big_l + 12.0 * s1)) * ln(k.ln_ep_e1),
        lv(spt * (5.0 * big_l + 3.0 * s1)) * ln(k.ln_em_e3),
        lv(-spt * (6.0 * s1 + 10.0 * big_l)) * ln(k.ln_em),
        lv(-6.0 * p.t * p.nu),
    ];
    let mut s = SignedSum::of(&terms);
    s.value = s.value.scale_ln(k.ln_pref);
    s.term_scale = s.term_scale.scale_ln(k.ln_pref);
    Ok(s)
}

pub fn antideriv_i_limit(s1: f64, p: &ModelParams) -> Result<f64> {
    antideriv_i_limit_parts(s1, p).map(|s| s.value.to_f64())
}

/// `lim (1/t) log E[u(t,x)^k] = λ⁴ k(k²-1) / 24ν`.
pub fn asymptotic_rate(k: u32, p: &ModelParams) -> Result<f64> {
    p.validate()?;
    if k < 2 {
        return Err(domain(format!("moment order must be at least 2, got {k}")));
    }
    let k = f64::from(k);
    Ok(p.l2() * p.l2() * k * (k * k - 1.0) / (24.0 * p.nu))
}

/// Historical k-th moment expression `2 exp(k(k²-1)t/24ν) Φ(√(k(k²-1)t/12ν))`
/// for `λ = 1`. Only the `k = 2` value is a correct moment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReferenceMoment {
    pub value: LogValue,
    pub authoritative: bool,
}

pub fn bertini_cancrini_moment(k: u32, nu: f64, t: f64) -> Result<ReferenceMoment> {
    ensure_positive("nu", nu)?;
    ensure_positive("t", t)?;
    if k < 1 {
        return Err(domain("moment order must be at least 1"));
    }
    let kk = f64::from(k);
    let c = kk * (kk * kk - 1.0) * t / nu;
    let ln = LN_2 + c / 24.0 + raw::ln_phi((c / 12.0).sqrt());
    Ok(ReferenceMoment {
        value: LogValue::from_ln(ln),
        authoritative: k == 2,
    })
}

//! The family `Λ_n(β,t) = ∫_0^∞ exp(-s²/t + βs) sⁿ ds` and the
//! Gaussian-linear integral `∫_0^∞ (as+b) exp(-cs(s-d)) ds`.
//!
//! With `z = -β√t/2` and `s = √t·u` one has `Λ_n = t^{(n+1)/2} J_n(z)` where
//! `J_n(z) = ∫_0^∞ uⁿ exp(-u² - 2zu) du`, `J_0 = (√π/2) erfcx(z)` and the ratios
//! `J_k/J_{k-1}` satisfy `f_k = (k/2)/(z + f_{k+1})`. For `z > 1` the explicit
//! expressions cancel badly, so they are replaced by the ratio product.

use crate::error::{domain, ensure_finite, ensure_positive, PamError, Result};
use crate::logvalue::LogValue;
use crate::quadrature::{integrate_semi_infinite, GaussianDecay, Integral, QuadratureConfig};
use crate::specfun::{raw, SQRT_PI};

/// Largest order with an explicit expression.
pub const MAX_CLOSED_ORDER: usize = 3;

/// Condition number of the upward recursion above which the result is
/// recomputed by quadrature.
pub const RECURSION_GUARD: f64 = 1e3;

const CF_DEPTH: usize = 400;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LambdaArgs {
    pub n: usize,
    pub beta: f64,
    pub t: f64,
}

impl LambdaArgs {
    pub fn new(n: usize, beta: f64, t: f64) -> Result<Self> {
        let args = LambdaArgs { n, beta, t };
        args.validate()?;
        Ok(args)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("beta", self.beta)?;
        ensure_positive("t", self.t)
    }

    fn z(&self) -> f64 {
        -0.5 * self.beta * self.t.sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum LambdaMode {
    /// Explicit expressions, orders 0 to 3 only.
    #[default]
    ClosedForm,
    /// Upward three-term recursion from `Λ_0`, `Λ_1`.
    Recursion,
}

/// `ln J_0(z)`
fn ln_j0(z: f64) -> f64 {
    (0.5 * SQRT_PI).ln() + raw::ln_erfcx(z)
}

/// `Λ_n` through the continued-fraction ratios. Accurate for `z ≥ 1`.
fn ratio_product_log(n: usize, z: f64, t: f64) -> LogValue {
    let depth = n + CF_DEPTH;
    let mut ratios = vec![0.0; n + 1];
    let mut f = 0.0;
    for k in (1..=depth).rev() {
        f = 0.5 * k as f64 / (z + f);
        if k <= n {
            ratios[k] = f;
        }
    }
    let ln_prod: f64 = ratios[1..].iter().map(|r| r.ln()).sum();
    LogValue::from_ln(0.5 * (n as f64 + 1.0) * t.ln() + ln_j0(z) + ln_prod)
}

fn closed_form_log(args: &LambdaArgs) -> Result<LogValue> {
    let LambdaArgs { n, beta, t } = *args;
    if n > MAX_CLOSED_ORDER {
        return Err(PamError::UnsupportedOrder {
            order: n,
            max: MAX_CLOSED_ORDER,
        });
    }
    let z = args.z();
    if z > 1.0 {
        return Ok(ratio_product_log(n, z, t));
    }
    // exp(β²t/4)(2 - erfc(β√t/2)) = erfcx(z)
    let k = LogValue::from_ln(raw::ln_erfcx(z));
    let st = t.sqrt();
    let lv = LogValue::from_f64;
    let v = match n {
        0 => lv(0.5 * SQRT_PI * st) * k,
        1 => lv(0.5 * t) + lv(0.25 * SQRT_PI * t * st * beta) * k,
        2 => lv(0.25 * beta * t * t) + lv(SQRT_PI * t * st * (beta * beta * t + 2.0) / 8.0) * k,
        _ => {
            lv(0.5 * t * t)
                + lv(beta * beta * t * t * t / 8.0)
                + lv(SQRT_PI * beta * t * t * st * (beta * beta * t + 6.0) / 16.0) * k
        }
    };
    Ok(v)
}

fn recursion_log(args: &LambdaArgs) -> Result<LogValue> {
    let LambdaArgs { n, beta, t } = *args;
    let mut prev = closed_form_log(&LambdaArgs { n: 0, ..*args })?;
    if n == 0 {
        return Ok(prev);
    }
    let mut cur = closed_form_log(&LambdaArgs { n: 1, ..*args })?;
    let mut ln_cond = 0.0;
    for k in 2..=n {
        let a = LogValue::from_f64(0.5 * beta * t) * cur;
        let b = LogValue::from_f64(0.5 * t * (k as f64 - 1.0)) * prev;
        let next = a + b;
        if a.sign() * b.sign() < 0 {
            let mag = (a.abs() + b.abs()).log_abs();
            ln_cond += mag - next.log_abs();
        }
        prev = cur;
        cur = next;
    }
    if !cur.is_positive() || ln_cond > RECURSION_GUARD.ln() {
        let cfg = QuadratureConfig::with_rel_tol(1e-13);
        let q = lambda_n_quadrature(args, &cfg)?;
        return Ok(LogValue::from_f64(q.value));
    }
    Ok(cur)
}

/// `Λ_n(β,t)` in log form.
///
/// In recursion mode a step that subtracts nearly equal terms accumulates a
/// condition number; past [`RECURSION_GUARD`] the value is recomputed by
/// quadrature of the defining integral.
pub fn lambda_n_log(args: LambdaArgs, mode: LambdaMode) -> Result<LogValue> {
    args.validate()?;
    match mode {
        LambdaMode::ClosedForm => closed_form_log(&args),
        LambdaMode::Recursion => recursion_log(&args),
    }
}

pub fn lambda_n(args: LambdaArgs, mode: LambdaMode) -> Result<f64> {
    lambda_n_log(args, mode).map(LogValue::to_f64)
}

/// Brute-force quadrature of the defining integral, truncated at
/// `max(βt, 0) + 10√t` and extended by tail panels until negligible.
pub fn lambda_n_quadrature(args: &LambdaArgs, cfg: &QuadratureConfig) -> Result<Integral> {
    args.validate()?;
    let LambdaArgs { n, beta, t } = *args;
    // peak of the exponent, divided out so the integrand stays finite
    let shift = if beta > 0.0 {
        0.25 * beta * beta * t
    } else {
        0.0
    };
    let mut cfg = *cfg;
    cfg.truncation_margin = cfg.truncation_margin.max(10.0);
    let decay = GaussianDecay::new((beta * t).max(0.0), t.sqrt());
    let mut r = integrate_semi_infinite(
        |s| (-s * s / t + beta * s - shift).exp() * s.powi(n as i32),
        decay,
        &cfg,
    )?;
    let scale = shift.exp();
    r.value *= scale;
    r.err_est *= scale;
    r.l1 *= scale;
    Ok(r)
}

/// `∫_0^∞ (as+b) exp(-cs(s-d)) ds` in log form.
pub fn gauss_linear_integral_log(a: f64, b: f64, c: f64, d: f64) -> Result<LogValue> {
    ensure_finite("a", a)?;
    ensure_finite("b", b)?;
    ensure_finite("d", d)?;
    if !(c > 0.0 && c.is_finite()) {
        return Err(domain(format!("c must be positive and finite, got {c}")));
    }
    let y = 0.5 * c.sqrt() * d;
    if y < -1.0 {
        let tau = 1.0 / c;
        let l1 = lambda_n_log(LambdaArgs::new(1, c * d, tau)?, LambdaMode::ClosedForm)?;
        let l0 = lambda_n_log(LambdaArgs::new(0, c * d, tau)?, LambdaMode::ClosedForm)?;
        return Ok(LogValue::from_f64(a) * l1 + LogValue::from_f64(b) * l0);
    }
    // exp(cd²/4) Φ(√(2c) d/2) = erfcx(-y)/2
    let head = LogValue::from_f64(SQRT_PI * (a * d + 2.0 * b) / (4.0 * c.sqrt()))
        * LogValue::from_ln(raw::ln_erfcx(-y));
    Ok(head + LogValue::from_f64(a / (2.0 * c)))
}

pub fn gauss_linear_integral(a: f64, b: f64, c: f64, d: f64) -> Result<f64> {
    gauss_linear_integral_log(a, b, c, d).map(LogValue::to_f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate_semi_infinite;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn both(n: usize, beta: f64, t: f64) -> (f64, f64) {
        let a = LambdaArgs::new(n, beta, t).unwrap();
        (
            lambda_n(a, LambdaMode::ClosedForm).unwrap(),
            lambda_n(a, LambdaMode::Recursion).unwrap(),
        )
    }

    #[test]
    fn elementary_values() {
        let (c, r) = both(0, 0.0, 1.0);
        assert_relative_eq!(c, SQRT_PI / 2.0, max_relative = 1e-15);
        assert_relative_eq!(r, SQRT_PI / 2.0, max_relative = 1e-15);
        let (c, _) = both(1, 0.0, 1.0);
        assert_relative_eq!(c, 0.5, max_relative = 1e-15);
        for t in [0.01, 1.0, 7.5, 100.0] {
            let want = SQRT_PI * t * t.sqrt() / 4.0;
            let (c, r) = both(2, 0.0, t);
            assert_relative_eq!(c, want, max_relative = 1e-14);
            assert_relative_eq!(r, want, max_relative = 1e-14);
        }
    }

    #[test]
    fn lambda3_against_quadrature() {
        let args = LambdaArgs::new(3, 1.3, 0.7).unwrap();
        let q = lambda_n_quadrature(&args, &QuadratureConfig::with_rel_tol(1e-12)).unwrap();
        let c = lambda_n(args, LambdaMode::ClosedForm).unwrap();
        assert_relative_eq!(c, q.value, max_relative = 1e-10);
        // plain semi-infinite routine on the same integrand
        let plain = integrate_semi_infinite(
            |s| (-s * s / 0.7 + 1.3 * s).exp() * s.powi(3),
            GaussianDecay::new(0.91, 0.7f64.sqrt()),
            &QuadratureConfig::default(),
        )
        .unwrap();
        assert_relative_eq!(plain.value, c, max_relative = 1e-8);
    }

    #[test]
    fn errors() {
        assert!(LambdaArgs::new(1, 0.0, 0.0).is_err());
        assert!(LambdaArgs::new(1, f64::NAN, 1.0).is_err());
        let a = LambdaArgs::new(4, 0.5, 1.0).unwrap();
        assert_eq!(
            lambda_n(a, LambdaMode::ClosedForm),
            Err(PamError::UnsupportedOrder { order: 4, max: 3 })
        );
        assert!(lambda_n(a, LambdaMode::Recursion).is_ok());
        assert!(gauss_linear_integral(1.0, 1.0, 0.0, 1.0).is_err());
        assert!(gauss_linear_integral(1.0, 1.0, -2.0, 1.0).is_err());
    }

    #[test]
    fn modes_agree_on_grid() {
        for n in [2, 3] {
            for i in 0..=40 {
                let beta = -5.0 + 0.25 * i as f64;
                for j in 0..=24 {
                    let t = 10f64.powf(-2.0 + j as f64 / 6.0);
                    let (c, r) = both(n, beta, t);
                    assert!(c > 0.0);
                    assert!(
                        ((c - r) / c).abs() <= 1e-12,
                        "n={n} beta={beta} t={t}: {c} vs {r}"
                    );
                }
            }
        }
    }

    #[test]
    fn recursion_matches_quadrature_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let cfg = QuadratureConfig::with_rel_tol(1e-12);
        for _ in 0..50 {
            let beta = rng.random_range(-5.0..5.0);
            let t = 10f64.powf(rng.random_range(-2.0..2.0));
            for n in 0..=5 {
                let args = LambdaArgs::new(n, beta, t).unwrap();
                let r = lambda_n(args, LambdaMode::Recursion).unwrap();
                let q = lambda_n_quadrature(&args, &cfg).unwrap().value;
                assert!(((r - q) / q).abs() <= 1e-8, "n={n} beta={beta} t={t}");
            }
        }
    }

    #[test]
    fn huge_drift_stays_in_log_space() {
        let a = LambdaArgs::new(2, 40.0, 10.0).unwrap();
        let v = lambda_n_log(a, LambdaMode::ClosedForm).unwrap();
        assert_eq!(v.sign(), 1);
        // dominated by exp(β²t/4) = exp(4000)
        assert!((v.log_abs() - 4000.0).abs() < 20.0);
        let r = lambda_n_log(a, LambdaMode::Recursion).unwrap();
        assert_relative_eq!(v.log_abs(), r.log_abs(), max_relative = 1e-14);
    }

    #[test]
    fn gauss_linear_values() {
        assert_relative_eq!(
            gauss_linear_integral(0.0, 1.0, 1.0, 0.0).unwrap(),
            SQRT_PI / 2.0,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            gauss_linear_integral(1.0, 0.0, 1.0, 0.0).unwrap(),
            0.5,
            max_relative = 1e-15
        );
        let q = integrate_semi_infinite(
            |s| (2.0 * s - 1.0) * (-0.5 * s * (s - 3.0)).exp(),
            GaussianDecay::new(1.5, 2f64.sqrt()),
            &QuadratureConfig::with_rel_tol(1e-13),
        )
        .unwrap();
        assert_relative_eq!(
            gauss_linear_integral(2.0, -1.0, 0.5, 3.0).unwrap(),
            q.value,
            max_relative = 1e-10
        );
    }

    #[test]
    fn gauss_linear_is_lambda_recombination() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let a: f64 = rng.random_range(-3.0..3.0);
            let b: f64 = rng.random_range(0.0..3.0) * a.signum();
            let c: f64 = 10f64.powf(rng.random_range(-1.5..1.5));
            let d: f64 = rng.random_range(-4.0..4.0);
            let g = gauss_linear_integral(a, b, c, d).unwrap();
            let tau = 1.0 / c;
            let l1 = lambda_n(
                LambdaArgs::new(1, c * d, tau).unwrap(),
                LambdaMode::ClosedForm,
            )
            .unwrap();
            let l0 = lambda_n(
                LambdaArgs::new(0, c * d, tau).unwrap(),
                LambdaMode::ClosedForm,
            )
            .unwrap();
            let r = a * l1 + b * l0;
            assert!(((g - r) / r).abs() <= 1e-12, "a={a} b={b} c={c} d={d}");
        }
    }
}

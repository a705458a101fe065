//! Growth indices and the velocity at which the third moment stops growing.

use rayon::prelude::*;

use crate::error::{domain, ensure_finite, ensure_nonnegative, ensure_positive, PamError, Result};
use crate::moments::{third_moment_log, ModelParams};
use crate::quadrature::QuadratureConfig;

#[derive(Clone, Debug, PartialEq)]
pub struct FrontResult {
    pub alpha_grid: Vec<f64>,
    /// Extrapolated `t → ∞` rates, one per velocity.
    pub rate_values: Vec<f64>,
    pub lambda_p: f64,
    pub p: u32,
}

/// `λ⁴/ν - 3α²/2ν`, the limit of `(1/t) log sup_{|x|≥αt} E[u(t,x)³]`.
pub fn rate_function(p3: &ModelParams, alpha: f64) -> Result<f64> {
    p3.validate()?;
    ensure_nonnegative("alpha", alpha)?;
    Ok((p3.l2() * p3.l2() - 1.5 * alpha * alpha) / p3.nu)
}

/// `√((p²-1)/12) λ²`.
pub fn growth_index(p: u32, lambda: f64) -> Result<f64> {
    ensure_finite("lambda", lambda)?;
    if p < 2 {
        return Err(domain(format!("growth index needs p >= 2, got {p}")));
    }
    let p = f64::from(p);
    Ok(((p * p - 1.0) / 12.0).sqrt() * (lambda * lambda))
}

/// `(1/t) log E[u(t, αt)³]`.
pub fn finite_time_rate(p3: &ModelParams, alpha: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let m = third_moment_log(p3, alpha * p3.t, cfg)?;
    Ok(m.ln() / p3.t)
}

/// Least-squares fit `r(t) = r∞ + c/t`; returns `(r∞, c)`.
pub fn fit_inverse_t(ts: &[f64], rs: &[f64]) -> (f64, f64) {
    if ts.len() == 1 {
        return (rs[0], 0.0);
    }
    let n = ts.len() as f64;
    let us: Vec<f64> = ts.iter().map(|t| 1.0 / t).collect();
    let mu = us.iter().sum::<f64>() / n;
    let mr = rs.iter().sum::<f64>() / n;
    let mut suu = 0.0;
    let mut sur = 0.0;
    for (u, r) in us.iter().zip(rs) {
        suu += (u - mu) * (u - mu);
        sur += (u - mu) * (r - mr);
    }
    let c = sur / suu;
    (mr - c * mu, c)
}

fn check_times(t_list: &[f64]) -> Result<()> {
    if t_list.is_empty() {
        return Err(domain("t_list is empty"));
    }
    for &t in t_list {
        ensure_positive("t", t)?;
    }
    if t_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(domain("t_list must be strictly ascending"));
    }
    Ok(())
}

/// Extrapolated rate at one velocity. The time in `p3` is ignored.
pub fn extrapolated_rate(
    p3: &ModelParams,
    t_list: &[f64],
    alpha: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    check_times(t_list)?;
    ensure_nonnegative("alpha", alpha)?;
    let rs = t_list
        .iter()
        .map(|&t| finite_time_rate(&p3.at_time(t)?, alpha, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(fit_inverse_t(t_list, &rs).0)
}

/// Finite-time rates on the velocity grid, extrapolated in `t`, and the zero
/// crossing refined by bisection between the bracketing grid points.
pub fn empirical_front(
    p3: &ModelParams,
    t_list: &[f64],
    alpha_grid: &[f64],
    cfg: &QuadratureConfig,
) -> Result<FrontResult> {
    p3.validate()?;
    cfg.validate()?;
    check_times(t_list)?;
    if alpha_grid.is_empty() {
        return Err(domain("alpha_grid is empty"));
    }
    for &a in alpha_grid {
        ensure_nonnegative("alpha", a)?;
    }
    if alpha_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(domain("alpha_grid must be strictly ascending"));
    }
    let rate_values = alpha_grid
        .par_iter()
        .map(|&a| extrapolated_rate(p3, t_list, a, cfg))
        .collect::<Result<Vec<_>>>()?;
    let i = rate_values
        .windows(2)
        .position(|w| w[0] > 0.0 && w[1] <= 0.0)
        .ok_or(PamError::FrontNotBracketed)?;
    let (mut lo, mut hi) = (alpha_grid[i], alpha_grid[i + 1]);
    if rate_values[i + 1] == 0.0 {
        lo = hi;
    }
    while hi - lo > 1e-10 * hi.max(1e-300) {
        let mid = 0.5 * (lo + hi);
        if extrapolated_rate(p3, t_list, mid, cfg)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(FrontResult {
        alpha_grid: alpha_grid.to_vec(),
        rate_values,
        lambda_p: 0.5 * (lo + hi),
        p: 3,
    })
}

/// `start, start+step, …` up to `end` inclusive.
pub fn uniform_grid(start: f64, end: f64, step: f64) -> Result<Vec<f64>> {
    ensure_finite("start", start)?;
    ensure_finite("end", end)?;
    ensure_positive("step", step)?;
    if end < start {
        return Err(domain("grid end precedes start"));
    }
    let n = ((end - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + i as f64 * step).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(nu: f64, lambda: f64) -> ModelParams {
        ModelParams::new(nu, lambda, 1.0).unwrap()
    }

    #[test]
    fn rate_function_values() {
        assert_eq!(rate_function(&params(1.0, 1.0), 0.0).unwrap(), 1.0);
        assert_eq!(rate_function(&params(1.0, 0.0), 1.0).unwrap(), -1.5);
        for nu in [0.3, 1.0, 4.0] {
            for lambda in [0.5, 1.0, 2.0] {
                let p = params(nu, lambda);
                let a = growth_index(3, lambda).unwrap();
                assert!(
                    rate_function(&p, a).unwrap().abs() < 1e-13 * (lambda.powi(4) / nu).max(1.0)
                );
            }
        }
        assert!(rate_function(&params(1.0, 1.0), -0.1).is_err());
    }

    #[test]
    fn growth_index_values() {
        assert_eq!(growth_index(2, 1.0).unwrap(), 0.5);
        assert_relative_eq!(
            growth_index(3, 1.0).unwrap(),
            (2.0f64 / 3.0).sqrt(),
            max_relative = 1e-15
        );
        assert_eq!(growth_index(3, 0.0).unwrap(), 0.0);
        assert!(growth_index(1, 1.0).is_err());
        for p in 2..8 {
            assert!(growth_index(p + 1, 1.3).unwrap() > growth_index(p, 1.3).unwrap());
            let c = 1.7;
            assert_relative_eq!(
                growth_index(p, c * 0.9).unwrap(),
                c * c * growth_index(p, 0.9).unwrap(),
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn fit_recovers_exact_model() {
        let ts = [10.0, 20.0, 40.0];
        let rs: Vec<f64> = ts.iter().map(|t| 0.7 - 2.5 / t).collect();
        let (r, c) = fit_inverse_t(&ts, &rs);
        assert_relative_eq!(r, 0.7, max_relative = 1e-13);
        assert_relative_eq!(c, -2.5, max_relative = 1e-12);
    }

    #[test]
    fn finite_time_rates_are_quadratic_in_velocity() {
        let cfg = QuadratureConfig::default();
        let p = ModelParams::new(1.0, 1.0, 10.0).unwrap();
        let base = finite_time_rate(&p, 0.0, &cfg).unwrap();
        for a in [0.1, 0.5, 1.0, 1.2] {
            let r = finite_time_rate(&p, a, &cfg).unwrap() + 1.5 * a * a;
            assert!((r - base).abs() <= 1e-10 * base.abs());
        }
    }

    #[test]
    fn front_at_large_dimensionless_time() {
        let p = params(1.0, 1.0);
        let grid = uniform_grid(0.0, 1.2, 0.01).unwrap();
        let f = empirical_front(
            &p,
            &[80.0, 160.0, 320.0],
            &grid,
            &QuadratureConfig::default(),
        )
        .unwrap();
        assert_eq!(f.rate_values.len(), grid.len());
        assert!(f.rate_values.windows(2).all(|w| w[1] < w[0]));
        assert!((f.lambda_p - (2.0f64 / 3.0).sqrt()).abs() < 0.01);
    }

    #[test]
    fn no_noise_has_no_front() {
        let grid = uniform_grid(0.1, 1.0, 0.1).unwrap();
        let r = empirical_front(
            &params(1.0, 0.0),
            &[1.0, 2.0],
            &grid,
            &QuadratureConfig::default(),
        );
        assert_eq!(r, Err(PamError::FrontNotBracketed));
    }

    #[test]
    fn rejects_bad_grids() {
        let p = params(1.0, 1.0);
        let cfg = QuadratureConfig::default();
        assert!(empirical_front(&p, &[], &[0.0, 1.0], &cfg).is_err());
        assert!(empirical_front(&p, &[2.0, 1.0], &[0.0, 1.0], &cfg).is_err());
        assert!(empirical_front(&p, &[1.0], &[1.0, 0.0], &cfg).is_err());
        assert_eq!(uniform_grid(0.0, 1.2, 0.01).unwrap().len(), 121);
    }
}

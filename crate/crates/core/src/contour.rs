//! Direct evaluation of the k-fold vertical-line contour integral for
//! `E[u(t,x₁)⋯u(t,x_k)]`, `k ∈ {2, 3}`:
//!
//! ```text
//! (2πi)^{-k} ∫⋯∫ ∏_{A<B} (z_A - z_B)/(z_A - z_B - λ²/ν) ∏_j exp(νt z_j²/2 + x_j z_j) dz_j
//! ```
//!
//! with `z_j ∈ α_j + iℝ`. Each line is truncated at `|Im z| ≤ Y` and
//! discretised by the trapezoid rule, which converges geometrically for this
//! integrand; the step is halved until two successive sums agree.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{config, domain, ensure_finite, PamError, Result};
use crate::moments::ModelParams;
use crate::quadrature::QuadratureConfig;

/// Default node budget for the tensor grid (number of integrand terms).
pub const DEFAULT_NODE_BUDGET: usize = 400_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct ContourConfig {
    /// Real parts of the contours, `alphas[0]` for `z₁`.
    pub alphas: Vec<f64>,
    /// Truncation `Y` of the imaginary part.
    pub half_height: f64,
    /// Trapezoid nodes per unit length on the coarsest grid.
    pub nodes_per_unit: usize,
    /// `rel_tol` drives the step-halving check, `max_evals` caps the grid.
    pub cfg: QuadratureConfig,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContourResult {
    pub value: f64,
    pub imag_residual: f64,
    /// Nodes per line on the accepted grid.
    pub nodes_per_line: usize,
    /// Integrand terms summed over all refinement levels.
    pub evals: usize,
}

/// Contour offsets `(k-1-j)(λ²/ν + δ)` with `δ = max(1, λ²/ν)/2`, shifted
/// by a common constant that minimises `Σ_j (νt α_j²/2 + x_j α_j)`, the log of
/// the integrand modulus on the real axis.
pub fn default_alphas(k: usize, p: &ModelParams, xs: &[f64]) -> Vec<f64> {
    let l2n = p.l2() / p.nu;
    let delta = 0.5 * l2n.max(1.0);
    let q2 = p.nu * p.t;
    let offsets: Vec<f64> = (0..k).map(|j| (k - 1 - j) as f64 * (l2n + delta)).collect();
    let c =
        -(offsets.iter().map(|o| q2 * o).sum::<f64>() + xs.iter().sum::<f64>()) / (k as f64 * q2);
    offsets.iter().map(|o| o + c).collect()
}

impl ContourConfig {
    /// Default contours with height and grid derived from the tolerance.
    pub fn auto(k: usize, p: &ModelParams, xs: &[f64], rel_tol: f64) -> Result<Self> {
        Self::for_alphas(default_alphas(k, p, xs), p, xs, rel_tol)
    }

    /// Given contours, picks `Y` so the discarded tails are below
    /// `rel_tol/100` of the modulus scale, and a step resolving the nearest
    /// pole of the ratio factors.
    pub fn for_alphas(alphas: Vec<f64>, p: &ModelParams, xs: &[f64], rel_tol: f64) -> Result<Self> {
        p.validate()?;
        let cfg = QuadratureConfig {
            rel_tol,
            max_evals: DEFAULT_NODE_BUDGET,
            ..QuadratureConfig::default()
        };
        cfg.validate()?;
        let q2 = p.nu * p.t;
        let amax = alphas.iter().fold(0.0f64, |m, a| m.max(a.abs()));
        let xmax = xs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let log_eps = (100.0 / rel_tol).ln();
        let half_height =
            (2.0 * (log_eps + 0.5 * q2 * amax * amax + xmax * amax) / q2).sqrt() + 1.0 / q2.sqrt();
        let l2n = p.l2() / p.nu;
        let mut gap = f64::INFINITY;
        for a in 0..alphas.len() {
            for b in a + 1..alphas.len() {
                gap = gap.min(alphas[a] - alphas[b] - l2n);
            }
        }
        if !gap.is_finite() {
            gap = 1.0;
        }
        // trapezoid error ~ exp(-2π gap / h)
        let nodes_per_unit = if gap > 0.0 {
            (log_eps / (2.0 * std::f64::consts::PI * gap))
                .ceil()
                .max(4.0) as usize
        } else {
            4
        };
        Ok(ContourConfig {
            alphas,
            half_height,
            nodes_per_unit,
            cfg,
        })
    }

    pub fn shifted(&self, delta: f64) -> Self {
        ContourConfig {
            alphas: self.alphas.iter().map(|a| a + delta).collect(),
            ..self.clone()
        }
    }

    /// Checks the contour ordering `α_A - α_B > λ²/ν` for `A < B`.
    pub fn validate(&self, k: usize, p: &ModelParams) -> Result<()> {
        self.cfg.validate()?;
        if self.alphas.len() != k {
            return Err(config(format!(
                "need {k} contour abscissae, got {}",
                self.alphas.len()
            )));
        }
        if self.alphas.iter().any(|a| !a.is_finite()) {
            return Err(config("contour abscissae must be finite"));
        }
        if !(self.half_height > 0.0 && self.half_height.is_finite()) {
            return Err(config(format!(
                "half_height must be positive, got {}",
                self.half_height
            )));
        }
        if self.nodes_per_unit == 0 {
            return Err(config("nodes_per_unit must be positive"));
        }
        let l2n = p.l2() / p.nu;
        for a in 0..k {
            for b in a + 1..k {
                let gap = self.alphas[a] - self.alphas[b];
                if gap.is_nan() || gap <= l2n {
                    return Err(config(format!(
                        "contours {} and {} violate alpha_A - alpha_B > lambda^2/nu ({} - {} <= {l2n})",
                        a + 1,
                        b + 1,
                        self.alphas[a],
                        self.alphas[b]
                    )));
                }
            }
        }
        Ok(())
    }
}

struct Line {
    z: Vec<Complex64>,
    w: Vec<Complex64>,
}

fn line(alpha: f64, x: f64, q2: f64, ys: &[f64]) -> Line {
    let z: Vec<Complex64> = ys.iter().map(|&y| Complex64::new(alpha, y)).collect();
    let w = z
        .iter()
        .map(|&z| (0.5 * q2 * z * z + x * z).exp())
        .collect();
    Line { z, w }
}

#[inline]
fn ratio(a: Complex64, b: Complex64, l2n: f64) -> Complex64 {
    let d = a - b;
    d / (d - l2n)
}

/// Trapezoid sum on the grid `y = jh`, `|y| ≤ Y`, without the `(2π)^{-k}`.
fn tensor_sum(
    k: usize,
    p: &ModelParams,
    xs: &[f64],
    alphas: &[f64],
    h: f64,
    n_half: usize,
) -> Complex64 {
    let q2 = p.nu * p.t;
    let l2n = p.l2() / p.nu;
    let ys: Vec<f64> = (0..=2 * n_half)
        .map(|j| (j as f64 - n_half as f64) * h)
        .collect();
    let lines: Vec<Line> = (0..k).map(|j| line(alphas[j], xs[j], q2, &ys)).collect();
    let n = ys.len();
    match k {
        2 => {
            let partial: Vec<Complex64> = (0..n)
                .into_par_iter()
                .map(|a| {
                    let z1 = lines[0].z[a];
                    let mut acc = Complex64::new(0.0, 0.0);
                    for b in 0..n {
                        acc += ratio(z1, lines[1].z[b], l2n) * lines[1].w[b];
                    }
                    acc * lines[0].w[a]
                })
                .collect();
            partial.iter().sum::<Complex64>() * (h * h)
        }
        _ => {
            // m23[b][c] = R(z2_b, z3_c) w3_c
            let m23: Vec<Vec<Complex64>> = (0..n)
                .into_par_iter()
                .map(|b| {
                    (0..n)
                        .map(|c| ratio(lines[1].z[b], lines[2].z[c], l2n) * lines[2].w[c])
                        .collect()
                })
                .collect();
            let partial: Vec<Complex64> = (0..n)
                .into_par_iter()
                .map(|a| {
                    let z1 = lines[0].z[a];
                    let r13: Vec<Complex64> =
                        lines[2].z.iter().map(|&z3| ratio(z1, z3, l2n)).collect();
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (b, row) in m23.iter().enumerate() {
                        let mut inner = Complex64::new(0.0, 0.0);
                        for (r, m) in r13.iter().zip(row) {
                            inner += r * m;
                        }
                        acc += ratio(z1, lines[1].z[b], l2n) * lines[1].w[b] * inner;
                    }
                    acc * lines[0].w[a]
                })
                .collect();
            partial.iter().sum::<Complex64>() * (h * h * h)
        }
    }
}

/// Evaluates the k-fold contour integral for sorted points `xs`.
pub fn bc_contour_moment(
    k: usize,
    p: &ModelParams,
    xs: &[f64],
    ccfg: &ContourConfig,
) -> Result<ContourResult> {
    p.validate()?;
    if !(k == 2 || k == 3) {
        return Err(PamError::UnsupportedOrder { order: k, max: 3 });
    }
    if xs.len() != k {
        return Err(domain(format!("need {k} points, got {}", xs.len())));
    }
    for (i, &x) in xs.iter().enumerate() {
        ensure_finite(&format!("x{}", i + 1), x)?;
    }
    if xs.windows(2).any(|w| w[0] > w[1]) {
        return Err(domain("contour formula needs x1 <= ... <= xk"));
    }
    ccfg.validate(k, p)?;
    let tol = ccfg.cfg.rel_tol;
    let norm = (2.0 * std::f64::consts::PI).powi(-(k as i32));
    let mut h = 1.0 / ccfg.nodes_per_unit as f64;
    let mut evals = 0usize;
    let cost = |n_half: usize| (2 * n_half + 1).pow(k as u32);
    let mut n_half = (ccfg.half_height / h).ceil() as usize;
    if cost(n_half) > ccfg.cfg.max_evals {
        return Err(PamError::Convergence {
            best: f64::NAN,
            err_est: f64::INFINITY,
            evals,
        });
    }
    let mut prev = tensor_sum(k, p, xs, &ccfg.alphas, h, n_half) * norm;
    evals += cost(n_half);
    loop {
        h *= 0.5;
        n_half *= 2;
        if evals + cost(n_half) > ccfg.cfg.max_evals {
            return Err(PamError::Convergence {
                best: prev.re,
                err_est: f64::INFINITY,
                evals,
            });
        }
        let cur = tensor_sum(k, p, xs, &ccfg.alphas, h, n_half) * norm;
        evals += cost(n_half);
        let change = (cur - prev).norm();
        if !cur.re.is_finite() {
            return Err(PamError::Convergence {
                best: cur.re,
                err_est: f64::INFINITY,
                evals,
            });
        }
        if change <= tol * cur.re.abs() {
            let imag = cur.im.abs();
            if imag > tol * cur.re.abs() {
                return Err(PamError::Accuracy(format!(
                    "imaginary residual {imag:e} exceeds {tol:e} of the value {:e}",
                    cur.re
                )));
            }
            return Ok(ContourResult {
                value: cur.re,
                imag_residual: imag,
                nodes_per_line: 2 * n_half + 1,
                evals,
            });
        }
        prev = cur;
    }
}

/// Relative difference between two admissible contour choices.
pub fn contour_shift_check(
    k: usize,
    p: &ModelParams,
    xs: &[f64],
    first: &ContourConfig,
    second: &ContourConfig,
) -> Result<f64> {
    let a = bc_contour_moment(k, p, xs, first)?.value;
    let b = bc_contour_moment(k, p, xs, second)?.value;
    let scale = a.abs().max(b.abs());
    Ok(if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::{
        second_moment_two_point, third_moment, third_moment_three_point, TriplePoint,
    };
    use crate::specfun::heat_kernel;
    use approx::assert_relative_eq;

    fn params(nu: f64, lambda: f64, t: f64) -> ModelParams {
        ModelParams::new(nu, lambda, t).unwrap()
    }

    #[test]
    fn two_point_matches_closed_form() {
        let p = params(1.0, 1.0, 1.0);
        for xs in [[0.0, 0.0], [-0.3, 0.4]] {
            let c = ContourConfig::auto(2, &p, &xs, 1e-10).unwrap();
            let r = bc_contour_moment(2, &p, &xs, &c).unwrap();
            let want = second_moment_two_point(&p, xs[0], xs[1]).unwrap();
            assert_relative_eq!(r.value, want, max_relative = 1e-8);
            assert!(r.imag_residual <= 1e-10 * r.value);
        }
    }

    #[test]
    fn weak_noise_reduces_to_heat_kernels() {
        let p = params(1.0, 1e-4, 1.0);
        let xs = [-0.2, 0.6];
        let c = ContourConfig::auto(2, &p, &xs, 1e-10).unwrap();
        let r = bc_contour_moment(2, &p, &xs, &c).unwrap();
        let g = heat_kernel(1.0, 1.0, -0.2).unwrap() * heat_kernel(1.0, 1.0, 0.6).unwrap();
        assert_relative_eq!(r.value, g, max_relative = 1e-6);
    }

    #[test]
    fn shift_invariance() {
        let p = params(1.0, 1.0, 1.0);
        let xs = [0.0, 0.0];
        let a = ContourConfig::for_alphas(vec![2.5, 0.0], &p, &xs, 1e-10).unwrap();
        let b = ContourConfig::for_alphas(vec![3.0, 0.5], &p, &xs, 1e-10).unwrap();
        assert!(contour_shift_check(2, &p, &xs, &a, &b).unwrap() <= 1e-7);
        assert_eq!(contour_shift_check(2, &p, &xs, &a, &a).unwrap(), 0.0);
    }

    #[test]
    fn three_point_shift_invariance() {
        let p = params(1.0, 1.0, 0.5);
        let xs = [-0.3, 0.1, 0.5];
        let a = ContourConfig::auto(3, &p, &xs, 1e-7).unwrap();
        let b = a.shifted(0.25);
        assert!(contour_shift_check(3, &p, &xs, &a, &b).unwrap() <= 1e-5);
    }

    #[test]
    fn three_point_matches_real_integrals() {
        let p = params(1.0, 1.0, 0.5);
        let xs = [-0.3, 0.1, 0.5];
        let c = ContourConfig::auto(3, &p, &xs, 1e-8).unwrap();
        let r = bc_contour_moment(3, &p, &xs, &c).unwrap();
        let tp = TriplePoint::new(-0.3, 0.1, 0.5).unwrap();
        let q = third_moment_three_point(&p, &tp, &QuadratureConfig::with_rel_tol(1e-8)).unwrap();
        assert_relative_eq!(r.value, q, max_relative = 1e-4);

        let p = params(1.0, 1.0, 1.0);
        let c = ContourConfig::auto(3, &p, &[0.0; 3], 1e-8).unwrap();
        let r = bc_contour_moment(3, &p, &[0.0; 3], &c).unwrap();
        let m = third_moment(&p, 0.0, &QuadratureConfig::default()).unwrap();
        assert_relative_eq!(r.value, m, max_relative = 1e-6);
    }

    #[test]
    fn doubling_height_changes_nothing() {
        let p = params(0.7, 1.2, 0.8);
        let xs = [-0.5, 0.25];
        let c = ContourConfig::auto(2, &p, &xs, 1e-10).unwrap();
        let mut tall = c.clone();
        tall.half_height *= 2.0;
        let a = bc_contour_moment(2, &p, &xs, &c).unwrap().value;
        let b = bc_contour_moment(2, &p, &xs, &tall).unwrap().value;
        assert!(((a - b) / b).abs() <= 1e-10);
    }

    #[test]
    fn rejects_bad_input() {
        let p = params(1.0, 1.0, 1.0);
        let c = ContourConfig::auto(2, &p, &[0.0, 0.0], 1e-8).unwrap();
        assert!(matches!(
            bc_contour_moment(2, &p, &[0.4, -0.3], &c),
            Err(PamError::Domain(_))
        ));
        let bad = ContourConfig::for_alphas(vec![1.0, 0.2], &p, &[0.0, 0.0], 1e-8).unwrap();
        assert!(matches!(
            bc_contour_moment(2, &p, &[0.0, 0.0], &bad),
            Err(PamError::Config(_))
        ));
        assert!(bc_contour_moment(4, &p, &[0.0; 4], &c).is_err());
        let mut tiny = c.clone();
        tiny.cfg.max_evals = 1000;
        assert!(matches!(
            bc_contour_moment(2, &p, &[0.0, 0.0], &tiny),
            Err(PamError::Convergence { .. })
        ));
    }

    #[test]
    fn deterministic_under_parallel_reduction() {
        let p = params(1.0, 1.0, 1.0);
        let xs = [-0.1, 0.3];
        let c = ContourConfig::auto(2, &p, &xs, 1e-10).unwrap();
        let a = bc_contour_moment(2, &p, &xs, &c).unwrap();
        let b = bc_contour_moment(2, &p, &xs, &c).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }
}

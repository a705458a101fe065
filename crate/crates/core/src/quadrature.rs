//! Adaptive Gauss–Kronrod quadrature on finite and semi-infinite intervals.
//!
//! The basic rule is the 10-point Gauss / 21-point Kronrod pair. Intervals are
//! refined globally: the panel with the largest error estimate is bisected
//! until the summed estimate meets the tolerance or the evaluation budget is
//! spent.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{config, PamError, Result};

/// Tolerances and budgets for real-line integrals.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_evals: usize,
    /// Truncation point in multiples of the decay scale past the decay centre.
    pub truncation_margin: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            rel_tol: 1e-10,
            abs_tol: 0.0,
            max_evals: 200_000,
            truncation_margin: 8.0,
        }
    }
}

impl QuadratureConfig {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        QuadratureConfig {
            rel_tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol <= 0.1) {
            return Err(config(format!(
                "rel_tol must lie in (0, 0.1], got {}",
                self.rel_tol
            )));
        }
        if !(self.abs_tol >= 0.0 && self.abs_tol.is_finite()) {
            return Err(config(format!(
                "abs_tol must be nonnegative, got {}",
                self.abs_tol
            )));
        }
        if self.max_evals < 100 {
            return Err(config(format!(
                "max_evals must be at least 100, got {}",
                self.max_evals
            )));
        }
        if !(self.truncation_margin > 0.0 && self.truncation_margin.is_finite()) {
            return Err(config(format!(
                "truncation_margin must be positive, got {}",
                self.truncation_margin
            )));
        }
        Ok(())
    }
}

/// Claim that `|f(s)| <= M exp(-((s - center)/scale)²)` for `s > center`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianDecay {
    pub center: f64,
    pub scale: f64,
}

impl GaussianDecay {
    pub fn new(center: f64, scale: f64) -> Self {
        GaussianDecay { center, scale }
    }
}

/// Which quantity the relative tolerance is measured against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ErrorNorm {
    /// `|∫f|`
    #[default]
    Value,
    /// `∫|f|`; used for inner levels of nested integrals and for integrands
    /// that cancel.
    L1,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub err_est: f64,
    pub evals: usize,
    /// Estimate of `∫|f|`.
    pub l1: f64,
}

impl Integral {
    fn zero() -> Self {
        Integral {
            value: 0.0,
            err_est: 0.0,
            evals: 0,
            l1: 0.0,
        }
    }

    fn absorb(&mut self, other: &Integral) {
        self.value += other.value;
        self.err_est += other.err_est;
        self.evals += other.evals;
        self.l1 += other.l1;
    }
}

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

const RULE_EVALS: usize = 21;

#[derive(Clone, Copy, Debug)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
    l1: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err
            .total_cmp(&other.err)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut e = err.abs();
    if res_asc != 0.0 && e != 0.0 {
        let scale = (200.0 * e / res_asc).powf(1.5);
        e = if scale < 1.0 {
            res_asc * scale
        } else {
            res_asc
        };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        e = e.max(50.0 * f64::EPSILON * res_abs);
    }
    e
}

fn gk21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    let mut res_g = 0.0;
    let mut res_k = fc * WGK[10];
    let mut res_abs = res_k.abs();
    for j in 0..10 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[j] = f1;
        fv2[j] = f2;
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let h = half.abs();
    let err = rescale_error((res_k - res_g) * half, res_abs * h, res_asc * h);
    Panel {
        a,
        b,
        value: res_k * half,
        err,
        l1: res_abs * h,
    }
}

fn target(cfg: &QuadratureConfig, norm: ErrorNorm, value: f64, l1: f64) -> f64 {
    let scale = match norm {
        ErrorNorm::Value => value.abs(),
        ErrorNorm::L1 => l1,
    };
    cfg.abs_tol.max(cfg.rel_tol * scale)
}

fn adapt<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    cfg: &QuadratureConfig,
    norm: ErrorNorm,
    max_evals: usize,
) -> Result<Integral> {
    let first = gk21(f, a, b);
    let mut evals = RULE_EVALS;
    if !first.value.is_finite() || !first.err.is_finite() {
        return Err(PamError::Convergence {
            best: first.value,
            err_est: first.err,
            evals,
        });
    }
    let mut heap = BinaryHeap::new();
    heap.push(first);
    let (mut value, mut err, mut l1) = (first.value, first.err, first.l1);
    let min_width = (b - a).abs() * 1e-13;
    loop {
        if err <= target(cfg, norm, value, l1) {
            break;
        }
        if evals + 2 * RULE_EVALS > max_evals {
            return Err(PamError::Convergence {
                best: value,
                err_est: err,
                evals,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if (worst.b - worst.a).abs() < min_width {
            // cannot refine further; the remaining error is roundoff
            heap.push(worst);
            return Err(PamError::Convergence {
                best: value,
                err_est: err,
                evals,
            });
        }
        let left = gk21(f, worst.a, mid);
        let right = gk21(f, mid, worst.b);
        evals += 2 * RULE_EVALS;
        value += left.value + right.value - worst.value;
        err += left.err + right.err - worst.err;
        l1 += left.l1 + right.l1 - worst.l1;
        if !value.is_finite() {
            return Err(PamError::Convergence {
                best: value,
                err_est: f64::INFINITY,
                evals,
            });
        }
        heap.push(left);
        heap.push(right);
        if heap.len() % 64 == 0 {
            // refresh running sums against drift
            value = heap.iter().map(|p| p.value).sum();
            err = heap.iter().map(|p| p.err).sum();
            l1 = heap.iter().map(|p| p.l1).sum();
        }
    }
    let mut panels: Vec<Panel> = heap.into_vec();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    Ok(Integral {
        value: panels.iter().map(|p| p.value).sum(),
        err_est: panels.iter().map(|p| p.err).sum(),
        evals,
        l1: panels.iter().map(|p| p.l1).sum(),
    })
}

/// `∫_a^b f` with the relative tolerance taken against `|∫f|`.
pub fn integrate_interval<F: FnMut(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    cfg: &QuadratureConfig,
) -> Result<Integral> {
    integrate_interval_with(f, a, b, cfg, ErrorNorm::Value)
}

pub fn integrate_interval_with<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    cfg: &QuadratureConfig,
    norm: ErrorNorm,
) -> Result<Integral> {
    cfg.validate()?;
    if !(a.is_finite() && b.is_finite()) {
        return Err(config(format!("interval [{a}, {b}] must be finite")));
    }
    if a == b {
        return Ok(Integral::zero());
    }
    adapt(&mut f, a, b, cfg, norm, cfg.max_evals)
}

/// `∫_0^∞ f` for an integrand with a Gaussian decay certificate.
pub fn integrate_semi_infinite<F: FnMut(f64) -> f64>(
    f: F,
    decay: GaussianDecay,
    cfg: &QuadratureConfig,
) -> Result<Integral> {
    integrate_semi_infinite_with(f, decay, cfg, ErrorNorm::Value)
}

/// Integrates `[0, T]` with `T = max(center, 0) + margin·scale`, then appends
/// tail panels of width `scale` until one of them is negligible.
pub fn integrate_semi_infinite_with<F: FnMut(f64) -> f64>(
    mut f: F,
    decay: GaussianDecay,
    cfg: &QuadratureConfig,
    norm: ErrorNorm,
) -> Result<Integral> {
    cfg.validate()?;
    if !(decay.center.is_finite() && decay.scale.is_finite() && decay.scale > 0.0) {
        return Err(config(format!(
            "decay certificate needs a finite centre and positive scale, got ({}, {})",
            decay.center, decay.scale
        )));
    }
    let upper = decay.center.max(0.0) + cfg.truncation_margin * decay.scale;
    let mut total = adapt(&mut f, 0.0, upper, cfg, norm, cfg.max_evals)?;
    let mut a = upper;
    for _ in 0..200 {
        let remaining = cfg.max_evals.saturating_sub(total.evals);
        if remaining < RULE_EVALS {
            return Err(PamError::Convergence {
                best: total.value,
                err_est: total.err_est,
                evals: total.evals,
            });
        }
        let b = a + decay.scale;
        let mut tail_cfg = *cfg;
        tail_cfg.abs_tol = cfg.abs_tol.max(cfg.rel_tol * total.l1 * 1e-3);
        let panel = adapt(&mut f, a, b, &tail_cfg, ErrorNorm::L1, remaining)?;
        total.absorb(&panel);
        let small = target(cfg, norm, total.value, total.l1) * 1e-3;
        if panel.l1 <= small {
            return Ok(total);
        }
        a = b;
    }
    Err(PamError::Convergence {
        best: total.value,
        err_est: total.err_est,
        evals: total.evals,
    })
}

//! Error functions, the normal CDF and the heat kernel.
//!
//! The error-function kernels are Cody's rational Chebyshev approximations
//! (three intervals, about 1e-16 relative accuracy). `erfcx` is evaluated
//! directly from the same rational forms, so `exp(x²)` is never formed for
//! positive arguments.
//!
//! Public functions validate their input and return [`Result`]. The [`raw`]
//! module has the unchecked kernels used in inner loops.

use crate::error::{domain, ensure_finite, ensure_positive, Result};
use crate::logvalue::LogValue;

pub const SQRT_PI: f64 = 1.772_453_850_905_516_f64;
pub const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3_f64;
pub const LN_2PI: f64 = 1.837_877_066_409_345_5_f64;

const THRESHOLD: f64 = 0.46875;
const XBIG: f64 = 26.543;
// below this erfcx(x) = 2·exp(x²) − ... overflows
const XNEG: f64 = -26.628_735_713_751_4;

const A: [f64; 5] = [
    3.161_123_743_870_565_6,
    113.864_154_151_050_16,
    377.485_237_685_302,
    3_209.377_589_138_469_4,
    0.185_777_706_184_603_15,
];
const B: [f64; 4] = [
    23.601_290_952_344_12,
    244.024_637_934_444_17,
    1_282.616_526_077_372_3,
    2_844.236_833_439_171,
];
const C: [f64; 9] = [
    0.564_188_496_988_670_1,
    8.883_149_794_388_376,
    66.119_190_637_141_63,
    298.635_138_197_400_1,
    881.952_221_241_769,
    1_712.047_612_634_070_6,
    2_051.078_377_826_071_6,
    1_230.339_354_797_997_2,
    2.153_115_354_744_038_5e-8,
];
const D: [f64; 8] = [
    15.744_926_110_709_835,
    117.693_950_891_312_5,
    537.181_101_862_009_9,
    1_621.389_574_566_690_2,
    3_290.799_235_733_459_7,
    4_362.619_090_143_247,
    3_439.367_674_143_721_6,
    1_230.339_354_803_749_5,
];
const P: [f64; 6] = [
    0.305_326_634_961_232_36,
    0.360_344_899_949_804_45,
    0.125_781_726_111_229_25,
    0.016_083_785_148_742_275,
    6.587_491_615_298_378e-4,
    0.016_315_387_137_302_097,
];
const Q: [f64; 5] = [
    2.568_520_192_289_822,
    1.872_952_849_923_460_4,
    0.527_905_102_951_428_4,
    0.060_518_341_312_441_32,
    0.002_335_204_976_268_691_8,
];

#[inline]
fn small_ratio(z: f64) -> f64 {
    ((((A[4] * z + A[0]) * z + A[1]) * z + A[2]) * z + A[3])
        / ((((z + B[0]) * z + B[1]) * z + B[2]) * z + B[3])
}

#[inline]
fn mid_ratio(y: f64) -> f64 {
    let num = C[..8].iter().fold(C[8], |acc, &c| acc * y + c);
    let den = D.iter().fold(1.0, |acc, &d| acc * y + d);
    num / den
}

#[inline]
fn tail_ratio(z: f64) -> f64 {
    z * (((((P[5] * z + P[0]) * z + P[1]) * z + P[2]) * z + P[3]) * z + P[4])
        / (((((z + Q[0]) * z + Q[1]) * z + Q[2]) * z + Q[3]) * z + Q[4])
}

/// `exp(-y²)` split at a multiple of 1/16 so the rounding of `y²` does not leak.
#[inline]
fn exp_neg_sq(y: f64) -> f64 {
    let yt = (y * 16.0).trunc() / 16.0;
    (-yt * yt).exp() * (-(y - yt) * (y + yt)).exp()
}

#[inline]
fn exp_pos_sq(y: f64) -> f64 {
    let yt = (y * 16.0).trunc() / 16.0;
    (yt * yt).exp() * ((y - yt) * (y + yt)).exp()
}

/// `erfcx(y)` for `y > THRESHOLD`.
#[inline]
fn erfcx_upper(y: f64) -> f64 {
    if y <= 4.0 {
        mid_ratio(y)
    } else {
        (FRAC_1_SQRT_PI - tail_ratio(1.0 / (y * y))) / y
    }
}

/// Unchecked kernels. NaN in, NaN out.
pub mod raw {
    use super::*;

    pub fn erf(x: f64) -> f64 {
        let y = x.abs();
        if y <= THRESHOLD {
            return x * small_ratio(y * y);
        }
        let c = if y >= XBIG {
            0.0
        } else {
            erfcx_upper(y) * exp_neg_sq(y)
        };
        if x < 0.0 {
            c - 1.0
        } else {
            1.0 - c
        }
    }

    pub fn erfc(x: f64) -> f64 {
        let y = x.abs();
        if y <= THRESHOLD {
            return 1.0 - x * small_ratio(y * y);
        }
        let c = if y >= XBIG {
            0.0
        } else {
            erfcx_upper(y) * exp_neg_sq(y)
        };
        if x < 0.0 {
            2.0 - c
        } else {
            c
        }
    }

    pub fn erfcx(x: f64) -> f64 {
        let y = x.abs();
        if y <= THRESHOLD {
            let z = y * y;
            return z.exp() * (1.0 - x * small_ratio(z));
        }
        if x < XNEG {
            return f64::INFINITY;
        }
        let r = erfcx_upper(y);
        if x < 0.0 {
            2.0 * exp_pos_sq(y) - r
        } else {
            r
        }
    }

    /// `ln erfc(x)`, finite for every finite `x`.
    pub fn ln_erfc(x: f64) -> f64 {
        if x > 0.0 {
            -x * x + erfcx(x).ln()
        } else {
            erfc(x).ln()
        }
    }

    /// `ln erfcx(x)`, finite for every finite `x`.
    pub fn ln_erfcx(x: f64) -> f64 {
        if x >= XNEG {
            erfcx(x).ln()
        } else {
            x * x + erfc(x).ln()
        }
    }

    /// Standard normal CDF.
    pub fn phi(x: f64) -> f64 {
        0.5 * erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
    }

    pub fn ln_phi(x: f64) -> f64 {
        ln_erfc(-x * std::f64::consts::FRAC_1_SQRT_2) - std::f64::consts::LN_2
    }

    /// `ln G_ν(t,x)`.
    #[inline]
    pub fn ln_heat_kernel(nu: f64, t: f64, x: f64) -> f64 {
        let s = nu * t;
        -0.5 * (LN_2PI + s.ln()) - x * x / (2.0 * s)
    }
}

pub fn erf(x: f64) -> Result<f64> {
    ensure_finite("x", x)?;
    Ok(raw::erf(x))
}

pub fn erfc(x: f64) -> Result<f64> {
    ensure_finite("x", x)?;
    Ok(raw::erfc(x))
}

/// `exp(x²)·erfc(x)`. Overflows to `inf` below about -26.6.
pub fn erfcx(x: f64) -> Result<f64> {
    ensure_finite("x", x)?;
    Ok(raw::erfcx(x))
}

pub fn ln_erfc(x: f64) -> Result<f64> {
    ensure_finite("x", x)?;
    Ok(raw::ln_erfc(x))
}

pub fn ln_erfcx(x: f64) -> Result<f64> {
    ensure_finite("x", x)?;
    Ok(raw::ln_erfcx(x))
}

/// Standard normal CDF `Φ(x)`.
pub fn phi(x: f64) -> Result<f64> {
    ensure_finite("x", x)?;
    Ok(raw::phi(x))
}

pub fn ln_phi(x: f64) -> Result<f64> {
    ensure_finite("x", x)?;
    Ok(raw::ln_phi(x))
}

fn check_kernel_args(nu: f64, t: f64, x: f64) -> Result<()> {
    ensure_positive("nu", nu)?;
    ensure_positive("t", t)?;
    ensure_finite("x", x)
}

/// Heat kernel `G_ν(t,x) = (2πνt)^{-1/2} exp(-x²/2νt)`.
pub fn heat_kernel(nu: f64, t: f64, x: f64) -> Result<f64> {
    check_kernel_args(nu, t, x)?;
    Ok(raw::ln_heat_kernel(nu, t, x).exp())
}

pub fn heat_kernel_log(nu: f64, t: f64, x: f64) -> Result<LogValue> {
    check_kernel_args(nu, t, x)?;
    let l = raw::ln_heat_kernel(nu, t, x);
    if l.is_nan() {
        return Err(domain("heat kernel is undefined for these arguments"));
    }
    Ok(LogValue::from_ln(l))
}

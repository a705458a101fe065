//! Sign plus log-magnitude numbers.
//!
//! Moment values grow like `exp(λ⁴t/ν)` and leave the `f64` range long before
//! the large-time regime is reached. Every moment routine therefore has a
//! variant returning a [`LogValue`], and sums of signed terms are combined
//! with a max-shifted log-sum-exp so no intermediate overflows.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// A real number stored as `sign · exp(log_abs)`.
///
/// `sign` is one of `-1, 0, 1` and `sign == 0` exactly when
/// `log_abs == -inf`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogValue {
    sign: i8,
    log_abs: f64,
}

impl LogValue {
    pub const ZERO: LogValue = LogValue {
        sign: 0,
        log_abs: f64::NEG_INFINITY,
    };
    pub const ONE: LogValue = LogValue {
        sign: 1,
        log_abs: 0.0,
    };

    /// Builds from explicit parts. A `-inf` magnitude or zero sign yields zero.
    pub fn from_parts(sign: i8, log_abs: f64) -> Self {
        if sign == 0 || log_abs == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            LogValue {
                sign: sign.signum(),
                log_abs,
            }
        }
    }

    /// `exp(log_abs)`, always nonnegative.
    pub fn from_ln(log_abs: f64) -> Self {
        Self::from_parts(1, log_abs)
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else if x.is_nan() {
            LogValue {
                sign: 1,
                log_abs: f64::NAN,
            }
        } else {
            LogValue {
                sign: if x > 0.0 { 1 } else { -1 },
                log_abs: x.abs().ln(),
            }
        }
    }

    pub fn sign(self) -> i8 {
        self.sign
    }

    pub fn log_abs(self) -> f64 {
        self.log_abs
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0
    }

    pub fn is_positive(self) -> bool {
        self.sign > 0
    }

    /// Plain value; saturates to `±inf` or `0` outside the `f64` range.
    pub fn to_f64(self) -> f64 {
        match self.sign {
            0 => 0.0,
            s => f64::from(s) * self.log_abs.exp(),
        }
    }

    /// Natural log of a positive value, `None` otherwise.
    pub fn ln(self) -> Option<f64> {
        (self.sign > 0).then_some(self.log_abs)
    }

    pub fn abs(self) -> Self {
        LogValue {
            sign: self.sign.abs(),
            log_abs: self.log_abs,
        }
    }

    /// Multiplies by `exp(delta)`.
    pub fn scale_ln(self, delta: f64) -> Self {
        if self.sign == 0 {
            self
        } else {
            Self::from_parts(self.sign, self.log_abs + delta)
        }
    }

    pub fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Self::ONE;
        }
        if self.sign == 0 {
            return if n > 0 {
                Self::ZERO
            } else {
                Self::from_parts(1, f64::INFINITY)
            };
        }
        let sign = if self.sign < 0 && n % 2 != 0 { -1 } else { 1 };
        Self::from_parts(sign, self.log_abs * f64::from(n))
    }

    /// Total order on the represented reals (NaN compares as `None`).
    pub fn partial_cmp_value(&self, other: &Self) -> Option<Ordering> {
        match self.sign.cmp(&other.sign) {
            Ordering::Equal => match self.sign {
                0 => Some(Ordering::Equal),
                1 => self.log_abs.partial_cmp(&other.log_abs),
                _ => other.log_abs.partial_cmp(&self.log_abs),
            },
            ord => Some(ord),
        }
    }

    /// Sums many signed terms with a single max shift.
    pub fn sum_slice(terms: &[LogValue]) -> LogValue {
        let max = terms
            .iter()
            .filter(|v| v.sign != 0)
            .map(|v| v.log_abs)
            .fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        if max == f64::INFINITY || max.is_nan() {
            // Mixed infinities are undefined; fall back to pairwise addition.
            return terms.iter().copied().fold(Self::ZERO, |a, b| a + b);
        }
        let acc: f64 = terms
            .iter()
            .filter(|v| v.sign != 0)
            .map(|v| f64::from(v.sign) * (v.log_abs - max).exp())
            .sum();
        Self::from_f64(acc).scale_ln(max)
    }
}

impl PartialOrd for LogValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.partial_cmp_value(other)
    }
}

impl Default for LogValue {
    fn default() -> Self {
        Self::ZERO
    }
}

impl From<f64> for LogValue {
    fn from(x: f64) -> Self {
        Self::from_f64(x)
    }
}

impl fmt::Display for LogValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            0 => write!(f, "0"),
            1 => write!(f, "exp({})", self.log_abs),
            _ => write!(f, "-exp({})", self.log_abs),
        }
    }
}

impl Neg for LogValue {
    type Output = LogValue;
    fn neg(self) -> LogValue {
        LogValue {
            sign: -self.sign,
            log_abs: self.log_abs,
        }
    }
}

impl Mul for LogValue {
    type Output = LogValue;
    fn mul(self, rhs: LogValue) -> LogValue {
        if self.sign == 0 || rhs.sign == 0 {
            return Self::ZERO;
        }
        Self::from_parts(self.sign * rhs.sign, self.log_abs + rhs.log_abs)
    }
}

impl Div for LogValue {
    type Output = LogValue;
    fn div(self, rhs: LogValue) -> LogValue {
        if rhs.sign == 0 {
            return LogValue {
                sign: if self.sign == 0 { 1 } else { self.sign },
                log_abs: if self.sign == 0 {
                    f64::NAN
                } else {
                    f64::INFINITY
                },
            };
        }
        if self.sign == 0 {
            return Self::ZERO;
        }
        Self::from_parts(self.sign * rhs.sign, self.log_abs - rhs.log_abs)
    }
}

impl Add for LogValue {
    type Output = LogValue;
    fn add(self, rhs: LogValue) -> LogValue {
        if self.sign == 0 {
            return rhs;
        }
        if rhs.sign == 0 {
            return self;
        }
        let (big, small) = if self.log_abs >= rhs.log_abs {
            (self, rhs)
        } else {
            (rhs, self)
        };
        if big.log_abs == f64::INFINITY {
            if small.log_abs == f64::INFINITY && small.sign != big.sign {
                return LogValue {
                    sign: 1,
                    log_abs: f64::NAN,
                };
            }
            return big;
        }
        let d = small.log_abs - big.log_abs;
        if big.sign == small.sign {
            Self::from_parts(big.sign, big.log_abs + d.exp().ln_1p())
        } else if d == 0.0 {
            Self::ZERO
        } else {
            // log(1 - e^d) for d < 0
            Self::from_parts(big.sign, big.log_abs + (-d.exp_m1()).ln())
        }
    }
}

impl Sub for LogValue {
    type Output = LogValue;
    fn sub(self, rhs: LogValue) -> LogValue {
        self + (-rhs)
    }
}

impl Sum for LogValue {
    fn sum<I: Iterator<Item = LogValue>>(iter: I) -> LogValue {
        let terms: Vec<LogValue> = iter.collect();
        LogValue::sum_slice(&terms)
    }
}

//! Signed numbers stored as `sign * exp(ln_abs)`.
//!
//! Weights such as `exp(abs(x))` overflow `f64` long before the ergodic
//! schedules end, so every ratio of cumulative masses is formed here.

use std::ops::{Add, Mul, Neg};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogVal {
    /// -1, 0 or +1.
    pub sign: i8,
    pub ln_abs: f64,
}

impl LogVal {
    pub const ZERO: LogVal = LogVal {
        sign: 0,
        ln_abs: f64::NEG_INFINITY,
    };
    pub const ONE: LogVal = LogVal {
        sign: 1,
        ln_abs: 0.0,
    };

    pub fn from_f64(v: f64) -> Self {
        if v == 0.0 {
            Self::ZERO
        } else {
            LogVal {
                sign: if v > 0.0 { 1 } else { -1 },
                ln_abs: v.abs().ln(),
            }
        }
    }

    /// `exp(x)` without forming it.
    pub fn exp_of(x: f64) -> Self {
        LogVal { sign: 1, ln_abs: x }
    }

    pub fn positive_ln(ln_abs: f64) -> Self {
        LogVal { sign: 1, ln_abs }
    }

    pub fn to_f64(self) -> f64 {
        match self.sign {
            0 => 0.0,
            s => f64::from(s) * self.ln_abs.exp(),
        }
    }

    pub fn is_positive(self) -> bool {
        self.sign > 0 && !self.ln_abs.is_nan()
    }

    pub fn abs(self) -> Self {
        if self.sign == 0 {
            self
        } else {
            LogVal {
                sign: 1,
                ln_abs: self.ln_abs,
            }
        }
    }

    pub fn powi(self, n: u32) -> Self {
        if n == 0 {
            return Self::ONE;
        }
        if self.sign == 0 {
            return Self::ZERO;
        }
        let sign = if self.sign < 0 && n % 2 == 1 { -1 } else { 1 };
        LogVal {
            sign,
            ln_abs: self.ln_abs * f64::from(n),
        }
    }

    pub fn powf(self, p: f64) -> Self {
        debug_assert!(self.sign >= 0);
        if self.sign == 0 {
            return Self::ZERO;
        }
        LogVal {
            sign: 1,
            ln_abs: self.ln_abs * p,
        }
    }
}

impl Add for LogVal {
    type Output = LogVal;

    fn add(self, rhs: LogVal) -> LogVal {
        if self.sign == 0 {
            return rhs;
        }
        if rhs.sign == 0 {
            return self;
        }
        let (big, small) = if self.ln_abs >= rhs.ln_abs {
            (self, rhs)
        } else {
            (rhs, self)
        };
        if big.ln_abs == f64::INFINITY {
            return big;
        }
        let d = small.ln_abs - big.ln_abs;
        if big.sign == small.sign {
            LogVal {
                sign: big.sign,
                ln_abs: big.ln_abs + d.exp().ln_1p(),
            }
        } else if d == 0.0 {
            Self::ZERO
        } else {
            LogVal {
                sign: big.sign,
                ln_abs: big.ln_abs + (-d.exp()).ln_1p(),
            }
        }
    }
}

impl Mul for LogVal {
    type Output = LogVal;

    fn mul(self, rhs: LogVal) -> LogVal {
        if self.sign == 0 || rhs.sign == 0 {
            return Self::ZERO;
        }
        LogVal {
            sign: self.sign * rhs.sign,
            ln_abs: self.ln_abs + rhs.ln_abs,
        }
    }
}

impl Neg for LogVal {
    type Output = LogVal;

    fn neg(self) -> LogVal {
        LogVal {
            sign: -self.sign,
            ln_abs: self.ln_abs,
        }
    }
}

impl std::iter::Sum for LogVal {
    fn sum<I: Iterator<Item = LogVal>>(iter: I) -> LogVal {
        iter.fold(LogVal::ZERO, |a, b| a + b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_matches_plain_floats() {
        let cases = [(3.0, 4.0), (-2.5, 7.0), (1e-300, 1e-300), (5.0, -5.0), (0.0, -3.0)];
        for (a, b) in cases {
            let (la, lb) = (LogVal::from_f64(a), LogVal::from_f64(b));
            let s = (la + lb).to_f64();
            assert!((s - (a + b)).abs() <= 1e-12 * (a.abs() + b.abs()).max(1e-300), "{a}+{b}={s}");
            let p = (la * lb).to_f64();
            assert!((p - a * b).abs() <= 1e-12 * (a * b).abs().max(1e-300));
        }
    }

    #[test]
    fn huge_values_do_not_overflow() {
        let a = LogVal::exp_of(1000.0);
        let b = LogVal::exp_of(999.0);
        let ratio = (a + b).ln_abs - a.ln_abs;
        assert!((ratio - (-1.0f64).exp().ln_1p()).abs() < 1e-12);
        assert_eq!((-a + a), LogVal::ZERO);
        assert!((LogVal::from_f64(-2.0).powi(3).to_f64() + 8.0).abs() < 1e-14);
    }
}

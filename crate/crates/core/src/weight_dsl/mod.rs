//! Weight expressions: parsing, printing, evaluation and the symbolic
//! pieces (polynomial classification, closed-form cumulative masses).
//!
//! Grammar:
//!
//! ```text
//! expr   := ["-"] term { ("+"|"-") term } ;
//! term   := factor { "*" factor } ;
//! factor := atom [ "^" integer ] ;
//! atom   := number | "x" | "abs" "(" expr ")" | "exp" "(" expr ")" | "(" expr ")" ;
//! ```
//!
//! `t` is accepted as an alias of `x`. Subtraction `a - b` is stored as
//! `a + (-1)*b` (or `a + (-c)` when `b` is the literal `c`).

mod classify;
mod cumulative;
mod normal;
mod parse;
pub mod poly;

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::logval::LogVal;

pub use classify::{classify_polynomial, PolyClassification, QuadraticFactor, RejectionReason, DEFAULT_MAX_DEGREE};
pub use cumulative::{exact_cumulative, ClosedCumulative, CumulativeForm};
pub use parse::parse_weight;

/// Exact decimal literal `mantissa * 10^-scale`, kept with no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Decimal {
    mantissa: BigInt,
    scale: u32,
}

impl Decimal {
    pub fn new(mantissa: impl Into<BigInt>, scale: u32) -> Self {
        let mut d = Decimal {
            mantissa: mantissa.into(),
            scale,
        };
        d.normalize();
        d
    }

    pub fn from_int(v: i64) -> Self {
        Decimal::new(v, 0)
    }

    fn normalize(&mut self) {
        let ten = BigInt::from(10);
        if self.mantissa.is_zero() {
            self.scale = 0;
            return;
        }
        while self.scale > 0 && (&self.mantissa % &ten).is_zero() {
            self.mantissa /= &ten;
            self.scale -= 1;
        }
    }

    pub fn is_negative(&self) -> bool {
        self.mantissa.is_negative()
    }

    pub fn neg(&self) -> Self {
        Decimal {
            mantissa: -self.mantissa.clone(),
            scale: self.scale,
        }
    }

    pub fn abs(&self) -> Self {
        Decimal {
            mantissa: self.mantissa.abs(),
            scale: self.scale,
        }
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(self.mantissa.clone(), BigInt::from(10).pow(self.scale))
    }

    pub fn to_f64(&self) -> f64 {
        self.to_rational().to_f64().unwrap_or(f64::NAN)
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = self.mantissa.abs().to_string();
        if self.is_negative() {
            write!(f, "-")?;
        }
        let scale = self.scale as usize;
        if scale == 0 {
            return write!(f, "{digits}");
        }
        if digits.len() <= scale {
            write!(f, "0.{}{}", "0".repeat(scale - digits.len()), digits)
        } else {
            let (int, frac) = digits.split_at(digits.len() - scale);
            write!(f, "{int}.{frac}")
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum WeightExpr {
    Const(Decimal),
    X,
    Abs(Box<WeightExpr>),
    Exp(Box<WeightExpr>),
    Sum(Box<WeightExpr>, Box<WeightExpr>),
    Product(Box<WeightExpr>, Box<WeightExpr>),
    Pow(Box<WeightExpr>, u32),
}

impl WeightExpr {
    pub fn constant(v: i64) -> Self {
        WeightExpr::Const(Decimal::from_int(v))
    }

    pub fn abs(e: WeightExpr) -> Self {
        WeightExpr::Abs(Box::new(e))
    }

    pub fn exp(e: WeightExpr) -> Self {
        WeightExpr::Exp(Box::new(e))
    }

    pub fn sum(a: WeightExpr, b: WeightExpr) -> Self {
        WeightExpr::Sum(Box::new(a), Box::new(b))
    }

    pub fn product(a: WeightExpr, b: WeightExpr) -> Self {
        WeightExpr::Product(Box::new(a), Box::new(b))
    }

    pub fn pow(e: WeightExpr, n: u32) -> Self {
        WeightExpr::Pow(Box::new(e), n)
    }

    /// Negation as produced by the parser for unary and binary minus.
    pub fn negate(e: WeightExpr) -> Self {
        match e {
            WeightExpr::Const(c) => WeightExpr::Const(c.neg()),
            other => WeightExpr::product(WeightExpr::Const(Decimal::from_int(-1)), other),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            WeightExpr::Const(_) | WeightExpr::X => 1,
            WeightExpr::Abs(e) | WeightExpr::Exp(e) | WeightExpr::Pow(e, _) => 1 + e.depth(),
            WeightExpr::Sum(a, b) | WeightExpr::Product(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            WeightExpr::Const(c) => c.to_f64(),
            WeightExpr::X => x,
            WeightExpr::Abs(e) => e.eval(x).abs(),
            WeightExpr::Exp(e) => e.eval(x).exp(),
            WeightExpr::Sum(a, b) => a.eval(x) + b.eval(x),
            WeightExpr::Product(a, b) => a.eval(x) * b.eval(x),
            WeightExpr::Pow(e, n) => e.eval(x).powi(*n as i32),
        }
    }

    /// Evaluation in the signed log domain; never overflows for `exp` nests
    /// whose exponent itself is representable.
    pub fn eval_log(&self, x: f64) -> LogVal {
        match self {
            WeightExpr::Const(c) => LogVal::from_f64(c.to_f64()),
            WeightExpr::X => LogVal::from_f64(x),
            WeightExpr::Abs(e) => e.eval_log(x).abs(),
            WeightExpr::Exp(e) => {
                let v = e.eval(x);
                LogVal::exp_of(if v.is_finite() { v } else { e.eval_log(x).to_f64() })
            }
            WeightExpr::Sum(a, b) => a.eval_log(x) + b.eval_log(x),
            WeightExpr::Product(a, b) => a.eval_log(x) * b.eval_log(x),
            WeightExpr::Pow(e, n) => e.eval_log(x).powi(*n),
        }
    }

    fn fmt_expr(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightExpr::Sum(a, b) => {
                a.fmt_expr(f)?;
                match b.as_ref() {
                    WeightExpr::Const(c) if c.is_negative() => write!(f, " - {}", c.abs()),
                    WeightExpr::Product(m, t) if is_minus_one(m) && !matches!(t.as_ref(), WeightExpr::Const(_)) => {
                        write!(f, " - ")?;
                        t.fmt_term(f)
                    }
                    _ => {
                        write!(f, " + ")?;
                        b.fmt_term(f)
                    }
                }
            }
            _ => self.fmt_term(f),
        }
    }

    fn fmt_term(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightExpr::Product(a, b) => {
                a.fmt_term(f)?;
                write!(f, "*")?;
                b.fmt_factor(f)
            }
            _ => self.fmt_factor(f),
        }
    }

    fn fmt_factor(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightExpr::Pow(base, n) => {
                base.fmt_atom(f)?;
                write!(f, "^{n}")
            }
            _ => self.fmt_atom(f),
        }
    }

    fn fmt_atom(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightExpr::Const(c) if c.is_negative() => write!(f, "(-{})", c.abs()),
            WeightExpr::Const(c) => write!(f, "{c}"),
            WeightExpr::X => write!(f, "x"),
            WeightExpr::Abs(e) => {
                write!(f, "abs(")?;
                e.fmt_expr(f)?;
                write!(f, ")")
            }
            WeightExpr::Exp(e) => {
                write!(f, "exp(")?;
                e.fmt_expr(f)?;
                write!(f, ")")
            }
            _ => {
                write!(f, "(")?;
                self.fmt_expr(f)?;
                write!(f, ")")
            }
        }
    }
}

fn is_minus_one(e: &WeightExpr) -> bool {
    matches!(e, WeightExpr::Const(c) if *c == Decimal::from_int(-1))
}

impl fmt::Display for WeightExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_expr(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_normalizes_and_prints() {
        assert_eq!(Decimal::new(1500, 3).to_string(), "1.5");
        assert_eq!(Decimal::new(-5, 3).to_string(), "-0.005");
        assert_eq!(Decimal::new(0, 4), Decimal::from_int(0));
        assert_eq!(Decimal::new(2, 0).to_f64(), 2.0);
    }

    #[test]
    fn printing_subtraction_and_negatives() {
        let e = parse_weight("x^2 - 2*x + 1").unwrap();
        assert_eq!(e.to_string(), "x^2 - 2*x + 1");
        let e = parse_weight("-x^2 - 3").unwrap();
        assert_eq!(e.to_string(), "(-1)*x^2 - 3");
        assert_eq!(parse_weight(&e.to_string()).unwrap(), e);
        let e = WeightExpr::pow(WeightExpr::Const(Decimal::from_int(-2)), 3);
        assert_eq!(e.to_string(), "(-2)^3");
        assert_eq!(e.eval(0.0), -8.0);
    }

    #[test]
    fn log_eval_agrees_with_direct() {
        let e = parse_weight("(1 + abs(x))*exp(abs(x)) - 0.5").unwrap();
        for x in [-3.0, 0.0, 0.25, 7.5] {
            let direct = e.eval(x);
            let logged = e.eval_log(x).to_f64();
            assert!((direct - logged).abs() <= 1e-12 * direct.abs());
        }
        let big = parse_weight("exp(abs(x))").unwrap().eval_log(5000.0);
        assert_eq!(big.ln_abs, 5000.0);
    }
}

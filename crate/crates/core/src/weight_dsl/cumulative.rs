use num_traits::ToPrimitive;

use super::normal::normal_form;
use super::WeightExpr;
use crate::logval::LogVal;

/// `coeff * T^power`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct PowerPiece {
    coeff: f64,
    power: u32,
}

/// `coeff * e^alpha * (E(k1, T) + E(k2, T))` with `E(k, T) = (e^{kT} - 1)/k`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct ExpPiece {
    coeff: f64,
    alpha: f64,
    k1: f64,
    k2: f64,
}

/// Closed form of `T -> integral of the weight over [-T, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedCumulative {
    powers: Vec<PowerPiece>,
    exps: Vec<ExpPiece>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CumulativeForm {
    Closed(ClosedCumulative),
    Unavailable,
}

impl CumulativeForm {
    pub fn is_closed(&self) -> bool {
        matches!(self, CumulativeForm::Closed(_))
    }

    pub fn value(&self, t: f64) -> Option<f64> {
        match self {
            CumulativeForm::Closed(c) => Some(c.value(t)),
            CumulativeForm::Unavailable => None,
        }
    }

    pub fn ln_value(&self, t: f64) -> Option<f64> {
        match self {
            CumulativeForm::Closed(c) => Some(c.ln_value(t)),
            CumulativeForm::Unavailable => None,
        }
    }
}

/// `ln E(k, T)` for `T > 0`.
fn ln_e(k: f64, t: f64) -> f64 {
    if k > 0.0 {
        k * t + (-(-k * t).exp_m1()).ln() - k.ln()
    } else if k < 0.0 {
        (-(k * t).exp_m1()).ln() - (-k).ln()
    } else {
        t.ln()
    }
}

impl ClosedCumulative {
    pub fn log_value(&self, t: f64) -> LogVal {
        let lt = t.ln();
        let powers = self
            .powers
            .iter()
            .map(|p| LogVal::from_f64(p.coeff) * LogVal::positive_ln(f64::from(p.power) * lt));
        let exps = self.exps.iter().map(|e| {
            let inner = LogVal::positive_ln(ln_e(e.k1, t)) + LogVal::positive_ln(ln_e(e.k2, t));
            LogVal::from_f64(e.coeff) * LogVal::exp_of(e.alpha) * inner
        });
        powers.chain(exps).sum()
    }

    fn direct(&self, t: f64) -> f64 {
        let powers: f64 = self.powers.iter().map(|p| p.coeff * t.powi(p.power as i32)).sum();
        let e = |k: f64| if k == 0.0 { t } else { (k * t).exp_m1() / k };
        let exps: f64 = self.exps.iter().map(|x| x.coeff * x.alpha.exp() * (e(x.k1) + e(x.k2))).sum();
        powers + exps
    }

    pub fn ln_value(&self, t: f64) -> f64 {
        let d = self.direct(t);
        if d.is_finite() && d > 1e-300 {
            return d.ln();
        }
        let v = self.log_value(t);
        if v.sign > 0 {
            v.ln_abs
        } else {
            f64::NAN
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        let d = self.direct(t);
        if d.is_finite() {
            d
        } else {
            self.log_value(t).to_f64()
        }
    }
}

/// Closed-form cumulative mass for polynomials in `x` and `|x|` and for
/// constant multiples of `exp(a + b x + c |x|)`; anything else is
/// `Unavailable` and callers integrate numerically.
pub fn exact_cumulative(expr: &WeightExpr) -> CumulativeForm {
    let nf = match normal_form(expr, 4096) {
        Ok(Some(nf)) => nf,
        _ => return CumulativeForm::Unavailable,
    };
    let mut powers = Vec::new();
    let mut exps = Vec::new();
    for (key, poly) in &nf.terms {
        if key.is_zero() {
            for (&(a, b), c) in poly {
                if a % 2 == 1 {
                    continue;
                }
                let n = a + b + 1;
                let coeff = 2.0 * c.to_f64().unwrap_or(f64::NAN) / f64::from(n);
                powers.push(PowerPiece { coeff, power: n });
            }
        } else {
            if poly.len() != 1 || !poly.contains_key(&(0, 0)) {
                return CumulativeForm::Unavailable;
            }
            let coeff = poly[&(0, 0)].to_f64().unwrap_or(f64::NAN);
            let beta = key.x.to_f64().unwrap_or(f64::NAN);
            let gamma = key.abs_x.to_f64().unwrap_or(f64::NAN);
            exps.push(ExpPiece {
                coeff,
                alpha: key.constant.to_f64().unwrap_or(f64::NAN),
                k1: gamma + beta,
                k2: gamma - beta,
            });
        }
    }
    CumulativeForm::Closed(ClosedCumulative { powers, exps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate_split, QuadOptions};
    use crate::weight_dsl::parse_weight;

    fn closed(s: &str) -> ClosedCumulative {
        match exact_cumulative(&parse_weight(s).unwrap()) {
            CumulativeForm::Closed(c) => c,
            CumulativeForm::Unavailable => panic!("{s} should have a closed form"),
        }
    }

    #[test]
    fn exp_abs_normalizer() {
        let c = closed("exp(abs(x))");
        for t in [0.5f64, 1.0, 10.0, 300.0] {
            let want = 2.0 * t.exp_m1();
            assert!((c.value(t) - want).abs() <= 1e-13 * want);
        }
        // Log twin stays finite far past f64 overflow.
        assert!((c.ln_value(5000.0) - (5000.0 + 2f64.ln())).abs() < 1e-9);
    }

    #[test]
    fn constant_and_abs_polynomial() {
        assert_eq!(closed("1").value(5.0), 10.0);
        let c = closed("1+abs(x)");
        for t in [1.0, 2.0, 5.0, 10.0] {
            assert!((c.value(t) - (2.0 * t + t * t)).abs() < 1e-12 * (2.0 * t + t * t));
        }
    }

    #[test]
    fn closed_forms_match_quadrature() {
        let catalog = [
            "1",
            "2+abs(x)",
            "x^2+1",
            "x^4 - x^2 + 1",
            "x*abs(x) + x^2 + 3",
            "3*exp(abs(x))",
            "exp(0.5*abs(x) + x/1)",
            "exp(abs(x)) + 1 + abs(x)^3",
            "exp(-abs(x)) + 1",
        ];
        for s in catalog {
            let s = s.replace("x/1", "0.25*x");
            let e = parse_weight(&s).unwrap();
            let c = closed(&s);
            for t in [1.0, 5.0, 10.0, 20.0] {
                let q = integrate_split(|x| e.eval(x), -t, t, &[0.0], &QuadOptions::with_tol(1e-13)).unwrap();
                let rel = (c.value(t) - q.value).abs() / q.value.abs();
                assert!(rel <= 1e-8, "{s} at T={t}: {} vs {}", c.value(t), q.value);
            }
        }
    }

    #[test]
    fn unavailable_cases() {
        assert!(!exact_cumulative(&parse_weight("exp(-x^2)").unwrap()).is_closed());
        assert!(!exact_cumulative(&parse_weight("x^2*exp(abs(x))").unwrap()).is_closed());
    }
}

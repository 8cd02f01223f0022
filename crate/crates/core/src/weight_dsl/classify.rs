use num_traits::{Signed, ToPrimitive};
use serde::Serialize;

use super::normal::normal_form;
use super::poly::{complex_roots, Poly};
use super::WeightExpr;
use crate::error::Result;

pub const DEFAULT_MAX_DEGREE: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectionReason {
    OddDegree,
    RealRoot,
    NegativeValues,
    NotPolynomial,
}

/// `x^2 + a x + b` raised to `multiplicity`, with `a^2 - 4b < 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadraticFactor {
    pub a: f64,
    pub b: f64,
    pub multiplicity: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolyClassification {
    pub is_polynomial: bool,
    pub degree: usize,
    pub is_weight: bool,
    /// Polynomial weights belong to the continuous translation-ratio class.
    pub in_ws: bool,
    pub leading: f64,
    pub factors: Vec<QuadraticFactor>,
    pub rejection: Option<RejectionReason>,
}

impl PolyClassification {
    fn rejected(is_polynomial: bool, degree: usize, leading: f64, reason: RejectionReason) -> Self {
        PolyClassification {
            is_polynomial,
            degree,
            is_weight: false,
            in_ws: false,
            leading,
            factors: Vec::new(),
            rejection: Some(reason),
        }
    }

    /// `leading * prod (x^2 + a x + b)^m`.
    pub fn reconstruct(&self, x: f64) -> f64 {
        self.factors
            .iter()
            .fold(self.leading, |acc, f| acc * (x * x + f.a * x + f.b).powi(f.multiplicity as i32))
    }
}

/// Decide whether `expr` is a polynomial weight and, if so, factor it into
/// irreducible real quadratics.
pub fn classify_polynomial(expr: &WeightExpr, max_degree: usize) -> Result<PolyClassification> {
    let poly = match normal_form(expr, max_degree)?.and_then(|nf| nf.as_polynomial()) {
        Some(p) => p,
        None => return Ok(PolyClassification::rejected(false, 0, f64::NAN, RejectionReason::NotPolynomial)),
    };
    let degree = poly.degree();
    let leading = poly.leading().to_f64().unwrap_or(f64::NAN);
    if poly.is_zero() {
        return Ok(PolyClassification::rejected(true, 0, 0.0, RejectionReason::RealRoot));
    }
    if degree % 2 == 1 {
        return Ok(PolyClassification::rejected(true, degree, leading, RejectionReason::OddDegree));
    }
    if poly.leading().is_negative() {
        return Ok(PolyClassification::rejected(true, degree, leading, RejectionReason::NegativeValues));
    }
    if poly.count_real_roots() > 0 {
        return Ok(PolyClassification::rejected(true, degree, leading, RejectionReason::RealRoot));
    }
    let mut factors = Vec::new();
    for (part, multiplicity) in poly.square_free_decomposition() {
        factors.extend(quadratic_factors(&part, multiplicity as u32));
    }
    factors.sort_by(|p, q| p.a.total_cmp(&q.a).then(p.b.total_cmp(&q.b)));
    Ok(PolyClassification {
        is_polynomial: true,
        degree,
        is_weight: true,
        in_ws: true,
        leading,
        factors,
        rejection: None,
    })
}

/// Split a monic square-free polynomial without real roots into
/// conjugate-pair quadratics.
fn quadratic_factors(part: &Poly, multiplicity: u32) -> Vec<QuadraticFactor> {
    if part.degree() == 2 {
        let c = part.coeffs();
        return vec![QuadraticFactor {
            a: (&c[1] / &c[2]).to_f64().unwrap_or(f64::NAN),
            b: (&c[0] / &c[2]).to_f64().unwrap_or(f64::NAN),
            multiplicity,
        }];
    }
    let mut roots = complex_roots(&part.to_f64());
    roots.sort_by(|p, q| q.im.total_cmp(&p.im));
    let half = roots.len() / 2;
    let (upper, lower) = roots.split_at(half);
    let mut factors: Vec<QuadraticFactor> = upper
        .iter()
        .map(|z| {
            // Average with the nearest conjugate partner.
            let partner = lower
                .iter()
                .min_by(|p, q| (p.conj() - z).norm().total_cmp(&(q.conj() - z).norm()))
                .map(|p| p.conj())
                .unwrap_or(*z);
            let z = (z + partner) * 0.5;
            QuadraticFactor {
                a: -2.0 * z.re,
                b: z.norm_sqr(),
                multiplicity,
            }
        })
        .collect();
    factors.sort_by(|p, q| p.a.total_cmp(&q.a).then(p.b.total_cmp(&q.b)));
    factors
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weight_dsl::parse_weight;

    fn classify(s: &str) -> PolyClassification {
        classify_polynomial(&parse_weight(s).unwrap(), DEFAULT_MAX_DEGREE).unwrap()
    }

    #[test]
    fn x_squared_plus_one() {
        let c = classify("x^2+1");
        assert!(c.is_weight && c.in_ws);
        assert_eq!(c.degree, 2);
        assert_eq!(c.leading, 1.0);
        assert_eq!(c.factors, vec![QuadraticFactor { a: 0.0, b: 1.0, multiplicity: 1 }]);
    }

    #[test]
    fn odd_degree_rejected() {
        let c = classify("x^3+1");
        assert!(!c.is_weight);
        assert_eq!(c.rejection, Some(RejectionReason::OddDegree));
    }

    #[test]
    fn double_root_rejected() {
        let c = classify("x^2-2*x+1");
        assert_eq!(c.rejection, Some(RejectionReason::RealRoot));
    }

    #[test]
    fn other_rejections() {
        assert_eq!(classify("1+abs(x)").rejection, Some(RejectionReason::NotPolynomial));
        assert_eq!(classify("-x^2-1").rejection, Some(RejectionReason::NegativeValues));
        assert_eq!(classify("0").rejection, Some(RejectionReason::RealRoot));
        assert_eq!(classify("x^4-1").rejection, Some(RejectionReason::RealRoot));
    }

    #[test]
    fn constants_and_multiplicities() {
        let c = classify("3");
        assert!(c.is_weight);
        assert_eq!(c.degree, 0);
        assert!(c.factors.is_empty());
        let c = classify("2*(x^2+1)^3*(x^2+x+1)*(x^2-3*x+5)");
        assert!(c.is_weight);
        assert_eq!(c.degree, 10);
        assert_eq!(c.factors.len(), 3);
        let total: u32 = c.factors.iter().map(|f| 2 * f.multiplicity).sum();
        assert_eq!(total as usize, c.degree);
        for f in &c.factors {
            assert!(f.a * f.a - 4.0 * f.b < 0.0);
        }
        for k in 0..32 {
            let x = -8.0 + 0.5 * k as f64;
            let want = parse_weight("2*(x^2+1)^3*(x^2+x+1)*(x^2-3*x+5)").unwrap().eval(x);
            assert!((c.reconstruct(x) - want).abs() <= 1e-9 * want.abs());
        }
    }

    #[test]
    fn degree_overflow() {
        let e = parse_weight("(x^2+1)^33").unwrap();
        assert!(classify_polynomial(&e, DEFAULT_MAX_DEGREE).is_err());
        assert!(classify_polynomial(&e, 66).unwrap().is_weight);
    }
}

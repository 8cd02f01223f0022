//! Normal form `sum_k P_k(x, |x|) * exp(alpha_k + beta_k x + gamma_k |x|)` with
//! exact rational coefficients. Expressions outside this family (for example
//! `exp(x^2)`) have no normal form.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::poly::Poly;
use super::WeightExpr;
use crate::error::{Error, Result};

/// `x^a |x|^b` with `b` in {0, 1}.
pub(crate) type Monomial = (u32, u32);

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) struct ExpKey {
    pub constant: BigRational,
    pub x: BigRational,
    pub abs_x: BigRational,
}

impl ExpKey {
    fn zero() -> Self {
        ExpKey {
            constant: BigRational::zero(),
            x: BigRational::zero(),
            abs_x: BigRational::zero(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.constant.is_zero() && self.x.is_zero() && self.abs_x.is_zero()
    }

    fn add(&self, o: &ExpKey) -> ExpKey {
        ExpKey {
            constant: &self.constant + &o.constant,
            x: &self.x + &o.x,
            abs_x: &self.abs_x + &o.abs_x,
        }
    }
}

pub(crate) type Poly2 = BTreeMap<Monomial, BigRational>;

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct NormalForm {
    pub terms: BTreeMap<ExpKey, Poly2>,
}

fn mono_mul(p: Monomial, q: Monomial) -> Monomial {
    let (a, b) = (p.0 + q.0, p.1 + q.1);
    if b >= 2 {
        (a + 2, b - 2)
    } else {
        (a, b)
    }
}

fn poly2_degree(p: &Poly2) -> usize {
    p.keys().map(|(a, b)| (a + b) as usize).max().unwrap_or(0)
}

fn poly2_mul(p: &Poly2, q: &Poly2) -> Poly2 {
    let mut out = Poly2::new();
    for (mp, cp) in p {
        for (mq, cq) in q {
            *out.entry(mono_mul(*mp, *mq)).or_insert_with(BigRational::zero) += cp * cq;
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

impl NormalForm {
    fn constant(c: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(ExpKey::zero(), Poly2::from([((0, 0), c)]));
        }
        NormalForm { terms }
    }

    fn x() -> Self {
        NormalForm {
            terms: BTreeMap::from([(ExpKey::zero(), Poly2::from([((1, 0), BigRational::one())]))]),
        }
    }

    fn add(mut self, other: NormalForm) -> Self {
        for (k, p) in other.terms {
            let slot = self.terms.entry(k).or_default();
            for (m, c) in p {
                *slot.entry(m).or_insert_with(BigRational::zero) += c;
            }
            slot.retain(|_, c| !c.is_zero());
        }
        self.terms.retain(|_, p| !p.is_empty());
        self
    }

    fn mul(&self, other: &NormalForm, max_degree: usize) -> Result<Self> {
        let mut out = NormalForm { terms: BTreeMap::new() };
        for (k1, p1) in &self.terms {
            for (k2, p2) in &other.terms {
                let deg = poly2_degree(p1) + poly2_degree(p2);
                if deg > max_degree {
                    return Err(Error::DegreeOverflow { degree: deg, max: max_degree });
                }
                let prod = poly2_mul(p1, p2);
                out = out.add(NormalForm {
                    terms: BTreeMap::from([(k1.add(k2), prod)]),
                });
            }
        }
        Ok(out)
    }

    pub fn degree(&self) -> usize {
        self.terms.values().map(poly2_degree).max().unwrap_or(0)
    }

    /// Univariate polynomial in `x`, when the form is one.
    pub fn as_polynomial(&self) -> Option<Poly> {
        if self.terms.is_empty() {
            return Some(Poly::zero());
        }
        if self.terms.len() != 1 {
            return None;
        }
        let (key, p) = self.terms.iter().next()?;
        if !key.is_zero() || p.keys().any(|(_, b)| *b != 0) {
            return None;
        }
        let n = poly2_degree(p);
        let mut coeffs = vec![BigRational::zero(); n + 1];
        for ((a, _), c) in p {
            coeffs[*a as usize] = c.clone();
        }
        Some(Poly::new(coeffs))
    }

    /// `(alpha, beta, gamma)` when the form is a linear exponent argument.
    fn as_linear_exponent(&self) -> Option<ExpKey> {
        if self.terms.is_empty() {
            return Some(ExpKey::zero());
        }
        if self.terms.len() != 1 {
            return None;
        }
        let (key, p) = self.terms.iter().next()?;
        if !key.is_zero() {
            return None;
        }
        let mut lin = ExpKey::zero();
        for (m, c) in p {
            match m {
                (0, 0) => lin.constant = c.clone(),
                (1, 0) => lin.x = c.clone(),
                (0, 1) => lin.abs_x = c.clone(),
                _ => return None,
            }
        }
        Some(lin)
    }

    fn abs(&self) -> Option<Self> {
        if self.terms.is_empty() {
            return Some(self.clone());
        }
        if self.terms.len() == 1 {
            let (key, p) = self.terms.iter().next()?;
            if p.len() == 1 {
                let (&(a, b), c) = p.iter().next()?;
                let m = mono_mul((a - a % 2, 0), (0, b + a % 2));
                return Some(NormalForm {
                    terms: BTreeMap::from([(key.clone(), Poly2::from([(m, c.abs())]))]),
                });
            }
        }
        // Sign-definite polynomials: abs is +-p.
        let poly = self.as_polynomial()?;
        if poly.degree() % 2 == 0 && poly.count_real_roots() == 0 {
            if poly.leading().is_negative() {
                let minus = NormalForm::constant(-BigRational::one());
                return minus.mul(self, usize::MAX).ok();
            }
            return Some(self.clone());
        }
        None
    }
}

/// Normal form of `expr`; `Ok(None)` when it has none.
pub(crate) fn normal_form(expr: &WeightExpr, max_degree: usize) -> Result<Option<NormalForm>> {
    Ok(match expr {
        WeightExpr::Const(c) => Some(NormalForm::constant(c.to_rational())),
        WeightExpr::X => Some(NormalForm::x()),
        WeightExpr::Sum(a, b) => match (normal_form(a, max_degree)?, normal_form(b, max_degree)?) {
            (Some(a), Some(b)) => Some(a.add(b)),
            _ => None,
        },
        WeightExpr::Product(a, b) => match (normal_form(a, max_degree)?, normal_form(b, max_degree)?) {
            (Some(a), Some(b)) => Some(a.mul(&b, max_degree)?),
            _ => None,
        },
        WeightExpr::Pow(e, n) => match normal_form(e, max_degree)? {
            Some(base) => {
                let deg = base.degree().saturating_mul(*n as usize);
                if deg > max_degree {
                    return Err(Error::DegreeOverflow { degree: deg, max: max_degree });
                }
                let mut acc = NormalForm::constant(BigRational::from_integer(BigInt::one()));
                let mut sq = base;
                let mut k = *n;
                while k > 0 {
                    if k & 1 == 1 {
                        acc = acc.mul(&sq, max_degree)?;
                    }
                    k >>= 1;
                    if k > 0 {
                        sq = sq.mul(&sq, max_degree)?;
                    }
                }
                Some(acc)
            }
            None => None,
        },
        WeightExpr::Abs(e) => normal_form(e, max_degree)?.and_then(|nf| nf.abs()),
        WeightExpr::Exp(e) => normal_form(e, max_degree)?
            .and_then(|nf| nf.as_linear_exponent())
            .map(|key| NormalForm {
                terms: BTreeMap::from([(key, Poly2::from([((0, 0), BigRational::one())]))]),
            }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weight_dsl::parse_weight;

    fn nf(s: &str) -> Option<NormalForm> {
        normal_form(&parse_weight(s).unwrap(), 64).unwrap()
    }

    #[test]
    fn polynomials_expand() {
        let p = nf("(x+1)^2 - 2*x").unwrap().as_polynomial().unwrap();
        assert_eq!(p, Poly::from_i64(&[1, 0, 1]));
        let p = nf("abs(x)^2").unwrap().as_polynomial().unwrap();
        assert_eq!(p, Poly::from_i64(&[0, 0, 1]));
        let p = nf("abs(-x^2 - 1)").unwrap().as_polynomial().unwrap();
        assert_eq!(p, Poly::from_i64(&[1, 0, 1]));
    }

    #[test]
    fn exp_family() {
        let f = nf("2*exp(abs(x) + 1)*exp(x)").unwrap();
        assert_eq!(f.terms.len(), 1);
        let key = f.terms.keys().next().unwrap();
        assert_eq!(key.abs_x, BigRational::one());
        assert_eq!(key.x, BigRational::one());
        assert!(nf("exp(x^2)").is_none());
        assert!(nf("abs(x - 1)").is_none());
        assert!(nf("1 + abs(x)").unwrap().as_polynomial().is_none());
    }

    #[test]
    fn degree_cap() {
        let e = parse_weight("(x^2+1)^40").unwrap();
        assert!(matches!(normal_form(&e, 64), Err(Error::DegreeOverflow { degree: 80, .. })));
    }
}

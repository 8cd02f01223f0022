//! Almost periodic functions: trigonometric polynomials with vector
//! coefficients, black-box function handles, Bohr means, transforms and
//! spectrum scans.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::ergodic::{ergodic_curve, ErgodicCurve, LimitKind, Mode, Schedule};
use crate::error::{Error, Result};
use crate::weights::Weight;

/// Frequencies closer than this are the same frequency.
pub const FREQ_TOL: f64 = 1e-9;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrigTerm {
    pub coeff: Vec<Complex64>,
    pub lambda: f64,
}

/// `sum_k a_k e^{i lambda_k t}` with distinct frequencies, sorted ascending,
/// and no zero coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPoly {
    dim: usize,
    terms: Vec<TrigTerm>,
}

impl TrigPoly {
    pub fn new(dim: usize, terms: Vec<TrigTerm>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        for t in &terms {
            if t.coeff.len() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: t.coeff.len(),
                });
            }
            if !t.lambda.is_finite() || t.coeff.iter().any(|z| !z.is_finite()) {
                return Err(Error::InvalidParameter("non-finite term".into()));
            }
        }
        let mut sorted = terms;
        sorted.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
        let mut merged: Vec<TrigTerm> = Vec::with_capacity(sorted.len());
        for t in sorted {
            match merged.last_mut() {
                Some(last) if (t.lambda - last.lambda).abs() <= FREQ_TOL => {
                    for (a, b) in last.coeff.iter_mut().zip(&t.coeff) {
                        *a += b;
                    }
                }
                _ => merged.push(t),
            }
        }
        merged.retain(|t| t.coeff.iter().any(|z| *z != ZERO));
        Ok(TrigPoly { dim, terms: merged })
    }

    pub fn zero(dim: usize) -> Self {
        TrigPoly { dim, terms: Vec::new() }
    }

    /// Scalar polynomial from `(coefficient, frequency)` pairs.
    pub fn scalar(terms: &[(Complex64, f64)]) -> Self {
        let terms = terms
            .iter()
            .map(|&(c, lambda)| TrigTerm { coeff: vec![c], lambda })
            .collect();
        TrigPoly::new(1, terms).expect("scalar terms are well formed")
    }

    /// Real scalar polynomial `c + sum a cos(l t) + sum b sin(l t)`.
    pub fn real(c: f64, cos: &[(f64, f64)], sin: &[(f64, f64)]) -> Self {
        let mut terms = vec![(Complex64::new(c, 0.0), 0.0)];
        for &(a, l) in cos {
            terms.push((Complex64::new(a / 2.0, 0.0), l));
            terms.push((Complex64::new(a / 2.0, 0.0), -l));
        }
        for &(b, l) in sin {
            terms.push((Complex64::new(0.0, -b / 2.0), l));
            terms.push((Complex64::new(0.0, b / 2.0), -l));
        }
        TrigPoly::scalar(&terms)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[TrigTerm] {
        &self.terms
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.lambda).collect()
    }

    pub fn max_frequency(&self) -> f64 {
        self.terms.iter().map(|t| t.lambda.abs()).fold(0.0, f64::max)
    }

    /// `sum_k |a_k|`, a bound on the sup norm.
    pub fn sup_bound(&self) -> f64 {
        self.terms.iter().map(|t| vec_norm(&t.coeff)).sum()
    }

    pub fn eval(&self, t: f64) -> Vec<Complex64> {
        let mut out = vec![ZERO; self.dim];
        self.eval_into(t, &mut out);
        out
    }

    pub fn eval_into(&self, t: f64, out: &mut [Complex64]) {
        out.fill(ZERO);
        for term in &self.terms {
            let e = Complex64::from_polar(1.0, term.lambda * t);
            for (o, a) in out.iter_mut().zip(&term.coeff) {
                *o += a * e;
            }
        }
    }

    /// Exact Bohr transform: the coefficient at `lambda`, or zero.
    pub fn bohr_transform(&self, lambda: f64) -> Vec<Complex64> {
        self.terms
            .iter()
            .find(|t| (t.lambda - lambda).abs() <= FREQ_TOL)
            .map(|t| t.coeff.clone())
            .unwrap_or_else(|| vec![ZERO; self.dim])
    }

    /// Exact Bohr mean, the zero-frequency coefficient.
    pub fn bohr_mean(&self) -> Vec<Complex64> {
        self.bohr_transform(0.0)
    }

    /// `t -> p(t + alpha)`.
    pub fn translate(&self, alpha: f64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let e = Complex64::from_polar(1.0, t.lambda * alpha);
                TrigTerm {
                    coeff: t.coeff.iter().map(|a| a * e).collect(),
                    lambda: t.lambda,
                }
            })
            .collect();
        TrigPoly::new(self.dim, terms).expect("translation keeps dimensions")
    }

    pub fn add(&self, other: &TrigPoly) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        TrigPoly::new(self.dim, self.terms.iter().chain(&other.terms).cloned().collect())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| TrigTerm {
                coeff: t.coeff.iter().map(|a| a * c).collect(),
                lambda: t.lambda,
            })
            .collect();
        TrigPoly::new(self.dim, terms).expect("scaling keeps dimensions")
    }

    /// Each coefficient multiplied by `m(lambda_k)`; convolution with a
    /// kernel whose Fourier value at `lambda` is `m(lambda)`.
    pub fn multiply_spectrum(&self, m: impl Fn(f64) -> Complex64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let f = m(t.lambda);
                TrigTerm {
                    coeff: t.coeff.iter().map(|a| a * f).collect(),
                    lambda: t.lambda,
                }
            })
            .collect();
        TrigPoly::new(self.dim, terms).expect("multiplier keeps dimensions")
    }

    /// Grid points whose exact coefficient magnitude exceeds `threshold`.
    pub fn spectrum(&self, grid: &[f64], threshold: f64) -> SpectrumSet {
        let lines = grid
            .iter()
            .map(|&l| SpectralLine::new(l, self.bohr_transform(l)))
            .filter(|l| l.magnitude > threshold)
            .collect();
        SpectrumSet { threshold, lines }
    }

    pub fn to_handle(&self) -> FunctionHandle {
        let p = self.clone();
        let omega = self.max_frequency();
        FunctionHandle::new(self.dim, move |t, out| p.eval_into(t, out))
            .with_sup_bound(self.sup_bound())
            .with_max_frequency(omega)
    }
}

impl fmt::Display for TrigPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, t) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            let c: Vec<String> = t.coeff.iter().map(|z| format!("({} {:+}i)", z.re, z.im)).collect();
            write!(f, "{}*e^(i*{}*t)", c.join(","), t.lambda)?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    re: Vec<f64>,
    im: Vec<f64>,
    lambda: f64,
}

#[derive(Serialize, Deserialize)]
struct TrigPolyJson {
    dim: usize,
    terms: Vec<TermJson>,
}

impl Serialize for TrigPoly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TrigPolyJson {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|t| TermJson {
                    re: t.coeff.iter().map(|z| z.re).collect(),
                    im: t.coeff.iter().map(|z| z.im).collect(),
                    lambda: t.lambda,
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for TrigPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = TrigPolyJson::deserialize(d)?;
        let mut terms = Vec::with_capacity(raw.terms.len());
        for t in raw.terms {
            if t.re.len() != t.im.len() {
                return Err(serde::de::Error::custom("re and im lengths differ"));
            }
            terms.push(TrigTerm {
                coeff: t.re.iter().zip(&t.im).map(|(&re, &im)| Complex64::new(re, im)).collect(),
                lambda: t.lambda,
            });
        }
        TrigPoly::new(raw.dim, terms).map_err(serde::de::Error::custom)
    }
}

type EvalFn = dyn Fn(f64, &mut [Complex64]) + Send + Sync;

/// A bounded continuous function `R -> C^d` given by an evaluator.
#[derive(Clone)]
pub struct FunctionHandle {
    dim: usize,
    eval: Arc<EvalFn>,
    sup_bound: Option<f64>,
    max_frequency: Option<f64>,
    breaks: Vec<f64>,
}

impl fmt::Debug for FunctionHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FunctionHandle")
            .field("dim", &self.dim)
            .field("sup_bound", &self.sup_bound)
            .field("max_frequency", &self.max_frequency)
            .field("breaks", &self.breaks)
            .finish()
    }
}

impl FunctionHandle {
    pub fn new(dim: usize, f: impl Fn(f64, &mut [Complex64]) + Send + Sync + 'static) -> Self {
        FunctionHandle {
            dim,
            eval: Arc::new(f),
            sup_bound: None,
            max_frequency: None,
            breaks: Vec::new(),
        }
    }

    /// Real scalar function.
    pub fn scalar(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        FunctionHandle::new(1, move |t, out| out[0] = Complex64::new(f(t), 0.0))
    }

    pub fn zero(dim: usize) -> Self {
        FunctionHandle::new(dim, |_, out| out.fill(ZERO))
            .with_sup_bound(0.0)
            .with_max_frequency(0.0)
    }

    pub fn with_sup_bound(mut self, bound: f64) -> Self {
        self.sup_bound = Some(bound);
        self
    }

    /// Largest frequency present; bounds the quadrature step. Handles
    /// without one are treated as non-oscillatory.
    pub fn with_max_frequency(mut self, omega: f64) -> Self {
        self.max_frequency = Some(omega.abs());
        self
    }

    /// Points where the function is not smooth (quadrature splits there).
    pub fn with_breaks(mut self, breaks: Vec<f64>) -> Self {
        self.breaks = breaks;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sup_bound(&self) -> Option<f64> {
        self.sup_bound
    }

    pub fn max_frequency(&self) -> Option<f64> {
        self.max_frequency
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn eval(&self, t: f64) -> Vec<Complex64> {
        let mut out = vec![ZERO; self.dim];
        (self.eval)(t, &mut out);
        out
    }

    pub fn eval_into(&self, t: f64, out: &mut [Complex64]) {
        (self.eval)(t, out)
    }

    pub fn norm_at(&self, t: f64) -> f64 {
        vec_norm(&self.eval(t))
    }

    pub fn add(&self, other: &FunctionHandle) -> Result<FunctionHandle> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        let (a, b) = (self.eval.clone(), other.eval.clone());
        let dim = self.dim;
        let mut h = FunctionHandle::new(dim, move |t, out| {
            a(t, out);
            let mut tmp = vec![ZERO; dim];
            b(t, &mut tmp);
            for (o, v) in out.iter_mut().zip(tmp) {
                *o += v;
            }
        });
        h.sup_bound = self.sup_bound.zip(other.sup_bound).map(|(x, y)| x + y);
        h.max_frequency = match (self.max_frequency, other.max_frequency) {
            (Some(x), Some(y)) => Some(x.max(y)),
            (x, y) => x.or(y),
        };
        h.breaks = self.breaks.iter().chain(&other.breaks).copied().collect();
        Ok(h)
    }

    /// `t -> f(t + s)`.
    pub fn translate(&self, s: f64) -> FunctionHandle {
        let f = self.eval.clone();
        let mut h = self.clone();
        h.eval = Arc::new(move |t, out| f(t + s, out));
        h.breaks = self.breaks.iter().map(|b| b - s).collect();
        h
    }

    pub fn scale(&self, c: f64) -> FunctionHandle {
        let f = self.eval.clone();
        let mut h = self.clone();
        h.eval = Arc::new(move |t, out| {
            f(t, out);
            for o in out.iter_mut() {
                *o *= c;
            }
        });
        h.sup_bound = self.sup_bound.map(|b| b * c.abs());
        h
    }

    /// `t -> f(t) e^{-i lambda t}`.
    pub fn modulate(&self, lambda: f64) -> FunctionHandle {
        let f = self.eval.clone();
        let mut h = self.clone();
        h.eval = Arc::new(move |t, out| {
            f(t, out);
            let e = Complex64::from_polar(1.0, -lambda * t);
            for o in out.iter_mut() {
                *o *= e;
            }
        });
        h.max_frequency = Some(self.max_frequency.unwrap_or(0.0) + lambda.abs());
        h
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralLine {
    pub lambda: f64,
    pub coeff: Vec<Complex64>,
    pub magnitude: f64,
}

impl SpectralLine {
    fn new(lambda: f64, coeff: Vec<Complex64>) -> Self {
        let magnitude = vec_norm(&coeff);
        SpectralLine { lambda, coeff, magnitude }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumSet {
    pub threshold: f64,
    pub lines: Vec<SpectralLine>,
}

impl SpectrumSet {
    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    pub fn coefficient(&self, lambda: f64) -> Option<&[Complex64]> {
        self.lines
            .iter()
            .find(|l| (l.lambda - lambda).abs() <= FREQ_TOL)
            .map(|l| l.coeff.as_slice())
    }
}

/// Numerical Bohr transform with its ergodic curve.
#[derive(Debug, Clone, Serialize)]
pub struct TransformEstimate {
    pub lambda: f64,
    /// The limit when the curve converges, else the last sampled value.
    pub value: Vec<Complex64>,
    pub curve: ErgodicCurve,
}

/// `lim (1/2T) int_{-T}^{T} f(t) e^{-i lambda t} dt` via the limit engine.
pub fn bohr_transform(f: &FunctionHandle, lambda: f64, schedule: &Schedule) -> Result<TransformEstimate> {
    let one = Weight::one();
    let curve = ergodic_curve(&f.modulate(lambda), &one, &one, schedule, Mode::Raw, None)?;
    if curve.verdict.kind == LimitKind::Diverges {
        return Err(Error::Divergent {
            quantity: format!("Bohr transform at lambda={lambda}"),
        });
    }
    let value = curve.limit_or_last();
    Ok(TransformEstimate { lambda, value, curve })
}

/// Numerical Bohr mean, the transform at zero.
pub fn bohr_mean(f: &FunctionHandle, schedule: &Schedule) -> Result<TransformEstimate> {
    bohr_transform(f, 0.0, schedule)
}

/// Grid points whose estimated transform magnitude exceeds `threshold`.
pub fn bohr_spectrum_scan(
    f: &FunctionHandle,
    grid: &[f64],
    threshold: f64,
    schedule: &Schedule,
) -> Result<SpectrumSet> {
    let estimates: Vec<TransformEstimate> = grid
        .par_iter()
        .map(|&l| bohr_transform(f, l, schedule))
        .collect::<Result<_>>()?;
    let lines = estimates
        .into_iter()
        .map(|e| SpectralLine::new(e.lambda, e.value))
        .filter(|l| l.magnitude > threshold)
        .collect();
    Ok(SpectrumSet { threshold, lines })
}

/// `max_t |f(t) - p(t)|` over `grid`.
pub fn sup_error(f: &FunctionHandle, p: &TrigPoly, grid: &[f64]) -> Result<f64> {
    if f.dim() != p.dim() {
        return Err(Error::DimensionMismatch {
            left: f.dim(),
            right: p.dim(),
        });
    }
    Ok(grid
        .iter()
        .map(|&t| {
            let d: Vec<Complex64> = f.eval(t).iter().zip(p.eval(t)).map(|(a, b)| a - b).collect();
            vec_norm(&d)
        })
        .fold(0.0, f64::max))
}

/// Uniform grid of `n` points on `[a, b]`.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
    }
}

/// `e^{i lambda t}` as a scalar polynomial.
pub fn exponential(lambda: f64) -> TrigPoly {
    TrigPoly::scalar(&[(Complex64::new(1.0, 0.0), lambda)])
}

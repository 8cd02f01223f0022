use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Declared integrable bound `|g(s)| <= envelope(s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Envelope {
    /// `A e^{-rate |s|}`
    Exponential { amplitude: f64, rate: f64 },
    /// `A e^{-s^2 / (2 sigma^2)}`
    Gaussian { amplitude: f64, sigma: f64 },
    /// `A (1 + |s|)^{-p}` with `p > 1`
    Power { amplitude: f64, p: f64 },
    /// `A` on `[-radius, radius]`, zero outside
    Compact { amplitude: f64, radius: f64 },
}

impl Envelope {
    pub fn at(&self, s: f64) -> f64 {
        let s = s.abs();
        match *self {
            Envelope::Exponential { amplitude, rate } => amplitude * (-rate * s).exp(),
            Envelope::Gaussian { amplitude, sigma } => amplitude * (-s * s / (2.0 * sigma * sigma)).exp(),
            Envelope::Power { amplitude, p } => amplitude * (1.0 + s).powf(-p),
            Envelope::Compact { amplitude, radius } => {
                if s <= radius {
                    amplitude
                } else {
                    0.0
                }
            }
        }
    }

    /// `int_{|s| > r} envelope(s) ds` in closed form.
    pub fn tail(&self, r: f64) -> f64 {
        let r = r.max(0.0);
        match *self {
            Envelope::Exponential { amplitude, rate } => 2.0 * amplitude * (-rate * r).exp() / rate,
            Envelope::Gaussian { amplitude, sigma } => {
                amplitude * sigma * (2.0 * PI).sqrt() * libm::erfc(r / (sigma * 2f64.sqrt()))
            }
            Envelope::Power { amplitude, p } => 2.0 * amplitude * (1.0 + r).powf(1.0 - p) / (p - 1.0),
            Envelope::Compact { amplitude, radius } => 2.0 * amplitude * (radius - r).max(0.0),
        }
    }

    /// Smallest doubling-then-bisection radius with `tail(r) <= tol`.
    pub fn truncation_radius(&self, tol: f64, max_radius: f64) -> Result<f64> {
        if let Envelope::Compact { radius, .. } = *self {
            return Ok(radius);
        }
        if self.tail(0.0) <= tol {
            return Ok(0.0);
        }
        let mut hi = 1.0;
        while self.tail(hi) > tol {
            hi *= 2.0;
            if hi > max_radius {
                return Err(Error::TruncationUnreachable {
                    radius: max_radius,
                    tail: self.tail(max_radius),
                });
            }
        }
        let mut lo = hi / 2.0;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.tail(mid) > tol {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(hi)
    }
}

type KernelFn = dyn Fn(f64) -> f64 + Send + Sync;
type FourierFn = dyn Fn(f64) -> Complex64 + Send + Sync;

/// Integrable convolution kernel with a declared envelope.
#[derive(Clone)]
pub struct Kernel {
    name: String,
    eval: Arc<KernelFn>,
    envelope: Envelope,
    l1_norm: f64,
    fourier: Option<Arc<FourierFn>>,
    breaks: Vec<f64>,
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Kernel")
            .field("name", &self.name)
            .field("envelope", &self.envelope)
            .field("l1_norm", &self.l1_norm)
            .finish()
    }
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}

impl Kernel {
    /// Kernel from an evaluator; the envelope must bound it.
    pub fn custom(
        name: impl Into<String>,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
        envelope: Envelope,
        l1_norm: f64,
    ) -> Self {
        Kernel {
            name: name.into(),
            eval: Arc::new(eval),
            envelope,
            l1_norm,
            fourier: None,
            breaks: vec![0.0],
        }
    }

    /// Gaussian of standard deviation `sigma` and total mass `mass`.
    pub fn gauss(sigma: f64, mass: f64) -> Result<Self> {
        let sigma = positive("sigma", sigma)?;
        let amp = mass / (sigma * (2.0 * PI).sqrt());
        Ok(Kernel {
            name: format!("gauss({sigma})"),
            eval: Arc::new(move |s| amp * (-s * s / (2.0 * sigma * sigma)).exp()),
            envelope: Envelope::Gaussian {
                amplitude: amp.abs(),
                sigma,
            },
            l1_norm: mass.abs(),
            fourier: Some(Arc::new(move |l| Complex64::new(mass * (-sigma * sigma * l * l / 2.0).exp(), 0.0))),
            breaks: Vec::new(),
        })
    }

    /// `mass * (a/2) e^{-a|s|}`.
    pub fn laplace(a: f64, mass: f64) -> Result<Self> {
        let a = positive("a", a)?;
        let amp = mass * a / 2.0;
        Ok(Kernel {
            name: format!("laplace({a})"),
            eval: Arc::new(move |s| amp * (-a * s.abs()).exp()),
            envelope: Envelope::Exponential {
                amplitude: amp.abs(),
                rate: a,
            },
            l1_norm: mass.abs(),
            fourier: Some(Arc::new(move |l| Complex64::new(mass * a * a / (a * a + l * l), 0.0))),
            breaks: vec![0.0],
        })
    }

    /// `mass / (2R)` on `[-R, R]`.
    pub fn boxcar(r: f64, mass: f64) -> Result<Self> {
        let r = positive("R", r)?;
        let amp = mass / (2.0 * r);
        Ok(Kernel {
            name: format!("box({r})"),
            eval: Arc::new(move |s| if s.abs() <= r { amp } else { 0.0 }),
            envelope: Envelope::Compact {
                amplitude: amp.abs(),
                radius: r,
            },
            l1_norm: mass.abs(),
            fourier: Some(Arc::new(move |l| {
                let x = l * r;
                Complex64::new(if x == 0.0 { mass } else { mass * x.sin() / x }, 0.0)
            })),
            breaks: vec![-r, r],
        })
    }

    /// Catalog names `gauss(sigma)`, `laplace(a)` and `box(R)`.
    pub fn parse(spec: &str, mass: f64) -> Result<Self> {
        let spec = spec.trim();
        let bad = || Error::InvalidParameter(format!("unknown kernel {spec:?}; expected gauss(s), laplace(a) or box(R)"));
        let open = spec.find('(').ok_or_else(bad)?;
        if !spec.ends_with(')') {
            return Err(bad());
        }
        let arg: f64 = spec[open + 1..spec.len() - 1].trim().parse().map_err(|_| bad())?;
        match spec[..open].trim() {
            "gauss" => Kernel::gauss(arg, mass),
            "laplace" => Kernel::laplace(arg, mass),
            "box" => Kernel::boxcar(arg, mass),
            _ => Err(bad()),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, s: f64) -> f64 {
        (self.eval)(s)
    }

    pub fn envelope(&self) -> Envelope {
        self.envelope
    }

    pub fn l1_norm(&self) -> f64 {
        self.l1_norm
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    /// `int g(s) e^{-i lambda s} ds`, when known in closed form.
    pub fn fourier(&self, lambda: f64) -> Option<Complex64> {
        self.fourier.as_ref().map(|f| f(lambda))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate_split, QuadOptions};

    #[test]
    fn catalog_masses_and_envelopes() {
        for k in [
            Kernel::gauss(1.0, 1.0).unwrap(),
            Kernel::laplace(2.0, 1.0).unwrap(),
            Kernel::boxcar(1.5, 1.0).unwrap(),
            Kernel::parse("gauss(0.5)", 3.0).unwrap(),
        ] {
            let r = k.envelope().truncation_radius(1e-14, 1e6).unwrap();
            let mut breaks = k.breaks().to_vec();
            breaks.push(0.0);
            let m = integrate_split(|s| k.eval(s), -r, r, &breaks, &QuadOptions::with_tol(1e-13)).unwrap();
            assert!((m.value - k.l1_norm()).abs() < 1e-10, "{}: {}", k.name(), m.value);
            for s in [-7.0, -1.0, 0.0, 0.3, 2.0, 9.0] {
                assert!(k.eval(s).abs() <= k.envelope().at(s) * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn tails_are_exact() {
        let e = Envelope::Exponential { amplitude: 0.5, rate: 1.0 };
        assert!((e.tail(2.0) - (-2f64).exp()).abs() < 1e-15);
        let g = Envelope::Gaussian { amplitude: 1.0 / (2.0 * PI).sqrt(), sigma: 1.0 };
        assert!((g.tail(0.0) - 1.0).abs() < 1e-14);
        let p = Envelope::Power { amplitude: 1.0, p: 2.0 };
        assert!((p.tail(1.0) - 1.0).abs() < 1e-15);
        let r = e.truncation_radius(1e-10, 1e6).unwrap();
        assert!(e.tail(r) <= 1e-10 && e.tail(r * 0.999) > 1e-10);
        let slow = Envelope::Power { amplitude: 1.0, p: 1.01 };
        assert!(matches!(slow.truncation_radius(1e-12, 1e6), Err(Error::TruncationUnreachable { .. })));
    }

    #[test]
    fn parse_errors() {
        assert!(Kernel::parse("cauchy(1)", 1.0).is_err());
        assert!(Kernel::parse("gauss(-1)", 1.0).is_err());
        assert!(Kernel::parse("gauss", 1.0).is_err());
    }
}

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::ratios::{uniqueness_precondition, RatioBound};
use crate::apfun::{FunctionHandle, TrigPoly};
use crate::ergodic::{membership_pap0, ErgodicCurve, Schedule};
use crate::error::{Error, Result};
use crate::weights::Weight;

type TwoVarFn = dyn Fn(f64, &[f64]) -> Vec<f64> + Send + Sync;

/// `F: R x R^d -> R^m`, Lipschitz in `u` uniformly in `t`, optionally
/// split as `F = G + Phi` with `G` almost periodic and `Phi` ergodic.
#[derive(Clone)]
pub struct TwoVarFunction {
    name: String,
    dim_in: usize,
    dim_out: usize,
    lipschitz: f64,
    t_frequency: f64,
    f: Arc<TwoVarFn>,
    g: Option<Arc<TwoVarFn>>,
    phi: Option<Arc<TwoVarFn>>,
}

impl fmt::Debug for TwoVarFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TwoVarFunction")
            .field("name", &self.name)
            .field("dim_in", &self.dim_in)
            .field("dim_out", &self.dim_out)
            .field("lipschitz", &self.lipschitz)
            .finish()
    }
}

/// Names accepted by [`TwoVarFunction::catalog`].
pub const CATALOG: [&str; 2] = ["sin_u_cos_t", "affine_exp"];

impl TwoVarFunction {
    pub fn new(
        name: impl Into<String>,
        dim_in: usize,
        dim_out: usize,
        lipschitz: f64,
        f: impl Fn(f64, &[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        TwoVarFunction {
            name: name.into(),
            dim_in,
            dim_out,
            lipschitz,
            t_frequency: 0.0,
            f: Arc::new(f),
            g: None,
            phi: None,
        }
    }

    pub fn with_split(
        mut self,
        g: impl Fn(f64, &[f64]) -> Vec<f64> + Send + Sync + 'static,
        phi: impl Fn(f64, &[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        self.g = Some(Arc::new(g));
        self.phi = Some(Arc::new(phi));
        self
    }

    /// Largest frequency of the `t` dependence, for quadrature steps.
    pub fn with_t_frequency(mut self, omega: f64) -> Self {
        self.t_frequency = omega.abs();
        self
    }

    /// `sin(u) cos(t)` (`G = F`, `Phi = 0`, `L = 1`) or
    /// `u (2 + cos t) + e^{-|t|} u` (`L = 4`).
    pub fn catalog(name: &str) -> Result<Self> {
        match name {
            "sin_u_cos_t" => Ok(TwoVarFunction::new(name, 1, 1, 1.0, |t, u| vec![u[0].sin() * t.cos()])
                .with_split(|t, u| vec![u[0].sin() * t.cos()], |_, _| vec![0.0])
                .with_t_frequency(1.0)),
            "affine_exp" => Ok(TwoVarFunction::new(name, 1, 1, 4.0, |t, u| {
                vec![u[0] * (2.0 + t.cos()) + (-t.abs()).exp() * u[0]]
            })
            .with_split(|t, u| vec![u[0] * (2.0 + t.cos())], |t, u| vec![(-t.abs()).exp() * u[0]])
            .with_t_frequency(1.0)),
            _ => Err(Error::FunctionSpec(format!(
                "unknown two-variable function {name:?}; expected one of {}",
                CATALOG.join(", ")
            ))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn eval(&self, t: f64, u: &[f64]) -> Vec<f64> {
        (self.f)(t, u)
    }
}

/// Sampling box and tolerance for the Lipschitz probe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LipschitzProbe {
    pub pairs: usize,
    pub t_half_width: f64,
    pub u_half_width: f64,
    pub tol: f64,
}

impl Default for LipschitzProbe {
    fn default() -> Self {
        LipschitzProbe {
            pairs: 2000,
            t_half_width: 50.0,
            u_half_width: 2.0,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LipschitzReport {
    pub pairs: usize,
    pub max_quotient: f64,
    pub bound: f64,
}

fn l2(v: impl Iterator<Item = f64>) -> f64 {
    v.map(|x| x * x).sum::<f64>().sqrt()
}

/// Random probe of `|F(t,u) - F(t,v)| <= L |u - v|`; the first violation
/// is returned with its witness.
pub fn check_lipschitz(f: &TwoVarFunction, probe: &LipschitzProbe, seed: u64) -> Result<LipschitzReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (tw, uw) = (probe.t_half_width, probe.u_half_width);
    let mut max_quotient: f64 = 0.0;
    for _ in 0..probe.pairs {
        let t = rng.gen_range(-tw..=tw);
        let u: Vec<f64> = (0..f.dim_in).map(|_| rng.gen_range(-uw..=uw)).collect();
        let v: Vec<f64> = (0..f.dim_in).map(|_| rng.gen_range(-uw..=uw)).collect();
        let du = l2(u.iter().zip(&v).map(|(a, b)| a - b));
        if du == 0.0 {
            continue;
        }
        let (fu, fv) = (f.eval(t, &u), f.eval(t, &v));
        let q = l2(fu.iter().zip(&fv).map(|(a, b)| a - b)) / du;
        if q > f.lipschitz * (1.0 + probe.tol) {
            return Err(Error::LipschitzViolation {
                t,
                u,
                v,
                quotient: q,
                bound: f.lipschitz,
            });
        }
        max_quotient = max_quotient.max(q);
    }
    Ok(LipschitzReport {
        pairs: probe.pairs,
        max_quotient,
        bound: f.lipschitz,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompositionResult {
    pub function: String,
    pub lipschitz: LipschitzReport,
    pub h2_member: bool,
    pub member: bool,
    /// `L R(h2) + R(Phi(., h1(.)))` at the last schedule point.
    pub bound: f64,
    /// Final remainder value over `bound`; zero when both vanish.
    pub slack: f64,
    pub bound_holds: bool,
    /// Reported alongside, not required by the composition statement.
    pub uniqueness: RatioBound,
    pub remainder: ErgodicCurve,
    pub h2_curve: ErgodicCurve,
    pub phi_curve: ErgodicCurve,
}

fn real_parts(v: &[Complex64]) -> Vec<f64> {
    v.iter().map(|z| z.re).collect()
}

fn to_complex(v: Vec<f64>, out: &mut [Complex64]) {
    for (o, x) in out.iter_mut().zip(v) {
        *o = Complex64::new(x, 0.0);
    }
}

/// Checks that `t -> F(t, h(t)) - G(t, h1(t))` with `h = h1 + h2` lies in
/// the ergodic space and respects `L R(h2) + R(Phi(., h1))`. The real
/// parts of `h1` and `h2` feed `F`.
pub fn composition_check(
    f: &TwoVarFunction,
    h1: &TrigPoly,
    h2: &FunctionHandle,
    mu: &Weight,
    nu: &Weight,
    schedule: &Schedule,
    seed: u64,
) -> Result<CompositionResult> {
    let schedule = schedule.validated()?;
    for d in [h1.dim(), h2.dim()] {
        if d != f.dim_in {
            return Err(Error::DimensionMismatch { left: f.dim_in, right: d });
        }
    }
    let (Some(g), Some(phi)) = (f.g.clone(), f.phi.clone()) else {
        return Err(Error::InvalidParameter(format!("{} has no G/Phi split", f.name)));
    };
    let lipschitz = check_lipschitz(f, &LipschitzProbe::default(), seed)?;

    let omega = h1.max_frequency() + f.t_frequency;
    let (p1, p2, ff) = (h1.clone(), h2.clone(), f.f.clone());
    let rem = FunctionHandle::new(f.dim_out, move |t, out| {
        let a = real_parts(&p1.eval(t));
        let h: Vec<f64> = a.iter().zip(p2.eval(t)).map(|(x, y)| x + y.re).collect();
        let d: Vec<f64> = ff(t, &h).into_iter().zip(g(t, &a)).map(|(x, y)| x - y).collect();
        to_complex(d, out);
    })
    .with_max_frequency(omega)
    .with_breaks(h2.breaks().to_vec());
    let p1 = h1.clone();
    let phi_h1 = FunctionHandle::new(f.dim_out, move |t, out| to_complex(phi(t, &real_parts(&p1.eval(t))), out))
        .with_max_frequency(omega);

    let mut remainder = membership_pap0(&rem, mu, nu, &schedule, None)?;
    remainder.label = "R_remainder".into();
    let mut h2_curve = membership_pap0(h2, mu, nu, &schedule, None)?;
    h2_curve.label = "R_h2".into();
    let mut phi_curve = membership_pap0(&phi_h1, mu, nu, &schedule, None)?;
    phi_curve.label = "R_phi".into();

    let bound = f.lipschitz * h2_curve.final_norm() + phi_curve.final_norm();
    let r = remainder.final_norm();
    let slack = if bound > 0.0 {
        r / bound
    } else if r == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(CompositionResult {
        function: f.name.clone(),
        lipschitz,
        h2_member: h2_curve.is_member(),
        member: remainder.is_member(),
        bound,
        slack,
        bound_holds: r <= bound + schedule.spread_tol,
        uniqueness: uniqueness_precondition(mu, nu, &schedule, None)?,
        remainder,
        h2_curve,
        phi_curve,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inv_quad() -> FunctionHandle {
        FunctionHandle::scalar(|t| 1.0 / (1.0 + t * t)).with_sup_bound(1.0)
    }

    #[test]
    fn catalog_examples() {
        let s = Schedule::default();
        let one = Weight::one();
        let cos = TrigPoly::real(0.0, &[(1.0, 1.0)], &[]);
        let sin = TrigPoly::real(0.0, &[], &[(1.0, 1.0)]);
        let f = TwoVarFunction::catalog("sin_u_cos_t").unwrap();
        let r = composition_check(&f, &cos, &inv_quad(), &one, &one, &s, 7).unwrap();
        assert!(r.member && r.h2_member && r.bound_holds && r.slack <= 1.0);
        assert!(r.lipschitz.max_quotient <= 1.0);

        let r = composition_check(&f, &cos, &FunctionHandle::zero(1), &one, &one, &s, 7).unwrap();
        assert!(r.remainder.points.iter().all(|p| p.r[0].re == 0.0));
        assert_eq!(r.slack, 0.0);

        let f = TwoVarFunction::catalog("affine_exp").unwrap();
        let r = composition_check(&f, &sin, &inv_quad(), &one, &one, &s, 7).unwrap();
        assert!(r.member && r.bound_holds && r.slack <= 1.1);
        assert!(TwoVarFunction::catalog("nope").is_err());
    }

    #[test]
    fn lipschitz_violation_has_witness() {
        let f = TwoVarFunction::new("square", 1, 1, 1.0, |_, u| vec![u[0] * u[0]]).with_split(|_, u| vec![u[0] * u[0]], |_, _| vec![0.0]);
        let cos = TrigPoly::real(0.0, &[(1.0, 1.0)], &[]);
        let one = Weight::one();
        match composition_check(&f, &cos, &inv_quad(), &one, &one, &Schedule::default(), 1) {
            Err(Error::LipschitzViolation { u, v, quotient, .. }) => {
                assert!(((u[0] + v[0]).abs() - quotient).abs() < 1e-9);
            }
            other => panic!("expected a violation, got {other:?}"),
        }
    }

    #[test]
    fn probe_is_seeded() {
        let f = TwoVarFunction::catalog("affine_exp").unwrap();
        let p = LipschitzProbe::default();
        assert_eq!(check_lipschitz(&f, &p, 3).unwrap(), check_lipschitz(&f, &p, 3).unwrap());
    }

    #[test]
    fn missing_split_is_rejected() {
        let f = TwoVarFunction::new("bare", 1, 1, 1.0, |_, u| vec![u[0]]);
        let cos = TrigPoly::real(0.0, &[(1.0, 1.0)], &[]);
        let one = Weight::one();
        assert!(composition_check(&f, &cos, &inv_quad(), &one, &one, &Schedule::default(), 0).is_err());
    }
}

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Serialize;

use super::verdict::{decide, norm, LimitVerdict, VerdictRule};
use super::Schedule;
use crate::apfun::FunctionHandle;
use crate::error::{Error, Result};
use crate::quad::{integrate_split, oscillation_step, QuadOptions};
use crate::weights::Weight;

/// `norm` integrates `|f|`, `raw` integrates `f` coordinate-wise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Norm,
    Raw,
}

/// Exponent of the denominator `[mu(Q_T)]^kappa`, strictly inside (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KappaParam(f64);

impl KappaParam {
    pub fn new(kappa: f64) -> Result<Self> {
        if kappa > 0.0 && kappa < 1.0 {
            Ok(KappaParam(kappa))
        } else {
            Err(Error::InvalidParameter(format!("kappa must lie in (0, 1), got {kappa}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub t: f64,
    pub r: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErgodicCurve {
    pub label: String,
    pub mode: Mode,
    pub kappa: Option<f64>,
    pub points: Vec<CurvePoint>,
    pub verdict: LimitVerdict,
}

impl ErgodicCurve {
    pub(crate) fn from_points(label: String, mode: Mode, kappa: Option<f64>, points: Vec<CurvePoint>, rule: &VerdictRule) -> Self {
        let ts: Vec<f64> = points.iter().map(|p| p.t).collect();
        let vs: Vec<Vec<Complex64>> = points.iter().map(|p| p.r.clone()).collect();
        let verdict = decide(&ts, &vs, rule);
        ErgodicCurve {
            label,
            mode,
            kappa,
            points,
            verdict,
        }
    }

    pub fn times(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.t).collect()
    }

    pub fn final_value(&self) -> &[Complex64] {
        &self.points[self.points.len() - 1].r
    }

    pub fn final_norm(&self) -> f64 {
        norm(self.final_value())
    }

    /// The verdict's limit when convergent, otherwise the last sample.
    pub fn limit_or_last(&self) -> Vec<Complex64> {
        match &self.verdict.limit {
            Some(l) if self.verdict.is_convergent() => l.clone(),
            _ => self.final_value().to_vec(),
        }
    }

    /// Membership in the ergodic space: the curve converges to zero.
    pub fn is_member(&self) -> bool {
        self.verdict.kind == super::LimitKind::ConvergesToZero
    }

    /// `T,R_re,R_im` rows (the imaginary part is 0 in norm mode); vector
    /// curves get one column pair per coordinate.
    pub fn to_csv(&self) -> String {
        let dim = self.points.first().map_or(1, |p| p.r.len());
        let mut out = String::from("T");
        for k in 0..dim {
            let suffix = if dim == 1 { String::new() } else { format!("_{k}") };
            out.push_str(&format!(",R_re{suffix},R_im{suffix}"));
        }
        out.push('\n');
        for p in &self.points {
            write!(out, "{}", p.t).unwrap();
            for z in &p.r {
                write!(out, ",{},{}", z.re, z.im).unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// `value * e^{ln_scale}` kept unnormalized so exponential weights do not
/// overflow.
#[derive(Debug, Clone)]
struct ScaledSum {
    value: Vec<Complex64>,
    ln_scale: f64,
}

impl ScaledSum {
    fn new(dim: usize) -> Self {
        ScaledSum {
            value: vec![Complex64::new(0.0, 0.0); dim],
            ln_scale: f64::NEG_INFINITY,
        }
    }

    fn add(&mut self, v: &[Complex64], ln_s: f64) {
        if ln_s == f64::NEG_INFINITY {
            return;
        }
        if ln_s > self.ln_scale {
            let f = (self.ln_scale - ln_s).exp();
            for (a, b) in self.value.iter_mut().zip(v) {
                *a = *a * f + b;
            }
            self.ln_scale = ln_s;
        } else {
            let f = (ln_s - self.ln_scale).exp();
            for (a, b) in self.value.iter_mut().zip(v) {
                *a += b * f;
            }
        }
    }

    fn scaled(&self, ln_div: f64) -> Vec<Complex64> {
        if self.ln_scale == f64::NEG_INFINITY {
            return self.value.clone();
        }
        let f = (self.ln_scale - ln_div).exp();
        self.value.iter().map(|z| z * f).collect()
    }
}

struct Integrator<'a> {
    f: &'a FunctionHandle,
    nu: &'a Weight,
    mode: Mode,
    opts: QuadOptions,
}

impl Integrator<'_> {
    fn out_dim(&self) -> usize {
        match self.mode {
            Mode::Norm => 1,
            Mode::Raw => self.f.dim(),
        }
    }

    /// `int_a^b g(t) nu(t) dt` as `(value, ln_scale)`.
    fn shell(&self, a: f64, b: f64) -> Result<(Vec<Complex64>, f64)> {
        let shift = (0..=32)
            .map(|k| self.nu.ln_eval(a + (b - a) * k as f64 / 32.0))
            .fold(f64::NEG_INFINITY, f64::max);
        if shift.is_nan() {
            return Err(Error::InvalidParameter(format!("weight {} is not positive on [{a}, {b}]", self.nu)));
        }
        let breaks: Vec<f64> = std::iter::once(0.0)
            .chain(self.f.breaks().iter().copied())
            .filter(|x| *x > a && *x < b)
            .collect();
        let dim = self.f.dim();
        let mut buf = vec![Complex64::new(0.0, 0.0); dim];
        let nu = |t: f64| (self.nu.ln_eval(t) - shift).exp();
        let value = match self.mode {
            Mode::Norm => {
                let est = integrate_split(
                    |t| {
                        self.f.eval_into(t, &mut buf);
                        norm(&buf) * nu(t)
                    },
                    a,
                    b,
                    &breaks,
                    &self.opts,
                )?;
                vec![Complex64::new(est.value, 0.0)]
            }
            Mode::Raw => {
                let mut out = Vec::with_capacity(dim);
                for k in 0..dim {
                    let est = integrate_split(
                        |t| {
                            self.f.eval_into(t, &mut buf);
                            buf[k] * nu(t)
                        },
                        a,
                        b,
                        &breaks,
                        &self.opts,
                    )?;
                    out.push(est.value);
                }
                out
            }
        };
        Ok((value, shift))
    }
}

fn quad_options(f: &FunctionHandle, tol: f64) -> QuadOptions {
    let opts = QuadOptions::with_tol(tol);
    match f.max_frequency() {
        Some(omega) => opts.max_panel(oscillation_step(omega)),
        None => opts,
    }
}

/// `int_{Q_T} g(t) nu(t) dt` computed directly, without shells; returns
/// the value divided by `e^{ln_div}`.
pub fn weighted_integral(f: &FunctionHandle, nu: &Weight, t: f64, mode: Mode, tol: f64, ln_div: f64) -> Result<Vec<Complex64>> {
    let it = Integrator {
        f,
        nu,
        mode,
        opts: quad_options(f, tol),
    };
    let mut acc = ScaledSum::new(it.out_dim());
    for (a, b) in [(-t, 0.0), (0.0, t)] {
        let (v, s) = it.shell(a, b)?;
        acc.add(&v, s);
    }
    Ok(acc.scaled(ln_div))
}

/// `R(T_j) = (1/D_j) int_{Q_{T_j}} g(t) nu(t) dt` with `D_j = mu(Q_{T_j})`
/// or its `kappa` power, integrating each new shell once.
pub fn ergodic_curve(
    f: &FunctionHandle,
    mu: &Weight,
    nu: &Weight,
    schedule: &Schedule,
    mode: Mode,
    kappa: Option<KappaParam>,
) -> Result<ErgodicCurve> {
    let schedule = schedule.validated()?;
    let ts = schedule.times();
    let k = kappa.map_or(1.0, KappaParam::value);
    let ln_d: Vec<f64> = mu
        .ln_mass_at(&ts, schedule.quad_tol)?
        .into_iter()
        .map(|l| k * l)
        .collect();
    let it = Integrator {
        f,
        nu,
        mode,
        opts: quad_options(f, schedule.quad_tol),
    };
    let mut acc = ScaledSum::new(it.out_dim());
    let mut reached = 0.0;
    let mut points = Vec::with_capacity(ts.len());
    for (&t, &ld) in ts.iter().zip(&ln_d) {
        let shells = if reached == 0.0 {
            [(-t, 0.0), (0.0, t)]
        } else {
            [(-t, -reached), (reached, t)]
        };
        for (a, b) in shells {
            let (v, s) = it.shell(a, b)?;
            acc.add(&v, s);
        }
        reached = t;
        let r = acc.scaled(ld);
        if r.iter().any(|z| !z.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite ergodic average at T={t}")));
        }
        points.push(CurvePoint { t, r });
    }
    let label = match kappa {
        Some(k) => format!("R_kappa={}", k.value()),
        None => "R".to_string(),
    };
    Ok(ErgodicCurve::from_points(label, mode, kappa.map(KappaParam::value), points, &schedule.rule()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ergodic::LimitKind;

    fn inv_quad() -> FunctionHandle {
        FunctionHandle::scalar(|t| 1.0 / (1.0 + t * t))
    }

    #[test]
    fn arctan_closed_form() {
        let one = Weight::one();
        let c = ergodic_curve(&inv_quad(), &one, &one, &Schedule::default(), Mode::Norm, None).unwrap();
        for p in &c.points {
            assert!((p.r[0].re - p.t.atan() / p.t).abs() < 1e-9, "T={}", p.t);
        }
        assert_eq!(c.verdict.kind, LimitKind::ConvergesToZero);
        assert!((c.verdict.decay_exponent - 1.0).abs() < 0.05);
    }

    #[test]
    fn kappa_half_closed_form() {
        let one = Weight::one();
        let k = KappaParam::new(0.5).unwrap();
        let c = ergodic_curve(&inv_quad(), &one, &one, &Schedule::default(), Mode::Norm, Some(k)).unwrap();
        for p in &c.points {
            let want = 2.0 * p.t.atan() / (2.0 * p.t).sqrt();
            assert!((p.r[0].re - want).abs() < 1e-9);
        }
        assert!(KappaParam::new(1.0).is_err());
        assert!(KappaParam::new(0.0).is_err());
    }

    #[test]
    fn constant_function() {
        let one = Weight::one();
        let f = FunctionHandle::scalar(|_| 1.0);
        let c = ergodic_curve(&f, &one, &one, &Schedule::default(), Mode::Raw, None).unwrap();
        assert_eq!(c.verdict.kind, LimitKind::ConvergesTo);
        assert!((c.verdict.scalar().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn shells_add_up() {
        let nu = Weight::parse("1+abs(x)").unwrap();
        let mu = Weight::parse("exp(abs(x))").unwrap();
        let f = crate::apfun::TrigPoly::real(1.0, &[(1.0, 1.0)], &[(1.0, 2f64.sqrt())]).to_handle();
        let s = Schedule::default().with_count(10);
        let c = ergodic_curve(&f, &mu, &nu, &s, Mode::Raw, None).unwrap();
        for p in &c.points {
            let ln_d = mu.ln_mu_qt(p.t).unwrap();
            let direct = weighted_integral(&f, &nu, p.t, Mode::Raw, 1e-12, 0.0).unwrap();
            let shells = p.r[0] * ln_d.exp();
            assert!((direct[0] - shells).norm() < 1e-9 * (1.0 + direct[0].norm()), "T={}", p.t);
        }
    }

    #[test]
    fn exponential_denominator_does_not_overflow() {
        let mu = Weight::parse("exp(abs(x))").unwrap();
        let nu = Weight::parse("1+abs(x)").unwrap();
        let f = FunctionHandle::scalar(|_| 1.0);
        let c = ergodic_curve(&f, &mu, &nu, &Schedule::default(), Mode::Raw, None).unwrap();
        assert_eq!(c.verdict.kind, LimitKind::ConvergesToZero);
        assert!(c.final_norm() < 1e-300 || c.final_norm() == 0.0);
    }

    #[test]
    fn csv_layout() {
        let one = Weight::one();
        let s = Schedule::default().with_count(5);
        let c = ergodic_curve(&inv_quad(), &one, &one, &s, Mode::Norm, None).unwrap();
        let csv = c.to_csv();
        assert!(csv.starts_with("T,R_re,R_im\n1,"));
        let c = ergodic_curve(&inv_quad(), &one, &one, &s, Mode::Raw, None).unwrap();
        assert!(c.to_csv().starts_with("T,R_re,R_im\n"));
        assert_eq!(c.to_csv().lines().count(), 6);
    }
}

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::kernel::Kernel;
use super::ratios::{check_hhh, check_jj, RatioBound, ShiftRatios};
use crate::apfun::{bohr_spectrum_scan, FunctionHandle, SpectrumSet};
use crate::ergodic::{decide, membership_pap0, ErgodicCurve, Schedule};
use crate::error::{Error, Result};
use crate::quad::{integrate_split, oscillation_step, QuadOptions};
use crate::weights::{check_winv, ProbeConfig, Verdict, Weight};

/// Truncation radii beyond this are reported as unreachable.
pub const MAX_RADIUS: f64 = 1e6;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Certified radius and quadrature settings for `f * g` at tolerance `tol`.
#[derive(Debug, Clone, Copy)]
struct Plan {
    radius: f64,
    opts: QuadOptions,
}

fn plan(f: &FunctionHandle, g: &Kernel, tol: f64) -> Result<Option<Plan>> {
    // Negated so NaN is rejected too.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let bound = f
        .sup_bound()
        .ok_or_else(|| Error::InvalidParameter("convolution needs a declared sup bound on f".into()))?;
    if bound == 0.0 {
        return Ok(None);
    }
    // Half the budget goes to the truncated tail, half to quadrature.
    let radius = g.envelope().truncation_radius(0.5 * tol / bound, MAX_RADIUS)?;
    let mut opts = QuadOptions {
        abs_tol: 0.5 * tol,
        rel_tol: 1e-14,
        ..QuadOptions::default()
    };
    if let Some(omega) = f.max_frequency() {
        opts = opts.max_panel(oscillation_step(omega));
    }
    Ok(Some(Plan { radius, opts }))
}

fn convolve_planned(f: &FunctionHandle, g: &Kernel, t: f64, plan: &Plan) -> Result<Vec<Complex64>> {
    let r = plan.radius;
    let breaks: Vec<f64> = std::iter::once(0.0)
        .chain(g.breaks().iter().copied())
        .chain(f.breaks().iter().map(|b| t - b))
        .collect();
    let mut buf = vec![ZERO; f.dim()];
    let mut out = Vec::with_capacity(f.dim());
    for k in 0..f.dim() {
        let est = integrate_split(
            |s| {
                f.eval_into(t - s, &mut buf);
                buf[k] * g.eval(s)
            },
            -r,
            r,
            &breaks,
            &plan.opts,
        )?;
        out.push(est.value);
    }
    Ok(out)
}

/// `(f * g)(t) = int f(t - s) g(s) ds`, truncated where the kernel tail
/// times `sup |f|` drops below `tol / 2`.
pub fn convolve(f: &FunctionHandle, g: &Kernel, t: f64, tol: f64) -> Result<Vec<Complex64>> {
    match plan(f, g, tol)? {
        Some(p) => convolve_planned(f, g, t, &p),
        None => Ok(vec![ZERO; f.dim()]),
    }
}

/// `convolve` over a grid, in parallel with results in grid order.
pub fn convolve_grid(f: &FunctionHandle, g: &Kernel, grid: &[f64], tol: f64) -> Result<Vec<Vec<Complex64>>> {
    let p = plan(f, g, tol)?;
    grid.par_iter()
        .map(|&t| match &p {
            Some(p) => convolve_planned(f, g, t, p),
            None => Ok(vec![ZERO; f.dim()]),
        })
        .collect()
}

/// `f * g` as a function handle evaluated by quadrature on demand.
/// Failed evaluations surface as NaN, which the limit engine rejects.
pub fn convolution_handle(f: &FunctionHandle, g: &Kernel, tol: f64) -> Result<FunctionHandle> {
    let dim = f.dim();
    let Some(p) = plan(f, g, tol)? else {
        return Ok(FunctionHandle::zero(dim));
    };
    let (fc, gc) = (f.clone(), g.clone());
    let mut h = FunctionHandle::new(dim, move |t, out| match convolve_planned(&fc, &gc, t, &p) {
        Ok(v) => out.copy_from_slice(&v),
        Err(_) => out.fill(Complex64::new(f64::NAN, 0.0)),
    });
    if let Some(b) = f.sup_bound() {
        h = h.with_sup_bound(b * g.l1_norm());
    }
    if let Some(w) = f.max_frequency() {
        h = h.with_max_frequency(w);
    }
    let breaks = f
        .breaks()
        .iter()
        .flat_map(|fb| g.breaks().iter().map(move |kb| fb + kb))
        .collect();
    Ok(h.with_breaks(breaks))
}

fn probe_config(schedule: &Schedule) -> ProbeConfig {
    ProbeConfig {
        schedule: *schedule,
        ..ProbeConfig::default()
    }
}

/// Translation-invariance hypotheses on the weights.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hypotheses {
    pub nu_winv: Verdict,
    pub jj: ShiftRatios,
    /// Present for convolution only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hhh: Option<RatioBound>,
    pub hold: bool,
}

fn hypotheses(mu: &Weight, nu: &Weight, schedule: &Schedule, with_hhh: bool) -> Result<Hypotheses> {
    let cfg = probe_config(schedule);
    let nu_winv = check_winv(nu, &cfg.taus, &cfg)?.verdict;
    let jj = check_jj(mu, &cfg.taus, schedule)?;
    let hhh = if with_hhh { Some(check_hhh(mu, nu, schedule)?) } else { None };
    let hold = nu_winv == Verdict::Member
        && jj.outcome == super::Outcome::Pass
        && hhh.as_ref().is_none_or(|h| h.outcome == super::Outcome::Pass);
    Ok(Hypotheses { nu_winv, jj, hhh, hold })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvMembership {
    pub kernel: String,
    pub hypotheses: Hypotheses,
    pub member: bool,
    pub curve: ErgodicCurve,
}

/// Minimum fitted decay exponent accepted for convolution curves, which
/// decay like `log T / T` for inputs decaying like `1/|t|`.
pub const CONV_MIN_DECAY: f64 = 0.5;

/// Membership of `f * g` in the ergodic space, with its hypotheses.
pub fn conv_membership(
    f: &FunctionHandle,
    g: &Kernel,
    mu: &Weight,
    nu: &Weight,
    schedule: &Schedule,
) -> Result<ConvMembership> {
    let schedule = schedule.validated()?;
    let h = convolution_handle(f, g, schedule.quad_tol * 1e-3)?;
    let mut curve = membership_pap0(&h, mu, nu, &schedule, None)?;
    let rule = crate::ergodic::VerdictRule {
        min_decay: CONV_MIN_DECAY,
        ..schedule.rule()
    };
    let vals: Vec<Vec<Complex64>> = curve.points.iter().map(|p| p.r.clone()).collect();
    curve.verdict = decide(&curve.times(), &vals, &rule);
    curve.label = format!("R_conv_{}", g.name());
    Ok(ConvMembership {
        kernel: g.name().to_string(),
        hypotheses: hypotheses(mu, nu, &schedule, true)?,
        member: curve.is_member(),
        curve,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TranslationCheck {
    pub shift: f64,
    pub hypotheses: Hypotheses,
    pub original_member: bool,
    pub member: bool,
    pub original: ErgodicCurve,
    pub curve: ErgodicCurve,
}

/// Membership of `t -> phi(t + s)` next to that of `phi`.
pub fn translation_invariance_check(
    phi: &FunctionHandle,
    s: f64,
    mu: &Weight,
    nu: &Weight,
    schedule: &Schedule,
) -> Result<TranslationCheck> {
    let original = membership_pap0(phi, mu, nu, schedule, None)?;
    let mut curve = membership_pap0(&phi.translate(s), mu, nu, schedule, None)?;
    curve.label = format!("R_shift={s}");
    Ok(TranslationCheck {
        shift: s,
        hypotheses: hypotheses(mu, nu, schedule, false)?,
        original_member: original.is_member(),
        member: curve.is_member(),
        original,
        curve,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decomposition {
    pub spectrum: SpectrumSet,
    /// Classical-mean membership of the ergodic part, when supplied.
    pub phi_member: Option<bool>,
    /// `(1/2T) int |phi|` at the last schedule point; bounds the
    /// ergodic part's contribution to every coefficient.
    pub error_bound: Option<f64>,
}

/// Bohr-transform scan of `f` over `grid`. When the ergodic part `phi`
/// is given its classical-mean membership and error bound are reported.
pub fn decomposition_recovery(
    f: &FunctionHandle,
    phi: Option<&FunctionHandle>,
    grid: &[f64],
    threshold: f64,
    schedule: &Schedule,
) -> Result<Decomposition> {
    let (phi_member, error_bound) = match phi {
        Some(phi) => {
            let one = Weight::one();
            let c = membership_pap0(phi, &one, &one, schedule, None)?;
            (Some(c.is_member()), Some(c.final_norm()))
        }
        None => (None, None),
    };
    Ok(Decomposition {
        spectrum: bohr_spectrum_scan(f, grid, threshold, schedule)?,
        phi_member,
        error_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apfun::{linspace, TrigPoly};
    use crate::ergodic::LimitKind;
    use std::f64::consts::PI;

    fn cos_handle() -> FunctionHandle {
        TrigPoly::real(0.0, &[(1.0, 1.0)], &[]).to_handle()
    }

    #[test]
    fn convolve_examples() {
        let lap = Kernel::laplace(1.0, 1.0).unwrap();
        for t in [-3.0, 0.0, 0.7, 12.5] {
            let v = convolve(&cos_handle(), &lap, t, 1e-9).unwrap();
            assert!((v[0].re - t.cos() / 2.0).abs() < 1e-8, "t={t}");
        }
        let one = FunctionHandle::scalar(|_| 1.0).with_sup_bound(1.0);
        for k in [Kernel::gauss(2.0, 1.0).unwrap(), Kernel::boxcar(3.0, 1.0).unwrap()] {
            assert!((convolve(&one, &k, 4.0, 1e-10).unwrap()[0].re - 1.0).abs() < 1e-9);
        }
        let sigma = 1e-3;
        let narrow = Kernel::gauss(sigma, 1.0).unwrap();
        let v = convolve(&cos_handle(), &narrow, 0.0, 1e-10).unwrap()[0].re;
        assert!((v - 1.0).abs() < 1e-5);
        assert!((v - (-sigma * sigma / 2.0).exp()).abs() < 1e-9);
    }

    #[test]
    fn convolve_needs_bound() {
        let f = FunctionHandle::scalar(|t| t.sin());
        assert!(convolve(&f, &Kernel::gauss(1.0, 1.0).unwrap(), 0.0, 1e-8).is_err());
        let slow = Kernel::custom(
            "slow",
            |s| (1.0 + s.abs()).powf(-1.01),
            super::super::kernel::Envelope::Power { amplitude: 1.0, p: 1.01 },
            200.0,
        );
        assert!(matches!(
            convolve(&cos_handle(), &slow, 0.0, 1e-10),
            Err(Error::TruncationUnreachable { .. })
        ));
    }

    #[test]
    fn grid_matches_fourier_multiplier() {
        let p = TrigPoly::real(1.0, &[(2.0, 0.5)], &[(-1.5, 2f64.sqrt())]);
        for k in [Kernel::gauss(0.7, 1.0).unwrap(), Kernel::laplace(2.0, 1.0).unwrap(), Kernel::boxcar(1.0, 2.0).unwrap()] {
            let q = p.multiply_spectrum(|l| k.fourier(l).unwrap());
            let grid = linspace(-10.0, 10.0, 21);
            let got = convolve_grid(&p.to_handle(), &k, &grid, 1e-9).unwrap();
            for (t, v) in grid.iter().zip(got) {
                assert!((v[0] - q.eval(*t)[0]).norm() < 1e-7, "{} at {t}", k.name());
            }
        }
    }

    #[test]
    fn membership_examples() {
        let s = Schedule::default();
        let one = Weight::one();
        let f = FunctionHandle::scalar(|t| 1.0 / (1.0 + t * t)).with_sup_bound(1.0);
        let m = conv_membership(&f, &Kernel::gauss(1.0, 1.0).unwrap(), &one, &one, &s).unwrap();
        assert!(m.member && m.hypotheses.hold);

        let z = conv_membership(&FunctionHandle::zero(1), &Kernel::laplace(1.0, 1.0).unwrap(), &one, &one, &s).unwrap();
        assert!(z.member);

        let slow = FunctionHandle::scalar(|t| 1.0 / (1.0 + t.abs()))
            .with_sup_bound(1.0)
            .with_breaks(vec![0.0]);
        let m = conv_membership(&slow, &Kernel::laplace(1.0, 1.0).unwrap(), &one, &one, &s).unwrap();
        assert!(m.member, "{:?}", m.curve.verdict);
        assert!(m.curve.verdict.decay_exponent > CONV_MIN_DECAY);
    }

    #[test]
    fn translation_examples() {
        let s = Schedule::default();
        let one = Weight::one();
        let phi = FunctionHandle::scalar(|t| 1.0 / (1.0 + t * t));
        let c = translation_invariance_check(&phi, 5.0, &one, &one, &s).unwrap();
        assert!(c.member && c.original_member && c.hypotheses.hold);
        for p in &c.curve.points {
            let want = ((p.t + 5.0).atan() - (5.0 - p.t).atan()) / (2.0 * p.t);
            assert!((p.r[0].re - want).abs() < 1e-9);
        }
        let c0 = translation_invariance_check(&phi, 0.0, &one, &one, &s).unwrap();
        assert_eq!(c0.curve.points, c0.original.points);
        assert_eq!(c0.curve.verdict, c0.original.verdict);

        let mu = Weight::parse("exp(abs(x))").unwrap();
        let nu = Weight::parse("1+abs(x)").unwrap();
        let c = translation_invariance_check(&phi, -3.0, &mu, &nu, &s).unwrap();
        assert!(c.member);
        assert_eq!(c.curve.verdict.kind, LimitKind::ConvergesToZero);
    }

    #[test]
    fn decomposition_examples() {
        let s = Schedule::default();
        let p = TrigPoly::real(2.0, &[(3.0, 1.0)], &[]);
        let phi = FunctionHandle::scalar(|t| 1.0 / (1.0 + t * t));
        let f = p.to_handle().add(&phi).unwrap();
        let d = decomposition_recovery(&f, Some(&phi), &[0.0, 1.0], 0.0, &s).unwrap();
        assert_eq!(d.phi_member, Some(true));
        let bound = d.error_bound.unwrap();
        assert!((bound - s.t_max().atan() / s.t_max()).abs() < 1e-9);
        assert!(bound <= PI / (2.0 * s.t_max()));
        assert!((d.spectrum.coefficient(0.0).unwrap()[0].re - 2.0).abs() < 5e-3);
        assert!((d.spectrum.coefficient(1.0).unwrap()[0].re - 1.5).abs() < 5e-3);

        let exact = decomposition_recovery(&p.to_handle(), None, &[0.0, 1.0], 0.0, &s).unwrap();
        assert!((exact.spectrum.coefficient(0.0).unwrap()[0].re - 2.0).abs() < 1e-3);
        assert_eq!(p.bohr_transform(0.0)[0].re, 2.0);

        let r2 = 2f64.sqrt();
        let q = TrigPoly::real(0.0, &[(1.0, r2)], &[]);
        let e = FunctionHandle::scalar(|t| (-t.abs()).exp()).with_breaks(vec![0.0]);
        let d = decomposition_recovery(&q.to_handle().add(&e).unwrap(), Some(&e), &[r2], 0.0, &s).unwrap();
        assert!((d.spectrum.coefficient(r2).unwrap()[0].re - 0.5).abs() < 5e-3);
    }
}

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::engine::{ergodic_curve, ErgodicCurve, KappaParam, Mode};
use super::verdict::{decide_ln, norm, LimitKind, LimitVerdict};
use super::Schedule;
use crate::apfun::{exponential, FunctionHandle, TrigPoly};
use crate::error::{Error, Result};
use crate::weights::Weight;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThetaResult {
    /// `lim nu(Q_T)/mu(Q_T)` when the curve converges.
    pub value: Option<f64>,
    pub verdict: LimitVerdict,
    /// `(T, ln nu(Q_T) - ln mu(Q_T))`.
    pub ln_ratio: Vec<(f64, f64)>,
}

impl ThetaResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("T,R_re,R_im\n");
        for (t, l) in &self.ln_ratio {
            out.push_str(&format!("{t},{},0\n", l.exp()));
        }
        out
    }
}

/// Ratio curve `nu(Q_T)/mu(Q_T)` and its limit.
pub fn theta(mu: &Weight, nu: &Weight, schedule: &Schedule) -> Result<ThetaResult> {
    let schedule = schedule.validated()?;
    let ts = schedule.times();
    let ln_mu = mu.ln_mass_at(&ts, schedule.quad_tol)?;
    let ln_nu = nu.ln_mass_at(&ts, schedule.quad_tol)?;
    let ln_r: Vec<f64> = ln_nu.iter().zip(&ln_mu).map(|(a, b)| a - b).collect();
    let verdict = decide_ln(&ts, &ln_r, &schedule.rule());
    let value = if verdict.is_convergent() { verdict.scalar() } else { None };
    Ok(ThetaResult {
        value,
        verdict,
        ln_ratio: ts.into_iter().zip(ln_r).collect(),
    })
}

/// Curve of `(1/mu(Q_T)) int_{Q_T} e^{i lambda t} nu(t) dt`; the condition
/// holds when it converges to zero.
pub fn check_cd(mu: &Weight, nu: &Weight, lambda: f64, schedule: &Schedule) -> Result<ErgodicCurve> {
    if lambda == 0.0 || !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!("frequency must be nonzero, got {lambda}")));
    }
    let mut c = ergodic_curve(&exponential(lambda).to_handle(), mu, nu, schedule, Mode::Raw, None)?;
    c.label = format!("CD_lambda={lambda}");
    Ok(c)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanResult {
    /// Estimated doubly-weighted mean.
    pub value: Vec<Complex64>,
    pub theta: Option<f64>,
    /// Exact Bohr mean, for polynomial inputs.
    pub bohr_mean: Option<Vec<Complex64>>,
    /// `|value - theta * bohr_mean|`.
    pub residual: Option<f64>,
    pub verdict: LimitVerdict,
    pub curve: ErgodicCurve,
}

/// Doubly-weighted mean `lim (1/mu(Q_T)) int_{Q_T} f nu`.
pub fn dw_mean(f: &FunctionHandle, mu: &Weight, nu: &Weight, schedule: &Schedule) -> Result<MeanResult> {
    let mut curve = ergodic_curve(f, mu, nu, schedule, Mode::Raw, None)?;
    curve.label = "M(f,mu,nu)".into();
    Ok(MeanResult {
        value: curve.limit_or_last(),
        theta: None,
        bohr_mean: None,
        residual: None,
        verdict: curve.verdict.clone(),
        curve,
    })
}

/// Doubly-weighted mean of a polynomial together with `theta`, the exact
/// Bohr mean and the residual of `M(f, mu, nu) = theta M(f)`.
pub fn dw_mean_trig(p: &TrigPoly, mu: &Weight, nu: &Weight, schedule: &Schedule) -> Result<MeanResult> {
    let mut out = dw_mean(&p.to_handle(), mu, nu, schedule)?;
    let th = theta(mu, nu, schedule)?;
    let m = p.bohr_mean();
    out.residual = th.value.map(|t| {
        let d: Vec<Complex64> = out.value.iter().zip(&m).map(|(v, b)| v - b * t).collect();
        norm(&d)
    });
    out.theta = th.value;
    out.bohr_mean = Some(m);
    Ok(out)
}

/// Membership of `f` in the ergodic space: the norm-mode curve converges to
/// zero.
pub fn membership_pap0(
    f: &FunctionHandle,
    mu: &Weight,
    nu: &Weight,
    schedule: &Schedule,
    kappa: Option<KappaParam>,
) -> Result<ErgodicCurve> {
    ergodic_curve(f, mu, nu, schedule, Mode::Norm, kappa)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CdProbe {
    pub lambda: f64,
    pub kind: LimitKind,
    pub final_magnitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanTheoremCheck {
    pub cd: Vec<CdProbe>,
    pub theta: ThetaResult,
    /// Present when the preconditions hold.
    pub result: Option<MeanResult>,
    pub skipped: Option<String>,
}

/// Check `M(p, mu, nu) = theta M(p)` after verifying its preconditions:
/// the condition on every nonzero frequency of `p` and a convergent theta.
pub fn verify_mean_theorem(p: &TrigPoly, mu: &Weight, nu: &Weight, schedule: &Schedule) -> Result<MeanTheoremCheck> {
    let freqs: Vec<f64> = p.frequencies().into_iter().filter(|l| *l != 0.0).collect();
    let cd: Vec<CdProbe> = freqs
        .par_iter()
        .map(|&lambda| {
            let c = check_cd(mu, nu, lambda, schedule)?;
            Ok(CdProbe {
                lambda,
                kind: c.verdict.kind,
                final_magnitude: c.final_norm(),
            })
        })
        .collect::<Result<_>>()?;
    let th = theta(mu, nu, schedule)?;
    let mut skipped = None;
    if let Some(bad) = cd.iter().find(|c| c.kind != LimitKind::ConvergesToZero) {
        skipped = Some(format!("condition at lambda={} is {:?}", bad.lambda, bad.kind));
    } else if th.value.is_none() {
        skipped = Some(format!("theta is {:?}", th.verdict.kind));
    }
    let result = match skipped {
        None => Some(dw_mean_trig(p, mu, nu, schedule)?),
        Some(_) => None,
    };
    Ok(MeanTheoremCheck {
        cd,
        theta: th,
        result,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Weight {
        Weight::parse(s).unwrap()
    }

    #[test]
    fn theta_examples() {
        let s = Schedule::default();
        let a = w("1+abs(x)");
        assert_eq!(theta(&a, &a, &s).unwrap().value, Some(1.0));
        let t = theta(&w("exp(abs(x))"), &a, &s).unwrap();
        assert_eq!(t.verdict.kind, LimitKind::ConvergesToZero);
        assert!(t.value.unwrap() <= 1e-3);
        let t = theta(&w("1"), &w("1+x^2"), &s).unwrap();
        assert_eq!(t.verdict.kind, LimitKind::Diverges);
        assert!(t.value.is_none());
    }

    #[test]
    fn cd_examples() {
        let s = Schedule::default();
        let one = Weight::one();
        for lambda in [1.0, 10.0] {
            let c = check_cd(&one, &one, lambda, &s).unwrap();
            assert_eq!(c.verdict.kind, LimitKind::ConvergesToZero);
            for p in &c.points {
                let want = ((lambda * p.t).sin() / (lambda * p.t)).abs();
                assert!((p.r[0].norm() - want).abs() < 1e-8);
            }
        }
        let c = check_cd(&w("exp(abs(x))"), &w("1+abs(x)"), 2f64.sqrt(), &s).unwrap();
        assert_eq!(c.verdict.kind, LimitKind::ConvergesToZero);
        assert!(check_cd(&one, &one, 0.0, &s).is_err());
    }

    #[test]
    fn mean_examples() {
        let s = Schedule::default();
        let one = Weight::one();
        let f = TrigPoly::real(1.0, &[(1.0, 1.0)], &[(1.0, 2f64.sqrt())]);
        let m = dw_mean_trig(&f, &w("exp(abs(x))"), &w("1+abs(x)"), &s).unwrap();
        assert!(norm(&m.value) <= 1e-3);
        assert!(m.theta.unwrap() <= 1e-3);
        let p = TrigPoly::real(2.0, &[(3.0, 1.0)], &[]);
        let m = dw_mean_trig(&p, &one, &one, &s).unwrap();
        assert!((m.value[0] - Complex64::new(2.0, 0.0)).norm() < 1e-3);
        assert!(m.residual.unwrap() < 1e-3);
        let seven = TrigPoly::real(7.0, &[], &[]);
        let q = w("1+x^2");
        let m = dw_mean_trig(&seven, &q, &q, &s).unwrap();
        assert!((m.value[0].re - 7.0).abs() < 1e-9);
    }

    #[test]
    fn mean_theorem_checks() {
        let s = Schedule::default();
        let one = Weight::one();
        let p = TrigPoly::real(2.0, &[(3.0, 1.0)], &[]);
        let c = verify_mean_theorem(&p, &one, &one, &s).unwrap();
        assert!(c.skipped.is_none());
        assert!(c.result.unwrap().residual.unwrap() <= 1e-3);
        let no_zero = TrigPoly::real(0.0, &[(1.0, 1.0)], &[(2.0, 3.0)]);
        let c = verify_mean_theorem(&no_zero, &one, &one, &s).unwrap();
        assert!(c.result.unwrap().residual.unwrap() <= 1e-3);
        let p = TrigPoly::real(1.0, &[(1.0, 1.0)], &[]);
        let c = verify_mean_theorem(&p, &w("exp(abs(x))"), &w("1+abs(x)"), &s).unwrap();
        let r = c.result.unwrap();
        assert!(norm(&r.value) <= 1e-3 && r.theta.unwrap() <= 1e-3);
        // Diverging theta skips.
        let c = verify_mean_theorem(&p, &one, &w("1+x^2"), &s).unwrap();
        assert!(c.skipped.is_some());
    }

    #[test]
    fn pap0_examples() {
        let s = Schedule::default();
        let one = Weight::one();
        let f = FunctionHandle::scalar(|t| 1.0 / (1.0 + t * t));
        assert!(membership_pap0(&f, &one, &one, &s, None).unwrap().is_member());
        let c = FunctionHandle::scalar(|_| 1.0);
        assert!(!membership_pap0(&c, &one, &one, &s, None).unwrap().is_member());
    }

    #[test]
    fn kappa_half_membership_needs_a_longer_schedule() {
        let one = Weight::one();
        let f = FunctionHandle::scalar(|t| 1.0 / (1.0 + t * t));
        let k = Some(KappaParam::new(0.5).unwrap());
        // 2 atan(T) / sqrt(2T) is still ~0.02 at the default T_max.
        let short = membership_pap0(&f, &one, &one, &Schedule::default(), k).unwrap();
        assert!(!short.is_member());
        let long = membership_pap0(&f, &one, &one, &Schedule::default().with_count(40), k).unwrap();
        assert!(long.is_member(), "{:?}", long.verdict);
    }
}

use serde::Serialize;

use crate::ergodic::{decide_ln, KappaParam, LimitKind, Schedule};
use crate::error::{Error, Result};
use crate::weights::Weight;

use super::Outcome;

/// Small-T probes `2^{-k}`, `k = 1..=10`, ahead of the schedule.
pub(crate) fn small_t_probes() -> Vec<f64> {
    (1..=10).rev().map(|k| 0.5f64.powi(k)).collect()
}

/// Extreme value of a ratio curve over small-T probes and the schedule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioBound {
    pub outcome: Outcome,
    /// Supremum (HHH) or infimum (uniqueness) over every probe.
    pub estimate: f64,
    /// `T` where the estimate was attained.
    pub at: f64,
    pub kind: LimitKind,
    pub kappa: Option<f64>,
    /// `(T, ratio)` over the small-T probes and the schedule.
    pub curve: Vec<(f64, f64)>,
}

/// `ln nu(Q_T) - kappa ln mu(Q_T)` over small-T probes then the schedule.
fn ln_ratio_curve(mu: &Weight, nu: &Weight, kappa: f64, schedule: &Schedule) -> Result<(Vec<f64>, Vec<f64>, usize)> {
    let probes = small_t_probes();
    let n_small = probes.len();
    let ts: Vec<f64> = probes.into_iter().chain(schedule.times()).collect();
    let ln_mu = mu.ln_mass_at(&ts, schedule.quad_tol)?;
    let ln_nu = nu.ln_mass_at(&ts, schedule.quad_tol)?;
    let ln_r = ln_nu.iter().zip(&ln_mu).map(|(n, m)| n - kappa * m).collect();
    Ok((ts, ln_r, n_small))
}

/// `sup_{T>0} nu(Q_T)/mu(Q_T) < infinity`, judged on the schedule plus
/// small-T probes.
pub fn check_hhh(mu: &Weight, nu: &Weight, schedule: &Schedule) -> Result<RatioBound> {
    let schedule = schedule.validated()?;
    let (ts, ln_r, n_small) = ln_ratio_curve(mu, nu, 1.0, &schedule)?;
    let verdict = decide_ln(&ts[n_small..], &ln_r[n_small..], &schedule.rule());
    let (i, &ln_max) = ln_r
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty probes");
    let outcome = match verdict.kind {
        LimitKind::Diverges => Outcome::Fail,
        LimitKind::Undecided => Outcome::Undecided,
        _ => Outcome::Pass,
    };
    Ok(RatioBound {
        outcome,
        estimate: ln_max.exp(),
        at: ts[i],
        kind: verdict.kind,
        kappa: None,
        curve: ts.iter().zip(&ln_r).map(|(&t, l)| (t, l.exp())).collect(),
    })
}

/// `inf_{T>0} nu(Q_T)/mu(Q_T)^kappa > 0`. A ratio curve tending to zero
/// fails; a decided curve passes when the minimum over all probes clears
/// the zero threshold.
pub fn uniqueness_precondition(
    mu: &Weight,
    nu: &Weight,
    schedule: &Schedule,
    kappa: Option<KappaParam>,
) -> Result<RatioBound> {
    let schedule = schedule.validated()?;
    let k = kappa.map_or(1.0, KappaParam::value);
    let (ts, ln_r, n_small) = ln_ratio_curve(mu, nu, k, &schedule)?;
    let verdict = decide_ln(&ts[n_small..], &ln_r[n_small..], &schedule.rule());
    let (i, &ln_min) = ln_r
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty probes");
    let estimate = ln_min.exp();
    let outcome = if verdict.kind == LimitKind::ConvergesToZero {
        Outcome::Fail
    } else if estimate > schedule.zero_threshold && verdict.kind != LimitKind::Undecided {
        Outcome::Pass
    } else {
        Outcome::Undecided
    };
    Ok(RatioBound {
        outcome,
        estimate,
        at: ts[i],
        kind: verdict.kind,
        kappa: kappa.map(KappaParam::value),
        curve: ts.iter().zip(&ln_r).map(|(&t, l)| (t, l.exp())).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TauRatio {
    pub tau: f64,
    pub kind: LimitKind,
    /// Limit estimate; `None` when divergent or undecided.
    pub limit: Option<f64>,
    pub final_ratio: f64,
}

/// Per-translation limits of a shifted mass ratio.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShiftRatios {
    pub outcome: Outcome,
    pub kappa: Option<f64>,
    pub per_tau: Vec<TauRatio>,
}

fn shift_ratios(mu: &Weight, taus: &[f64], kappa: Option<KappaParam>, schedule: &Schedule) -> Result<ShiftRatios> {
    let schedule = schedule.validated()?;
    if taus.is_empty() {
        return Err(Error::InvalidParameter("at least one translation is required".into()));
    }
    let k = kappa.map_or(1.0, KappaParam::value);
    let ts = schedule.times();
    let ln_mu = mu.ln_mass_at(&ts, schedule.quad_tol)?;
    let mut per_tau = Vec::with_capacity(taus.len());
    for &tau in taus {
        let shifted: Vec<f64> = ts.iter().map(|t| t + tau.abs()).collect();
        let ln_s = mu.ln_mass_at(&shifted, schedule.quad_tol)?;
        let ln_r: Vec<f64> = ln_s.iter().zip(&ln_mu).map(|(s, m)| k * s - m).collect();
        let v = decide_ln(&ts, &ln_r, &schedule.rule());
        per_tau.push(TauRatio {
            tau,
            kind: v.kind,
            limit: if v.is_convergent() { v.scalar() } else { None },
            final_ratio: ln_r[ln_r.len() - 1].exp(),
        });
    }
    let outcome = if per_tau.iter().any(|r| r.kind == LimitKind::Diverges) {
        Outcome::Fail
    } else if per_tau.iter().all(|r| r.limit.is_some()) {
        Outcome::Pass
    } else {
        Outcome::Undecided
    };
    Ok(ShiftRatios {
        outcome,
        kappa: kappa.map(KappaParam::value),
        per_tau,
    })
}

/// `lim mu(Q_{T+|tau|})/mu(Q_T)` is finite for every `tau`.
pub fn check_jj(mu: &Weight, taus: &[f64], schedule: &Schedule) -> Result<ShiftRatios> {
    shift_ratios(mu, taus, None, schedule)
}

/// `lim mu(Q_{T+|tau|})^kappa/mu(Q_T)` is finite for every `tau`.
pub fn check_jjj(mu: &Weight, taus: &[f64], kappa: KappaParam, schedule: &Schedule) -> Result<ShiftRatios> {
    shift_ratios(mu, taus, Some(kappa), schedule)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Weight {
        Weight::parse(s).unwrap()
    }

    #[test]
    fn hhh_examples() {
        let s = Schedule::default();
        let a = w("1+abs(x)");
        let r = check_hhh(&a, &a, &s).unwrap();
        assert_eq!(r.outcome, Outcome::Pass);
        assert!((r.estimate - 1.0).abs() < 1e-12);

        let r = check_hhh(&w("exp(abs(x))"), &a, &s).unwrap();
        assert_eq!(r.outcome, Outcome::Pass);
        // (2T+T^2)/(2(e^T-1)) peaks as T -> 0+.
        let f = |t: f64| (2.0 * t + t * t) / (2.0 * t.exp_m1());
        assert!((r.estimate - f(r.at)).abs() < 1e-9);
        assert!(r.estimate > 0.99 && r.estimate <= 1.0);

        let r = check_hhh(&Weight::one(), &w("1+x^2"), &s).unwrap();
        assert_eq!(r.outcome, Outcome::Fail);
        let t = s.t_max();
        assert!((r.estimate - (1.0 + t * t / 3.0)).abs() < 1e-9 * r.estimate);
    }

    #[test]
    fn jj_jjj_examples() {
        let s = Schedule::default();
        let q = w("1+x^2");
        let r = check_jj(&q, &[1.0], &s).unwrap();
        assert_eq!(r.outcome, Outcome::Pass);
        assert!((r.per_tau[0].limit.unwrap() - 1.0).abs() < 1e-3);

        let half = KappaParam::new(0.5).unwrap();
        let r = check_jjj(&q, &[1.0], half, &s).unwrap();
        assert_eq!(r.outcome, Outcome::Pass);
        assert_eq!(r.per_tau[0].kind, LimitKind::ConvergesToZero);

        let r = check_jj(&w("exp(abs(x))"), &[1.0, -2.0], &s).unwrap();
        assert_eq!(r.outcome, Outcome::Pass);
        assert!((r.per_tau[0].limit.unwrap() - 1f64.exp()).abs() < 1e-6);
        assert!((r.per_tau[1].limit.unwrap() - 2f64.exp()).abs() < 1e-6);

        let r = check_jj(&w("exp(x^2)"), &[1.0], &s).unwrap();
        assert_eq!(r.outcome, Outcome::Fail);
        assert!(check_jj(&q, &[], &s).is_err());
    }

    #[test]
    fn uniqueness_examples() {
        let s = Schedule::default();
        let a = w("1+abs(x)");
        let r = uniqueness_precondition(&a, &a, &s, None).unwrap();
        assert_eq!(r.outcome, Outcome::Pass);
        assert!((r.estimate - 1.0).abs() < 1e-12);

        let r = uniqueness_precondition(&w("exp(abs(x))"), &a, &s, None).unwrap();
        assert_eq!(r.outcome, Outcome::Fail);

        let half = KappaParam::new(0.5).unwrap();
        let r = uniqueness_precondition(&Weight::one(), &w("1+x^2"), &s, Some(half)).unwrap();
        assert_eq!(r.outcome, Outcome::Pass);
        // Minimum sits at the smallest probe of (2T + 2T^3/3)/sqrt(2T).
        let t = r.at;
        assert_eq!(t, 0.5f64.powi(10));
        let want = (2.0 * t + 2.0 * t.powi(3) / 3.0) / (2.0 * t).sqrt();
        assert!((r.estimate - want).abs() < 1e-9 * want);
    }
}

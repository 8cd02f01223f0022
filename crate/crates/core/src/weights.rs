//! Weights and numerical membership checks for the weight classes.
//!
//! Every check returns a [`ClassReport`] whose verdict is `member` or
//! `non_member` only when the shared limit rule decides; anything else is
//! `undecided`.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::ergodic::{decide_ln, LimitKind, LimitVerdict, Schedule};
use crate::error::Result;
use crate::logval::LogVal;
use crate::quad::{integrate, QuadOptions};
use crate::weight_dsl::{
    classify_polynomial, exact_cumulative, parse_weight, CumulativeForm, PolyClassification, WeightExpr,
    DEFAULT_MAX_DEGREE,
};

#[derive(Debug, Clone)]
pub struct Weight {
    expr: WeightExpr,
    cumulative: CumulativeForm,
    classification: Option<PolyClassification>,
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.expr.fmt(f)
    }
}

impl Weight {
    pub fn parse(text: &str) -> Result<Weight> {
        Ok(Weight::from_expr(parse_weight(text)?))
    }

    pub fn from_expr(expr: WeightExpr) -> Weight {
        let cumulative = exact_cumulative(&expr);
        let classification = classify_polynomial(&expr, DEFAULT_MAX_DEGREE)
            .ok()
            .filter(|c| c.is_polynomial);
        Weight {
            expr,
            cumulative,
            classification,
        }
    }

    /// Drop the closed-form mass so every query integrates numerically.
    pub fn without_closed_form(mut self) -> Weight {
        self.cumulative = CumulativeForm::Unavailable;
        self
    }

    pub fn one() -> Weight {
        Weight::from_expr(WeightExpr::constant(1))
    }

    pub fn expr(&self) -> &WeightExpr {
        &self.expr
    }

    pub fn cumulative(&self) -> &CumulativeForm {
        &self.cumulative
    }

    /// Symbolic classification, present only for polynomial expressions.
    pub fn polynomial(&self) -> Option<&PolyClassification> {
        self.classification.as_ref()
    }

    /// DSL weights are continuous.
    pub fn is_continuous(&self) -> bool {
        true
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.expr.eval(x)
    }

    /// `ln w(x)`; `-inf` at zeros and NaN where the expression is negative.
    pub fn ln_eval(&self, x: f64) -> f64 {
        let v = self.expr.eval(x);
        if v.is_finite() && v > 1e-300 {
            return v.ln();
        }
        let l = self.expr.eval_log(x);
        match l.sign {
            1 => l.ln_abs,
            0 => f64::NEG_INFINITY,
            _ => f64::NAN,
        }
    }

    /// `w(Q_T)`, the mass of `[-T, T]`.
    pub fn mu_qt(&self, t: f64) -> Result<f64> {
        if let Some(v) = self.cumulative.value(t) {
            return Ok(v);
        }
        Ok(self.ln_mu_qt(t)?.exp())
    }

    /// `ln w(Q_T)`; finite for exponential weights far past `f64` overflow.
    pub fn ln_mu_qt(&self, t: f64) -> Result<f64> {
        Ok(self.ln_mass_at(&[t], 1e-10)?[0])
    }

    /// `ln w(Q_T)` for every `T` in `ts` (any order), integrating nested
    /// shells once when no closed form exists.
    pub fn ln_mass_at(&self, ts: &[f64], tol: f64) -> Result<Vec<f64>> {
        if let CumulativeForm::Closed(c) = &self.cumulative {
            return Ok(ts.iter().map(|&t| c.ln_value(t)).collect());
        }
        let mut order: Vec<usize> = (0..ts.len()).collect();
        order.sort_by(|&i, &j| ts[i].total_cmp(&ts[j]));
        let mut out = vec![f64::NAN; ts.len()];
        let mut acc = LogVal::ZERO;
        let mut reached = 0.0;
        for i in order {
            let t = ts[i];
            if t > reached {
                if reached == 0.0 {
                    acc = acc + self.shell_mass(-t, 0.0, tol)? + self.shell_mass(0.0, t, tol)?;
                } else {
                    acc = acc + self.shell_mass(-t, -reached, tol)? + self.shell_mass(reached, t, tol)?;
                }
                reached = t;
            }
            out[i] = if acc.sign > 0 { acc.ln_abs } else { f64::NAN };
        }
        Ok(out)
    }

    /// Integral of the weight over `[a, b]` with a log shift so that huge or
    /// tiny weights stay representable.
    fn shell_mass(&self, a: f64, b: f64, tol: f64) -> Result<LogVal> {
        self.shell_piece(a, b, tol, f64::NEG_INFINITY, 0)
    }

    /// Pieces whose sampled log-range is wide are bisected, and pieces far
    /// below the running peak are dropped, so narrow peaks at the edge of a
    /// long shell are not stepped over.
    fn shell_piece(&self, a: f64, b: f64, tol: f64, floor: f64, depth: u32) -> Result<LogVal> {
        let (lo, hi) = (0..=32)
            .map(|k| self.ln_eval(a + (b - a) * k as f64 / 32.0))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        if !hi.is_finite() || hi < floor {
            return Ok(LogVal::ZERO);
        }
        if hi - lo > 40.0 && depth < 80 {
            let mid = 0.5 * (a + b);
            let floor = floor.max(hi - 60.0);
            return Ok(self.shell_piece(a, mid, tol, floor, depth + 1)? + self.shell_piece(mid, b, tol, floor, depth + 1)?);
        }
        let est = integrate(|x| (self.ln_eval(x) - hi).exp(), a, b, &QuadOptions::with_tol(tol))?;
        Ok(LogVal::from_f64(est.value) * LogVal::exp_of(hi))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum WeightClass {
    W,
    V,
    WInv,
    Ws,
    #[serde(rename = "equivalence")]
    Equivalence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Member,
    NonMember,
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evidence {
    pub name: String,
    pub probe: f64,
    pub value: f64,
}

/// Estimated limits for one translation `tau`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TauLimits {
    pub pointwise: Option<f64>,
    pub cumulative: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassReport {
    pub class: WeightClass,
    pub verdict: Verdict,
    pub evidence: Vec<Evidence>,
    pub limits: BTreeMap<String, TauLimits>,
}

impl ClassReport {
    fn new(class: WeightClass) -> Self {
        ClassReport {
            class,
            verdict: Verdict::Undecided,
            evidence: Vec::new(),
            limits: BTreeMap::new(),
        }
    }

    fn push(&mut self, name: impl Into<String>, probe: f64, value: f64) {
        self.evidence.push(Evidence {
            name: name.into(),
            probe,
            value,
        });
    }

    pub fn is_member(&self) -> bool {
        self.verdict == Verdict::Member
    }

    pub fn evidence_value(&self, name: &str) -> Option<f64> {
        self.evidence.iter().find(|e| e.name == name).map(|e| e.value)
    }
}

/// Probe grid and schedule used by the class checks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeConfig {
    pub half_width: f64,
    pub step: f64,
    /// Tail probes at `+-10^k` for `k = 2..=tail_max_exp`.
    pub tail_max_exp: i32,
    pub min_infimum: f64,
    pub taus: Vec<f64>,
    pub schedule: Schedule,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            half_width: 50.0,
            step: 1e-2,
            tail_max_exp: 4,
            min_infimum: 1e-9,
            taus: vec![-3.0, -1.0, -0.5, 0.5, 1.0, 3.0],
            schedule: Schedule::default(),
        }
    }
}

impl ProbeConfig {
    fn grid(&self) -> impl Iterator<Item = f64> + '_ {
        let n = (2.0 * self.half_width / self.step).round() as i64;
        (0..=n).map(move |k| -self.half_width + k as f64 * self.step)
    }

    fn tails(&self, max_exp: i32) -> Vec<f64> {
        (2..=max_exp)
            .flat_map(|k| {
                let x = 10f64.powi(k);
                [-x, x]
            })
            .collect()
    }
}

fn tau_key(tau: f64) -> String {
    format!("{tau}")
}

fn verdict_value(v: &LimitVerdict) -> f64 {
    v.scalar().unwrap_or(f64::NAN)
}

/// Membership in W: positive infimum and unbounded mass.
pub fn check_w(w: &Weight, cfg: &ProbeConfig) -> Result<ClassReport> {
    let mut report = ClassReport::new(WeightClass::W);
    let (mut min_ln, mut argmin) = (f64::INFINITY, f64::NAN);
    for x in cfg.grid().chain(cfg.tails(cfg.tail_max_exp)) {
        let l = w.ln_eval(x);
        if l.is_nan() || l < min_ln {
            min_ln = l;
            argmin = x;
            if l.is_nan() {
                break;
            }
        }
    }
    report.push("grid_infimum", argmin, min_ln.exp());
    let inf_ok = match w.polynomial() {
        Some(c) => {
            report.push("polynomial_certificate", c.degree as f64, if c.is_weight { 1.0 } else { 0.0 });
            c.is_weight
        }
        None => !min_ln.is_nan() && min_ln >= cfg.min_infimum.ln(),
    };

    let ts = cfg.schedule.times();
    let ln_mass = w.ln_mass_at(&ts, cfg.schedule.quad_tol)?;
    let mass = decide_ln(&ts, &ln_mass, &cfg.schedule.rule());
    let t_max = ts[ts.len() - 1];
    report.push("mass", t_max, ln_mass[ln_mass.len() - 1].exp());
    report.push("mass_growth_exponent", t_max, mass.growth_exponent);

    report.verdict = if !inf_ok {
        Verdict::NonMember
    } else {
        match mass.kind {
            LimitKind::Diverges => Verdict::Member,
            LimitKind::ConvergesTo | LimitKind::ConvergesToZero => Verdict::NonMember,
            LimitKind::Undecided => Verdict::Undecided,
        }
    };
    Ok(report)
}

/// Membership in V: bounded supremum, for weights already in W.
pub fn check_v(w: &Weight, cfg: &ProbeConfig) -> Result<ClassReport> {
    let mut report = ClassReport::new(WeightClass::V);
    let w_report = check_w(w, cfg)?;
    report.push("w_member", 0.0, if w_report.is_member() { 1.0 } else { 0.0 });

    let grid_sup = cfg.grid().map(|x| w.ln_eval(x)).fold(f64::NEG_INFINITY, f64::max);
    report.push("grid_supremum", cfg.half_width, grid_sup.exp());
    let mut sups = Vec::new();
    let mut acc = grid_sup;
    for k in 2..=cfg.tail_max_exp.max(4) {
        let x = 10f64.powi(k);
        acc = acc.max(w.ln_eval(x)).max(w.ln_eval(-x));
        report.push("supremum", x, acc.exp());
        sups.push(acc);
    }
    let (first, last) = (sups[0], sups[sups.len() - 1]);
    let stable = (last - first).abs() <= cfg.schedule.spread_tol.ln_1p();
    let growing = sups.windows(2).all(|p| p[1] > p[0]) && last - first > 2f64.ln();

    let numeric = if stable {
        Verdict::Member
    } else if growing {
        Verdict::NonMember
    } else {
        Verdict::Undecided
    };
    let bounded = match w.polynomial() {
        Some(c) if c.is_weight => {
            report.push("polynomial_certificate", c.degree as f64, if c.degree == 0 { 1.0 } else { 0.0 });
            if c.degree == 0 {
                Verdict::Member
            } else {
                Verdict::NonMember
            }
        }
        _ => numeric,
    };
    report.verdict = match (w_report.verdict, bounded) {
        (Verdict::NonMember, _) | (_, Verdict::NonMember) => Verdict::NonMember,
        (Verdict::Member, Verdict::Member) => Verdict::Member,
        _ => Verdict::Undecided,
    };
    Ok(report)
}

fn pointwise_ratio(w: &Weight, tau: f64, cfg: &ProbeConfig) -> LimitVerdict {
    let xs = cfg.schedule.times();
    let ln_r: Vec<f64> = xs.iter().map(|&x| w.ln_eval(x + tau) - w.ln_eval(x)).collect();
    decide_ln(&xs, &ln_r, &cfg.schedule.rule())
}

fn cumulative_ratio(w: &Weight, tau: f64, cfg: &ProbeConfig) -> Result<LimitVerdict> {
    let ts: Vec<f64> = cfg.schedule.times().into_iter().filter(|t| t + tau > 0.0).collect();
    let shifted: Vec<f64> = ts.iter().map(|t| t + tau).collect();
    let all: Vec<f64> = ts.iter().chain(&shifted).copied().collect();
    let ln = w.ln_mass_at(&all, cfg.schedule.quad_tol)?;
    let n = ts.len();
    let ln_r: Vec<f64> = (0..n).map(|j| ln[n + j] - ln[j]).collect();
    Ok(decide_ln(&ts, &ln_r, &cfg.schedule.rule()))
}

fn finite_limit(v: &LimitVerdict) -> Verdict {
    match v.kind {
        LimitKind::ConvergesTo | LimitKind::ConvergesToZero => Verdict::Member,
        LimitKind::Diverges => Verdict::NonMember,
        LimitKind::Undecided => Verdict::Undecided,
    }
}

fn combine(verdicts: impl IntoIterator<Item = Verdict>) -> Verdict {
    let mut out = Verdict::Member;
    for v in verdicts {
        match v {
            Verdict::NonMember => return Verdict::NonMember,
            Verdict::Undecided => out = Verdict::Undecided,
            Verdict::Member => {}
        }
    }
    out
}

/// Membership in W^Inv: finite pointwise and cumulative translation ratios.
pub fn check_winv(w: &Weight, taus: &[f64], cfg: &ProbeConfig) -> Result<ClassReport> {
    let mut report = ClassReport::new(WeightClass::WInv);
    let w_report = check_w(w, cfg)?;
    report.push("w_member", 0.0, if w_report.is_member() { 1.0 } else { 0.0 });
    let t_max = cfg.schedule.t_max();
    let mut verdicts = vec![w_report.verdict];
    for &tau in taus {
        let p = pointwise_ratio(w, tau, cfg);
        let c = cumulative_ratio(w, tau, cfg)?;
        report.push(format!("pointwise_ratio[tau={tau}]"), t_max, verdict_value(&p));
        report.push(format!("cumulative_ratio[tau={tau}]"), t_max, verdict_value(&c));
        report.limits.insert(
            tau_key(tau),
            TauLimits {
                pointwise: p.scalar(),
                cumulative: c.scalar(),
            },
        );
        verdicts.push(finite_limit(&p));
        verdicts.push(finite_limit(&c));
    }
    report.verdict = combine(verdicts);
    Ok(report)
}

/// Membership in W^s: continuous, in W, finite pointwise ratios. Also runs
/// the W^Inv check and records whether the inclusion holds on this weight.
pub fn check_ws(w: &Weight, taus: &[f64], cfg: &ProbeConfig) -> Result<ClassReport> {
    let mut report = ClassReport::new(WeightClass::Ws);
    let w_report = check_w(w, cfg)?;
    report.push("w_member", 0.0, if w_report.is_member() { 1.0 } else { 0.0 });
    let t_max = cfg.schedule.t_max();
    let mut verdicts = vec![w_report.verdict];
    for &tau in taus {
        let p = pointwise_ratio(w, tau, cfg);
        report.push(format!("pointwise_ratio[tau={tau}]"), t_max, verdict_value(&p));
        report.limits.insert(
            tau_key(tau),
            TauLimits {
                pointwise: p.scalar(),
                cumulative: None,
            },
        );
        verdicts.push(finite_limit(&p));
    }
    let numeric = combine(verdicts);
    report.verdict = match w.polynomial() {
        Some(c) => {
            report.push("polynomial_certificate", c.degree as f64, if c.in_ws { 1.0 } else { 0.0 });
            if c.in_ws {
                Verdict::Member
            } else {
                Verdict::NonMember
            }
        }
        None if w.is_continuous() => numeric,
        None => Verdict::NonMember,
    };

    let inv = check_winv(w, taus, cfg)?;
    for (k, l) in inv.limits {
        if let Some(slot) = report.limits.get_mut(&k) {
            slot.cumulative = l.cumulative;
        }
    }
    report.push(
        "winv_member",
        0.0,
        match inv.verdict {
            Verdict::Member => 1.0,
            Verdict::NonMember => 0.0,
            Verdict::Undecided => f64::NAN,
        },
    );
    let inclusion = report.verdict != Verdict::Member || inv.verdict == Verdict::Member;
    report.push("inclusion_holds", 0.0, if inclusion { 1.0 } else { 0.0 });
    Ok(report)
}

/// `mu` equivalent to `nu`: the ratio `mu/nu` is bounded above and below by
/// positive constants.
pub fn equivalent(mu: &Weight, nu: &Weight, cfg: &ProbeConfig) -> Result<ClassReport> {
    let mut report = ClassReport::new(WeightClass::Equivalence);
    let ln_ratio = |x: f64| mu.ln_eval(x) - nu.ln_eval(x);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for x in cfg.grid() {
        let l = ln_ratio(x);
        if l.is_nan() {
            lo = f64::NAN;
            break;
        }
        lo = lo.min(l);
        hi = hi.max(l);
    }
    report.push("grid_ratio_min", cfg.half_width, lo.exp());
    report.push("grid_ratio_max", cfg.half_width, hi.exp());
    if lo.is_nan() {
        report.verdict = Verdict::NonMember;
        return Ok(report);
    }

    let rule = cfg.schedule.rule();
    let xs = cfg.schedule.times();
    let mut verdicts = Vec::new();
    for (side, sign) in [("right", 1.0), ("left", -1.0)] {
        let up: Vec<f64> = xs.iter().map(|&x| ln_ratio(sign * x)).collect();
        let down: Vec<f64> = up.iter().map(|l| -l).collect();
        for (label, seq) in [("ratio", &up), ("inverse_ratio", &down)] {
            let v = decide_ln(&xs, seq, &rule);
            report.push(format!("{side}_{label}"), sign * xs[xs.len() - 1], verdict_value(&v));
            verdicts.push(match v.kind {
                LimitKind::ConvergesTo => Verdict::Member,
                LimitKind::ConvergesToZero | LimitKind::Diverges => Verdict::NonMember,
                LimitKind::Undecided => Verdict::Undecided,
            });
        }
    }
    report.verdict = combine(verdicts);
    Ok(report)
}

pub fn combine_sum(mu: &Weight, nu: &Weight) -> Weight {
    Weight::from_expr(WeightExpr::sum(mu.expr.clone(), nu.expr.clone()))
}

pub fn combine_product(mu: &Weight, nu: &Weight) -> Weight {
    Weight::from_expr(WeightExpr::product(mu.expr.clone(), nu.expr.clone()))
}

/// Reference weights used by the instance suite.
pub const CATALOG: [&str; 7] = ["1", "2", "1+abs(x)", "2+abs(x)", "x^2+1", "x^2+2", "exp(abs(x))"];

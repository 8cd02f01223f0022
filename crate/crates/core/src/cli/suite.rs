//! Fixed registry of theorem instances run by `verify-suite`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::funcspec::{parse_trig, FunctionSpec};
use crate::apfun::FunctionHandle;
use crate::ergodic::{check_cd, verify_mean_theorem, ErgodicCurve, KappaParam, LimitKind, Schedule};
use crate::error::{Error, Result};
use crate::transforms::{
    composition_check, conv_membership, translation_invariance_check, uniqueness_precondition, Kernel, Outcome,
    TwoVarFunction,
};
use crate::weight_dsl::{classify_polynomial, RejectionReason, DEFAULT_MAX_DEGREE};
use crate::weights::{check_winv, check_ws, combine_product, combine_sum, equivalent, ProbeConfig, Verdict, Weight};

/// Registry ids in report order.
pub const REGISTRY: [&str; 10] = [
    "ws_subset_winv",
    "sum_winv",
    "product_sum_ws",
    "polynomial_weights",
    "dw_mean",
    "cd_condition",
    "convolution",
    "translation",
    "uniqueness_infima",
    "composition",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceReport {
    pub description: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub evidence: BTreeMap<String, f64>,
    /// `(T, |R(T)|)` for failed instances.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub curve: Option<Vec<(f64, f64)>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntryReport {
    pub id: String,
    pub statement: String,
    pub status: Status,
    pub instances: Vec<InstanceReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
    pub entries: Vec<EntryReport>,
}

impl SuiteReport {
    pub fn entry(&self, id: &str) -> Option<&EntryReport> {
        self.entries.iter().find(|e| e.id == id)
    }
}

/// Result of one instance before it is labelled.
struct Finding {
    ok: Option<bool>,
    reason: Option<String>,
    evidence: BTreeMap<String, f64>,
    curve: Option<ErgodicCurve>,
}

impl Finding {
    fn new(ok: Option<bool>) -> Self {
        Finding {
            ok,
            reason: None,
            evidence: BTreeMap::new(),
            curve: None,
        }
    }

    fn skip(reason: impl Into<String>) -> Self {
        Finding::new(None).because(reason)
    }

    fn because(mut self, reason: impl Into<String>) -> Self {
        self.reason = Some(reason.into());
        self
    }

    fn with(mut self, key: &str, value: f64) -> Self {
        self.evidence.insert(key.into(), value);
        self
    }

    fn curve(mut self, c: &ErgodicCurve) -> Self {
        self.curve = Some(c.clone());
        self
    }

    fn from_kind(kind: LimitKind, want: LimitKind) -> Self {
        match kind {
            LimitKind::Undecided => Finding::skip("limit undecided on this schedule"),
            k if k == want => Finding::new(Some(true)),
            k => Finding::new(Some(false)).because(format!("limit verdict {k:?}")),
        }
    }
}

type Runner = Box<dyn Fn(&Schedule, u64) -> Result<Finding> + Send + Sync>;

struct Instance {
    id: &'static str,
    description: String,
    run: Runner,
}

fn w(s: &str) -> Result<Weight> {
    Weight::parse(s)
}

fn cfg(s: &Schedule) -> ProbeConfig {
    ProbeConfig {
        schedule: *s,
        ..ProbeConfig::default()
    }
}

fn verdict_code(v: Verdict) -> f64 {
    match v {
        Verdict::Member => 1.0,
        Verdict::NonMember => 0.0,
        Verdict::Undecided => f64::NAN,
    }
}

fn from_verdict(v: Verdict, what: &str) -> Finding {
    match v {
        Verdict::Member => Finding::new(Some(true)),
        Verdict::NonMember => Finding::new(Some(false)).because(format!("{what} judged non-member")),
        Verdict::Undecided => Finding::skip(format!("{what} undecided on this schedule")),
    }
}

fn ws_in_winv(weight: &'static str) -> Instance {
    Instance {
        id: "ws_subset_winv",
        description: format!("{weight} in W^s implies W^Inv"),
        run: Box::new(move |s, _| {
            let c = cfg(s);
            let mu = w(weight)?;
            let ws = check_ws(&mu, &c.taus, &c)?;
            if ws.verdict != Verdict::Member {
                return Ok(Finding::skip(format!("W^s verdict {:?}", ws.verdict)));
            }
            let winv = check_winv(&mu, &c.taus, &c)?;
            Ok(from_verdict(winv.verdict, "W^Inv").with("ws", 1.0).with("winv", verdict_code(winv.verdict)))
        }),
    }
}

fn sum_winv(a: &'static str, b: &'static str) -> Instance {
    Instance {
        id: "sum_winv",
        description: format!("({a}) + ({b}) stays in W^Inv"),
        run: Box::new(move |s, _| {
            let c = cfg(s);
            let (mu, nu) = (w(a)?, w(b)?);
            let eq = equivalent(&mu, &nu, &c)?;
            if eq.verdict != Verdict::Member {
                return Ok(Finding::skip(format!("equivalence verdict {:?}", eq.verdict)));
            }
            for x in [&mu, &nu] {
                let r = check_winv(x, &c.taus, &c)?;
                if r.verdict != Verdict::Member {
                    return Ok(Finding::skip(format!("{x} W^Inv verdict {:?}", r.verdict)));
                }
            }
            let r = check_winv(&combine_sum(&mu, &nu), &c.taus, &c)?;
            Ok(from_verdict(r.verdict, "sum in W^Inv"))
        }),
    }
}

fn combine_ws(a: &'static str, b: &'static str, product: bool) -> Instance {
    let op = if product { "*" } else { "+" };
    Instance {
        id: "product_sum_ws",
        description: format!("({a}) {op} ({b}) stays in W^s"),
        run: Box::new(move |s, _| {
            let c = cfg(s);
            let (mu, nu) = (w(a)?, w(b)?);
            for x in [&mu, &nu] {
                let r = check_ws(x, &c.taus, &c)?;
                if r.verdict != Verdict::Member {
                    return Ok(Finding::skip(format!("{x} W^s verdict {:?}", r.verdict)));
                }
            }
            if !product && equivalent(&mu, &nu, &c)?.verdict != Verdict::Member {
                return Ok(Finding::skip("operands not equivalent"));
            }
            let combined = if product { combine_product(&mu, &nu) } else { combine_sum(&mu, &nu) };
            let r = check_ws(&combined, &c.taus, &c)?;
            Ok(from_verdict(r.verdict, "combination in W^s"))
        }),
    }
}

fn polynomial(text: &'static str, expect: std::result::Result<(usize, usize), RejectionReason>) -> Instance {
    Instance {
        id: "polynomial_weights",
        description: match expect {
            Ok((d, k)) => format!("{text} is a weight of degree {d} with {k} quadratic factors"),
            Err(r) => format!("{text} is rejected ({r:?})"),
        },
        run: Box::new(move |_, _| {
            let c = classify_polynomial(w(text)?.expr(), DEFAULT_MAX_DEGREE)?;
            let got = if c.is_weight {
                Ok((c.degree, c.factors.len()))
            } else {
                Err(c.rejection.unwrap_or(RejectionReason::NotPolynomial))
            };
            let f = Finding::new(Some(got == expect)).with("degree", c.degree as f64).with("factors", c.factors.len() as f64);
            Ok(if got == expect { f } else { f.because(format!("classified as {got:?}")) })
        }),
    }
}

fn mean(f: &'static str, mu: &'static str, nu: &'static str) -> Instance {
    Instance {
        id: "dw_mean",
        description: format!("M({f}, {mu}, {nu}) = theta M(f)"),
        run: Box::new(move |s, _| {
            let p = parse_trig(f)?;
            let c = verify_mean_theorem(&p, &w(mu)?, &w(nu)?, s)?;
            if let Some(reason) = c.skipped {
                return Ok(Finding::skip(reason));
            }
            let r = c.result.expect("result present when not skipped");
            let residual = r.residual.unwrap_or(f64::NAN);
            let fd = Finding::new(Some(residual <= 5e-3))
                .with("residual", residual)
                .with("theta", r.theta.unwrap_or(f64::NAN));
            Ok(if residual <= 5e-3 { fd } else { fd.because("residual above 5e-3").curve(&r.curve) })
        }),
    }
}

fn cd(mu: &'static str, nu: &'static str, lambda: f64) -> Instance {
    Instance {
        id: "cd_condition",
        description: format!("condition holds for {mu}, {nu} at lambda={lambda}"),
        run: Box::new(move |s, _| {
            let c = check_cd(&w(mu)?, &w(nu)?, lambda, s)?;
            Ok(Finding::from_kind(c.verdict.kind, LimitKind::ConvergesToZero)
                .with("final_magnitude", c.final_norm())
                .curve(&c))
        }),
    }
}

fn convolution(f: &'static str, kernel: &'static str) -> Instance {
    Instance {
        id: "convolution",
        description: format!("{f} * {kernel} is ergodic for mu=nu=1"),
        run: Box::new(move |s, _| {
            let h = FunctionSpec::parse(f)?.handle()?;
            let one = Weight::one();
            let m = conv_membership(&h, &Kernel::parse(kernel, 1.0)?, &one, &one, s)?;
            if !m.hypotheses.hold {
                return Ok(Finding::skip("hypotheses not established on this schedule"));
            }
            Ok(Finding::from_kind(m.curve.verdict.kind, LimitKind::ConvergesToZero)
                .with("final_r", m.curve.final_norm())
                .with("decay_exponent", m.curve.verdict.decay_exponent)
                .curve(&m.curve))
        }),
    }
}

fn translation(shift: f64, mu: &'static str, nu: &'static str) -> Instance {
    Instance {
        id: "translation",
        description: format!("inv_quad shifted by {shift} stays ergodic for {mu}, {nu}"),
        run: Box::new(move |s, _| {
            let phi = FunctionSpec::parse("inv_quad")?.handle()?;
            let c = translation_invariance_check(&phi, shift, &w(mu)?, &w(nu)?, s)?;
            if !c.hypotheses.hold {
                return Ok(Finding::skip("hypotheses not established on this schedule"));
            }
            if !c.original_member {
                return Ok(Finding::skip(format!("unshifted verdict {:?}", c.original.verdict.kind)));
            }
            Ok(Finding::from_kind(c.curve.verdict.kind, LimitKind::ConvergesToZero)
                .with("final_r", c.curve.final_norm())
                .curve(&c.curve))
        }),
    }
}

fn uniqueness(mu: &'static str, nu: &'static str, kappa: Option<f64>, expect: Outcome) -> Instance {
    let k = kappa.map_or(String::new(), |k| format!(" with kappa={k}"));
    Instance {
        id: "uniqueness_infima",
        description: format!("infimum condition for {mu}, {nu}{k} is {expect:?}"),
        run: Box::new(move |s, _| {
            let kappa = kappa.map(KappaParam::new).transpose()?;
            let r = uniqueness_precondition(&w(mu)?, &w(nu)?, s, kappa)?;
            let f = match r.outcome {
                Outcome::Undecided => Finding::skip("ratio curve undecided on this schedule"),
                o if o == expect => Finding::new(Some(true)),
                o => Finding::new(Some(false)).because(format!("outcome {o:?}")),
            };
            Ok(f.with("estimate", r.estimate).with("at", r.at))
        }),
    }
}

fn composition(function: &'static str, h1: &'static str, h2: &'static str) -> Instance {
    Instance {
        id: "composition",
        description: format!("{function} along ({h1}) + {h2}: remainder ergodic within the bound"),
        run: Box::new(move |s, seed| {
            let f = TwoVarFunction::catalog(function)?;
            let one = Weight::one();
            let h2h: FunctionHandle = FunctionSpec::parse(h2)?.handle()?;
            let r = match composition_check(&f, &parse_trig(h1)?, &h2h, &one, &one, s, seed) {
                Err(e @ Error::LipschitzViolation { .. }) => return Ok(Finding::new(Some(false)).because(e.to_string())),
                other => other?,
            };
            let exact_zero = r.remainder.points.iter().all(|p| p.r.iter().all(|z| z.norm() == 0.0));
            let base = if exact_zero {
                Finding::new(Some(true))
            } else {
                Finding::from_kind(r.remainder.verdict.kind, LimitKind::ConvergesToZero)
            };
            let f = match base.ok {
                Some(true) if r.slack > 1.1 => Finding::new(Some(false)).because(format!("slack {} above 1.1", r.slack)),
                _ => base,
            };
            Ok(f.with("slack", r.slack)
                .with("bound", r.bound)
                .with("remainder_final", r.remainder.final_norm())
                .with("lipschitz_max_quotient", r.lipschitz.max_quotient)
                .curve(&r.remainder))
        }),
    }
}

fn statement(id: &str) -> &'static str {
    match id {
        "ws_subset_winv" => "continuous translation-ratio weights are translation invariant",
        "sum_winv" => "sums of equivalent translation-invariant weights stay translation invariant",
        "product_sum_ws" => "products (and sums of equivalent) continuous translation-ratio weights stay in the class",
        "polynomial_weights" => "a polynomial is a weight iff it is a product of irreducible quadratics",
        "dw_mean" => "the doubly-weighted mean equals theta times the Bohr mean",
        "cd_condition" => "weighted averages of e^{i lambda t} vanish for nonzero lambda",
        "convolution" => "convolution with an integrable kernel preserves the ergodic space",
        "translation" => "the ergodic space is translation invariant",
        "uniqueness_infima" => "infimum conditions behind uniqueness of the decomposition",
        "composition" => "Lipschitz composition preserves pseudo-almost periodicity",
        _ => "",
    }
}

fn registry() -> Vec<Instance> {
    use RejectionReason::{OddDegree, RealRoot};
    vec![
        ws_in_winv("x^2+1"),
        ws_in_winv("exp(abs(x))"),
        ws_in_winv("1+abs(x)"),
        sum_winv("1+abs(x)", "2+abs(x)"),
        sum_winv("x^2+1", "x^2+2"),
        combine_ws("x^2+1", "x^2+2", true),
        combine_ws("1", "exp(abs(x))", true),
        combine_ws("1+abs(x)", "2+abs(x)", false),
        polynomial("x^4+2*x^2+1", Ok((4, 1))),
        polynomial("x^2+x+1", Ok((2, 1))),
        polynomial("x^3+1", Err(OddDegree)),
        polynomial("x^2-1", Err(RealRoot)),
        mean("2+3cos(1*t)", "1", "1"),
        mean("1+cos(1*t)+sin(sqrt2*t)", "exp(abs(x))", "1+abs(x)"),
        mean("1+2cos(2*t)-sin(0.5*t)", "1+x^2", "2+x^2"),
        cd("1", "1", 1.0),
        cd("exp(abs(x))", "1+abs(x)", std::f64::consts::SQRT_2),
        cd("1+x^2", "2+x^2", 2.0),
        convolution("inv_quad", "gauss(1)"),
        convolution("inv_abs", "laplace(1)"),
        translation(5.0, "1", "1"),
        translation(-3.0, "exp(abs(x))", "1+abs(x)"),
        uniqueness("1+abs(x)", "1+abs(x)", None, Outcome::Pass),
        uniqueness("1", "1+x^2", Some(0.5), Outcome::Pass),
        uniqueness("exp(abs(x))", "1+abs(x)", None, Outcome::Fail),
        composition("sin_u_cos_t", "cos(1*t)", "inv_quad"),
        composition("sin_u_cos_t", "cos(1*t)", "zero"),
        composition("affine_exp", "sin(1*t)", "inv_quad"),
    ]
}

fn label(description: String, finding: Result<Finding>) -> InstanceReport {
    let f = finding.unwrap_or_else(|e| Finding::new(Some(false)).because(format!("error: {e}")));
    let status = match f.ok {
        Some(true) => Status::Pass,
        Some(false) => Status::Fail,
        None => Status::Skipped,
    };
    let curve = match status {
        Status::Fail => f
            .curve
            .map(|c| c.points.iter().map(|p| (p.t, crate::ergodic::norm_of(&p.r))).collect()),
        _ => None,
    };
    InstanceReport {
        description,
        status,
        reason: f.reason,
        evidence: f.evidence,
        curve,
    }
}

/// Run every registry instance (concurrently) and assemble the report in
/// registry order.
pub fn run_suite(schedule: &Schedule, seed: u64) -> Result<SuiteReport> {
    let schedule = schedule.validated()?;
    let instances = registry();
    let reports: Vec<(&'static str, InstanceReport)> = instances
        .par_iter()
        .map(|i| (i.id, label(i.description.clone(), (i.run)(&schedule, seed))))
        .collect();
    let mut entries = Vec::with_capacity(REGISTRY.len());
    for id in REGISTRY {
        let inst: Vec<InstanceReport> = reports.iter().filter(|(k, _)| *k == id).map(|(_, r)| r.clone()).collect();
        let status = if inst.iter().any(|r| r.status == Status::Fail) {
            Status::Fail
        } else if inst.iter().any(|r| r.status == Status::Skipped) {
            Status::Skipped
        } else {
            Status::Pass
        };
        entries.push(EntryReport {
            id: id.into(),
            statement: statement(id).into(),
            status,
            instances: inst,
        });
    }
    let count = |s: Status| reports.iter().filter(|(_, r)| r.status == s).count();
    Ok(SuiteReport {
        passed: count(Status::Pass),
        failed: count(Status::Fail),
        skipped: count(Status::Skipped),
        entries,
    })
}

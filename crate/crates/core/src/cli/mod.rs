//! Command surface of the `dwpap` binary.
//!
//! Every command produces a [`Report`]: a JSON envelope
//! `{command, inputs, schedule, results, version}` plus CSV sidecars for
//! the curves behind each verdict. Exit codes: 0 for completed analyses
//! (whatever the verdict), 2 for input errors, 3 for engine failures.

pub mod funcspec;
mod output;
pub mod suite;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use crate::apfun::{bohr_transform, SpectralLine, SpectrumSet, TransformEstimate};
use crate::ergodic::{dw_mean, dw_mean_trig, membership_pap0, theta, KappaParam, Schedule};
use crate::error::{Error, Result};
use crate::transforms::{
    check_hhh, composition_check, conv_membership, convolve_grid, translation_invariance_check,
    uniqueness_precondition, Kernel, TwoVarFunction,
};
use crate::weight_dsl::{classify_polynomial, DEFAULT_MAX_DEGREE};
use crate::weights::{check_v, check_w, check_winv, check_ws, ProbeConfig, Weight};

pub use funcspec::{parse_number_list, parse_trig, FunctionSpec};
pub use output::{Envelope, Format, Report, Sidecar};
pub use suite::{run_suite, Status, SuiteReport};

#[derive(Parser, Debug, Clone)]
#[command(name = "dwpap", version, about = "Weight classes, weighted ergodic means and Bohr spectra")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// Weight mu (denominator), e.g. "exp(abs(x))".
    #[arg(long, global = true)]
    pub mu: Option<String>,
    /// Weight nu (integrand), e.g. "1+abs(x)".
    #[arg(long, global = true)]
    pub nu: Option<String>,
    /// Function: "c + a cos(l*t) + b sin(l*t)", a name such as inv_quad,
    /// either joined with '@', or trig-poly JSON.
    #[arg(long = "f", global = true)]
    pub f: Option<String>,
    #[arg(long, global = true)]
    pub kappa: Option<f64>,
    #[arg(long = "T0", global = true)]
    pub t0: Option<f64>,
    #[arg(long, global = true)]
    pub ratio: Option<f64>,
    /// Number of schedule points.
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    #[arg(long, global = true)]
    pub window: Option<usize>,
    /// Quadrature tolerance (also used for convolution).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Relative spread accepted over the last window.
    #[arg(long, global = true)]
    pub spread_tol: Option<f64>,
    /// Magnitude below which a limit counts as zero.
    #[arg(long, global = true)]
    pub zero_tol: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    /// Output file; curve sidecars are written beside it.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 0, global = true)]
    pub seed: u64,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Weight-class membership and polynomial classification.
    Classify {
        /// Weight text; defaults to --mu.
        weight: Option<String>,
    },
    /// Doubly-weighted mean of --f.
    Dwmean,
    /// Limit of nu(Q_T)/mu(Q_T) with the supremum and infimum conditions.
    Theta,
    /// Bohr transform scan of --f.
    Spectrum {
        /// Comma-separated frequencies.
        #[arg(long, default_value = "0,1")]
        grid: String,
        #[arg(long, default_value_t = 1e-3)]
        threshold: f64,
    },
    /// Ergodic-space membership of --f (optionally of its translate).
    Pap0 {
        #[arg(long, allow_hyphen_values = true)]
        shift: Option<f64>,
    },
    /// Convolution of --f with a kernel.
    Convolve {
        /// gauss(sigma), laplace(a) or box(R).
        #[arg(long, default_value = "laplace(1)")]
        kernel: String,
        /// Kernel L1 mass.
        #[arg(long, default_value_t = 1.0)]
        mass: f64,
        /// Comma-separated evaluation points.
        #[arg(long = "t", default_value = "0", allow_hyphen_values = true)]
        t: String,
        /// Also decide membership of the convolution.
        #[arg(long)]
        membership: bool,
    },
    /// Lipschitz composition check.
    ComposeCheck {
        /// Two-variable function: sin_u_cos_t or affine_exp.
        #[arg(long = "F", default_value = "sin_u_cos_t")]
        function: String,
        /// Almost periodic part (trig syntax).
        #[arg(long, default_value = "cos(1*t)")]
        h1: String,
        /// Ergodic part (function spec).
        #[arg(long, default_value = "inv_quad")]
        h2: String,
    },
    /// Run the registry of class, mean and transform instances.
    VerifySuite,
}

/// Resolved options shared by every command.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub schedule: Schedule,
    pub mu: String,
    pub nu: String,
    pub f: Option<String>,
    pub kappa: Option<f64>,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub seed: u64,
}

impl RunConfig {
    pub fn from_args(a: &CommonArgs) -> Result<Self> {
        let d = Schedule::default();
        let schedule = Schedule {
            t0: a.t0.unwrap_or(d.t0),
            ratio: a.ratio.unwrap_or(d.ratio),
            count: a.steps.unwrap_or(d.count),
            window: a.window.unwrap_or(d.window),
            quad_tol: a.tol.unwrap_or(d.quad_tol),
            spread_tol: a.spread_tol.unwrap_or(d.spread_tol),
            zero_threshold: a.zero_tol.unwrap_or(d.zero_threshold),
        }
        .validated()?;
        if let Some(k) = a.kappa {
            KappaParam::new(k)?;
        }
        Ok(RunConfig {
            schedule,
            mu: a.mu.clone().unwrap_or_else(|| "1".into()),
            nu: a.nu.clone().unwrap_or_else(|| "1".into()),
            f: a.f.clone(),
            kappa: a.kappa,
            format: a.format,
            out: a.out.clone(),
            seed: a.seed,
        })
    }

    fn weights(&self) -> Result<(Weight, Weight)> {
        Ok((Weight::parse(&self.mu)?, Weight::parse(&self.nu)?))
    }

    fn function(&self) -> Result<FunctionSpec> {
        let text = self
            .f
            .as_deref()
            .ok_or_else(|| Error::FunctionSpec("this command needs --f".into()))?;
        FunctionSpec::parse(text)
    }

    fn kappa(&self) -> Result<Option<KappaParam>> {
        self.kappa.map(KappaParam::new).transpose()
    }

    fn report(&self, command: &str, results: &impl Serialize) -> Result<Report> {
        Report::new(command, self.schedule, results)
    }
}

/// 2 for input errors, 3 for engine failures.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Syntax { .. }
        | Error::DegreeOverflow { .. }
        | Error::DimensionMismatch { .. }
        | Error::InvalidParameter(_)
        | Error::LipschitzViolation { .. }
        | Error::FunctionSpec(_)
        | Error::Json(_) => 2,
        Error::Quadrature { .. } | Error::Divergent { .. } | Error::TruncationUnreachable { .. } | Error::Io(_) => 3,
    }
}

#[derive(Serialize)]
struct ClassifyResults {
    polynomial: crate::weight_dsl::PolyClassification,
    #[serde(rename = "W")]
    w: crate::weights::ClassReport,
    #[serde(rename = "V")]
    v: crate::weights::ClassReport,
    #[serde(rename = "WInv")]
    winv: crate::weights::ClassReport,
    #[serde(rename = "Ws")]
    ws: crate::weights::ClassReport,
}

fn cmd_classify(cfg: &RunConfig, text: &str) -> Result<Report> {
    let weight = Weight::parse(text)?;
    let probes = ProbeConfig {
        schedule: cfg.schedule,
        ..ProbeConfig::default()
    };
    let r = ClassifyResults {
        polynomial: classify_polynomial(weight.expr(), DEFAULT_MAX_DEGREE)?,
        w: check_w(&weight, &probes)?,
        v: check_v(&weight, &probes)?,
        winv: check_winv(&weight, &probes.taus, &probes)?,
        ws: check_ws(&weight, &probes.taus, &probes)?,
    };
    let poly = match (&r.polynomial.is_polynomial, &r.polynomial.rejection) {
        (false, _) => "not a polynomial".to_string(),
        (true, None) => format!("weight of degree {} ({} factors)", r.polynomial.degree, r.polynomial.factors.len()),
        (true, Some(reason)) => format!("rejected: {reason:?}"),
    };
    let mut rep = cfg.report("classify", &r)?.input("weight", text)?.row("weight", text).row("polynomial", poly);
    for c in [&r.w, &r.v, &r.winv, &r.ws] {
        rep = rep.row(&format!("{:?}", c.class), format!("{:?}", c.verdict));
    }
    Ok(rep)
}

fn cmd_dwmean(cfg: &RunConfig) -> Result<Report> {
    let spec = cfg.function()?;
    let (mu, nu) = cfg.weights()?;
    let r = match spec.trig() {
        Some(p) => dw_mean_trig(p, &mu, &nu, &cfg.schedule)?,
        None => dw_mean(&spec.handle()?, &mu, &nu, &cfg.schedule)?,
    };
    let value: Vec<String> = r.value.iter().map(|z| format!("{}{:+}i", z.re, z.im)).collect();
    Ok(cfg
        .report("dwmean", &r)?
        .input("f", &spec.text)?
        .input("mu", &cfg.mu)?
        .input("nu", &cfg.nu)?
        .sidecar("mean", r.curve.to_csv())
        .row("value", value.join(", "))
        .row("verdict", format!("{:?}", r.verdict.kind))
        .row("theta", fmt_opt(r.theta))
        .row("residual", fmt_opt(r.residual)))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or("-".into(), |x| x.to_string())
}

fn cmd_theta(cfg: &RunConfig) -> Result<Report> {
    let (mu, nu) = cfg.weights()?;
    #[derive(Serialize)]
    struct ThetaResults {
        theta: crate::ergodic::ThetaResult,
        sup: crate::transforms::RatioBound,
        inf: crate::transforms::RatioBound,
    }
    let r = ThetaResults {
        theta: theta(&mu, &nu, &cfg.schedule)?,
        sup: check_hhh(&mu, &nu, &cfg.schedule)?,
        inf: uniqueness_precondition(&mu, &nu, &cfg.schedule, cfg.kappa()?)?,
    };
    Ok(cfg
        .report("theta", &r)?
        .input("mu", &cfg.mu)?
        .input("nu", &cfg.nu)?
        .input("kappa", cfg.kappa)?
        .sidecar("theta", r.theta.to_csv())
        .row("theta", fmt_opt(r.theta.value))
        .row("verdict", format!("{:?}", r.theta.verdict.kind))
        .row("sup", format!("{} ({:?})", r.sup.estimate, r.sup.outcome))
        .row("inf", format!("{} ({:?})", r.inf.estimate, r.inf.outcome)))
}

fn cmd_spectrum(cfg: &RunConfig, grid: &str, threshold: f64) -> Result<Report> {
    let spec = cfg.function()?;
    let grid = parse_number_list(grid)?;
    let f = spec.handle()?;
    let estimates: Vec<TransformEstimate> = grid
        .par_iter()
        .map(|&l| bohr_transform(&f, l, &cfg.schedule))
        .collect::<Result<_>>()?;
    #[derive(Serialize)]
    struct SpectrumResults {
        numeric: SpectrumSet,
        exact: Option<SpectrumSet>,
        transforms: Vec<TransformEstimate>,
    }
    let lines = estimates
        .iter()
        .map(|e| SpectralLine {
            lambda: e.lambda,
            magnitude: crate::ergodic::norm_of(&e.value),
            coeff: e.value.clone(),
        })
        .filter(|l| l.magnitude > threshold)
        .collect();
    let r = SpectrumResults {
        numeric: SpectrumSet { threshold, lines },
        exact: spec.trig().map(|p| p.spectrum(&grid, threshold)),
        transforms: estimates,
    };
    let mut rep = cfg
        .report("spectrum", &r)?
        .input("f", &spec.text)?
        .input("grid", &grid)?
        .input("threshold", threshold)?;
    for (i, e) in r.transforms.iter().enumerate() {
        rep = rep
            .sidecar(&format!("lambda{i}"), e.curve.to_csv())
            .row(&format!("a({})", e.lambda), format!("{:.6}", e.value[0]));
    }
    Ok(rep)
}

fn cmd_pap0(cfg: &RunConfig, shift: Option<f64>) -> Result<Report> {
    let spec = cfg.function()?;
    let (mu, nu) = cfg.weights()?;
    let f = spec.handle()?;
    let rep = if let Some(s) = shift {
        let c = translation_invariance_check(&f, s, &mu, &nu, &cfg.schedule)?;
        cfg.report("pap0", &c)?
            .input("shift", s)?
            .sidecar("shifted", c.curve.to_csv())
            .sidecar("original", c.original.to_csv())
            .row("member", c.member)
            .row("original_member", c.original_member)
            .row("hypotheses", c.hypotheses.hold)
    } else {
        let c = membership_pap0(&f, &mu, &nu, &cfg.schedule, cfg.kappa()?)?;
        #[derive(Serialize)]
        struct Membership {
            member: bool,
            curve: crate::ergodic::ErgodicCurve,
        }
        let r = Membership {
            member: c.is_member(),
            curve: c,
        };
        cfg.report("pap0", &r)?
            .input("kappa", cfg.kappa)?
            .sidecar("curve", r.curve.to_csv())
            .row("member", r.member)
            .row("verdict", format!("{:?}", r.curve.verdict.kind))
            .row("final", r.curve.final_norm())
    };
    rep.input("f", &spec.text)?.input("mu", &cfg.mu)?.input("nu", &cfg.nu)
}

fn cmd_convolve(cfg: &RunConfig, kernel: &str, mass: f64, ts: &str, membership: bool) -> Result<Report> {
    let spec = cfg.function()?;
    let g = Kernel::parse(kernel, mass)?;
    let ts = parse_number_list(ts)?;
    let f = spec.handle()?;
    let values = convolve_grid(&f, &g, &ts, cfg.schedule.quad_tol)?;
    #[derive(Serialize)]
    struct Point {
        t: f64,
        value: Vec<num_complex::Complex64>,
        exact: Option<Vec<num_complex::Complex64>>,
    }
    #[derive(Serialize)]
    struct ConvolveResults {
        kernel: String,
        mass: f64,
        points: Vec<Point>,
        membership: Option<crate::transforms::ConvMembership>,
    }
    let exact = spec
        .trig()
        .filter(|_| g.fourier(0.0).is_some())
        .map(|p| p.multiply_spectrum(|l| g.fourier(l).expect("closed-form kernel")));
    let points: Vec<Point> = ts
        .iter()
        .zip(values)
        .map(|(&t, value)| Point {
            t,
            value,
            exact: exact.as_ref().map(|q| q.eval(t)),
        })
        .collect();
    let m = if membership {
        let (mu, nu) = cfg.weights()?;
        Some(conv_membership(&f, &g, &mu, &nu, &cfg.schedule)?)
    } else {
        None
    };
    let mut csv = String::from("t,value_re,value_im\n");
    for p in &points {
        csv.push_str(&format!("{},{},{}\n", p.t, p.value[0].re, p.value[0].im));
    }
    let r = ConvolveResults {
        kernel: g.name().into(),
        mass,
        points,
        membership: m,
    };
    let mut rep = cfg
        .report("convolve", &r)?
        .input("f", &spec.text)?
        .input("kernel", kernel)?
        .input("t", &ts)?
        .sidecar("convolution", csv);
    for p in &r.points {
        rep = rep.row(&format!("(f*g)({})", p.t), format!("{:.9}", p.value[0]));
    }
    if let Some(m) = &r.membership {
        rep = rep
            .input("mu", &cfg.mu)?
            .input("nu", &cfg.nu)?
            .sidecar("membership", m.curve.to_csv())
            .row("member", m.member)
            .row("hypotheses", m.hypotheses.hold);
    }
    Ok(rep)
}

fn cmd_compose(cfg: &RunConfig, function: &str, h1: &str, h2: &str) -> Result<Report> {
    let f = TwoVarFunction::catalog(function)?;
    let p = parse_trig(h1)?;
    let h2s = FunctionSpec::parse(h2)?;
    let (mu, nu) = cfg.weights()?;
    let r = composition_check(&f, &p, &h2s.handle()?, &mu, &nu, &cfg.schedule, cfg.seed)?;
    Ok(cfg
        .report("compose-check", &r)?
        .input("F", function)?
        .input("h1", h1)?
        .input("h2", h2)?
        .input("mu", &cfg.mu)?
        .input("nu", &cfg.nu)?
        .input("seed", cfg.seed)?
        .sidecar("remainder", r.remainder.to_csv())
        .sidecar("h2", r.h2_curve.to_csv())
        .sidecar("phi", r.phi_curve.to_csv())
        .row("member", r.member)
        .row("bound", r.bound)
        .row("slack", r.slack)
        .row("bound_holds", r.bound_holds)
        .row("uniqueness", format!("{:?}", r.uniqueness.outcome)))
}

fn cmd_verify_suite(cfg: &RunConfig) -> Result<Report> {
    let r = run_suite(&cfg.schedule, cfg.seed)?;
    let mut rep = cfg
        .report("verify-suite", &r)?
        .input("seed", cfg.seed)?
        .row("passed", r.passed)
        .row("failed", r.failed)
        .row("skipped", r.skipped);
    for e in &r.entries {
        rep = rep.row(&e.id, format!("{:?}", e.status));
    }
    Ok(rep)
}

/// Run a parsed command.
pub fn execute(cli: &Cli) -> Result<Report> {
    let cfg = RunConfig::from_args(&cli.common)?;
    let rep = match &cli.command {
        Command::Classify { weight } => {
            let text = weight
                .as_deref()
                .or(cli.common.mu.as_deref())
                .ok_or_else(|| Error::InvalidParameter("classify needs a weight".into()))?;
            cmd_classify(&cfg, text)?
        }
        Command::Dwmean => cmd_dwmean(&cfg)?,
        Command::Theta => cmd_theta(&cfg)?,
        Command::Spectrum { grid, threshold } => cmd_spectrum(&cfg, grid, *threshold)?,
        Command::Pap0 { shift } => cmd_pap0(&cfg, *shift)?,
        Command::Convolve {
            kernel,
            mass,
            t,
            membership,
        } => cmd_convolve(&cfg, kernel, *mass, t, *membership)?,
        Command::ComposeCheck { function, h1, h2 } => cmd_compose(&cfg, function, h1, h2)?,
        Command::VerifySuite => cmd_verify_suite(&cfg)?,
    };
    Ok(rep)
}

/// Parse, run and emit; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = execute(&cli).and_then(|rep| rep.emit(cli.common.format, cli.common.out.as_deref()));
    match result {
        Ok(_) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

//! Acceptance checks. Runs without the libtest harness so every criterion
//! prints exactly one PASS/FAIL line; exits non-zero if any fails.

use std::f64::consts::{PI, SQRT_2};
use std::time::Instant;

use dwpap::apfun::{bohr_transform, linspace, FunctionHandle, TrigPoly, TrigTerm};
use dwpap::ergodic::{dw_mean, dw_mean_trig, ergodic_curve, theta, KappaParam, Mode, Schedule};
use dwpap::transforms::{composition_check, conv_membership, convolve_grid, decomposition_recovery, Kernel, TwoVarFunction};
use dwpap::weight_dsl::{classify_polynomial, parse_weight, RejectionReason, DEFAULT_MAX_DEGREE};
use dwpap::weights::{check_winv, check_ws, combine_product, combine_sum, equivalent, ProbeConfig, Weight, CATALOG};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn inv_quad() -> FunctionHandle {
    FunctionHandle::scalar(|t| 1.0 / (1.0 + t * t)).with_sup_bound(1.0)
}

fn worked_example() -> Outcome {
    let start = Instant::now();
    let s = Schedule::default();
    let mu = Weight::parse("exp(abs(x))").map_err(|e| e.to_string())?;
    let nu = Weight::parse("1+abs(x)").map_err(|e| e.to_string())?;
    let f = TrigPoly::real(1.0, &[(1.0, 1.0)], &[(1.0, SQRT_2)]);
    let th = theta(&mu, &nu, &s).map_err(|e| e.to_string())?;
    let th_val = th.value.unwrap_or(f64::NAN);
    let m = dw_mean(&f.to_handle(), &mu, &nu, &s).map_err(|e| e.to_string())?;
    let m_norm = m.value[0].norm();
    let mut worst = 0.0f64;
    for t in s.times() {
        let exact = std::f64::consts::LN_2 + t + (-(-t).exp()).ln_1p();
        let got = mu.ln_mu_qt(t).map_err(|e| e.to_string())?;
        worst = worst.max((got - exact).exp_m1().abs());
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(
        th_val.abs() <= 1e-3 && m_norm <= 1e-3 && worst <= 1e-8 && secs < 5.0,
        format!("theta {th_val:.2e}, |M| {m_norm:.2e}, normalizer rel err {worst:.1e}, {secs:.2}s"),
    )
}

fn random_poly(rng: &mut ChaCha8Rng) -> TrigPoly {
    let n = rng.gen_range(1..=6);
    let mut terms = vec![TrigTerm {
        coeff: vec![Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))],
        lambda: 0.0,
    }];
    for _ in 1..n {
        let mag = rng.gen_range(0.5..5.0);
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        terms.push(TrigTerm {
            coeff: vec![Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))],
            lambda: sign * mag,
        });
    }
    TrigPoly::new(1, terms).expect("valid poly")
}

fn mean_theorem() -> Outcome {
    let start = Instant::now();
    let s = Schedule::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let pairs = [("1", "1"), ("1+x^2", "2+x^2")];
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let p = random_poly(&mut rng);
        for (mu, nu) in pairs {
            let (mu, nu) = (Weight::parse(mu).unwrap(), Weight::parse(nu).unwrap());
            let r = dw_mean_trig(&p, &mu, &nu, &s).map_err(|e| e.to_string())?;
            worst = worst.max(r.residual.unwrap_or(f64::INFINITY));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(worst <= 5e-3 && secs < 30.0, format!("max residual {worst:.2e} over 20 runs, {secs:.1}s"))
}

fn bohr_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let p = random_poly(&mut rng);
        for t in p.terms() {
            if p.bohr_transform(t.lambda) != t.coeff {
                return Err(format!("coefficient at {} not recovered", t.lambda));
            }
        }
    }
    let p = TrigPoly::real(1.0, &[(1.0, 1.0)], &[(1.0, SQRT_2)]);
    let s = Schedule::default();
    let mut slowest = f64::INFINITY;
    for lambda in [0.5, 2.0, 3.7] {
        let est = bohr_transform(&p.to_handle(), lambda, &s).map_err(|e| e.to_string())?;
        slowest = slowest.min(est.curve.verdict.decay_exponent);
    }
    ensure(
        -slowest <= -0.8,
        format!("stored coefficients exact; off-spectrum exponent {:.3}", -slowest),
    )
}

fn irreducible(rng: &mut ChaCha8Rng) -> (i64, i64) {
    loop {
        let (a, b) = (rng.gen_range(-6..=6), rng.gen_range(1..=40));
        if a * a < 4 * b {
            return (a, b);
        }
    }
}

fn quad_text(factors: &[(i64, i64)]) -> String {
    factors.iter().map(|(a, b)| format!("*(x^2 + ({a})*x + {b})")).collect()
}

fn polynomial_theorem() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..200 {
        let mut fs: Vec<(i64, i64)> = (0..rng.gen_range(1..=4)).map(|_| irreducible(&mut rng)).collect();
        fs.sort();
        fs.dedup();
        let text = format!("{}{}", rng.gen_range(1..=5), quad_text(&fs));
        let c = classify_polynomial(&parse_weight(&text).unwrap(), DEFAULT_MAX_DEGREE).map_err(|e| e.to_string())?;
        if !c.is_weight || c.degree != 2 * fs.len() || c.factors.len() != fs.len() {
            return Err(format!("misclassified {text}"));
        }
    }
    for k in 0..200 {
        let fs: Vec<(i64, i64)> = (0..rng.gen_range(0..=2)).map(|_| irreducible(&mut rng)).collect();
        let r = rng.gen_range(-5..=5);
        let (text, want) = if k % 2 == 0 {
            (format!("(x + ({r})){}", quad_text(&fs)), RejectionReason::OddDegree)
        } else {
            (format!("(x + ({r}))^2{}", quad_text(&fs)), RejectionReason::RealRoot)
        };
        let c = classify_polynomial(&parse_weight(&text).unwrap(), DEFAULT_MAX_DEGREE).map_err(|e| e.to_string())?;
        if c.is_weight || c.rejection != Some(want) {
            return Err(format!("{text}: got {:?}", c.rejection));
        }
    }
    Ok("200 weights factored, 200 rejections with the right reason".into())
}

fn instance_suite() -> Outcome {
    let cfg = ProbeConfig::default();
    let taus = cfg.taus.clone();
    let ws: Vec<Weight> = CATALOG
        .iter()
        .map(|t| Weight::parse(t).unwrap())
        .filter(|w| check_ws(w, &taus, &cfg).map(|r| r.is_member()).unwrap_or(false))
        .collect();
    let mut failures = Vec::new();
    let mut checks = 0;
    for w in &ws {
        checks += 1;
        if !check_winv(w, &taus, &cfg).map(|r| r.is_member()).unwrap_or(false) {
            failures.push(format!("{} not in WInv", w.expr()));
        }
    }
    for (i, a) in ws.iter().enumerate() {
        for b in &ws[i..] {
            let p = combine_product(a, b);
            checks += 1;
            if !check_ws(&p, &taus, &cfg).map(|r| r.is_member()).unwrap_or(false) {
                failures.push(format!("{} not in Ws", p.expr()));
            }
            if equivalent(a, b, &cfg).map(|r| r.is_member()).unwrap_or(false) {
                let s = combine_sum(a, b);
                checks += 1;
                if !check_winv(&s, &taus, &cfg).map(|r| r.is_member()).unwrap_or(false) {
                    failures.push(format!("{} not in WInv", s.expr()));
                }
            }
        }
    }
    ensure(
        failures.is_empty(),
        format!("{} Ws catalog weights, {checks} checks, failures: {failures:?}", ws.len()),
    )
}

fn pap0_oracle() -> Outcome {
    let s = Schedule::default();
    let one = Weight::one();
    let f = inv_quad();
    let c = ergodic_curve(&f, &one, &one, &s, Mode::Norm, None).map_err(|e| e.to_string())?;
    let e1 = c.points.iter().map(|p| (p.r[0].re - p.t.atan() / p.t).abs()).fold(0.0, f64::max);
    let k = KappaParam::new(0.5).unwrap();
    let c = ergodic_curve(&f, &one, &one, &s, Mode::Norm, Some(k)).map_err(|e| e.to_string())?;
    let e2 = c
        .points
        .iter()
        .map(|p| (p.r[0].re - 2.0 * p.t.atan() / (2.0 * p.t).sqrt()).abs())
        .fold(0.0, f64::max);
    ensure(e1 <= 1e-6 && e2 <= 1e-6, format!("max error {e1:.1e} (kappa 1), {e2:.1e} (kappa 1/2)"))
}

fn convolution_oracle() -> Outcome {
    let cos = TrigPoly::real(0.0, &[(1.0, 1.0)], &[]).to_handle();
    let grid = linspace(-20.0, 20.0, 20);
    let k = Kernel::laplace(1.0, 1.0).map_err(|e| e.to_string())?;
    let vals = convolve_grid(&cos, &k, &grid, 1e-9).map_err(|e| e.to_string())?;
    let err = grid
        .iter()
        .zip(&vals)
        .map(|(t, v)| (v[0] - Complex64::new(t.cos() / 2.0, 0.0)).norm())
        .fold(0.0, f64::max);
    let one = Weight::one();
    let g = Kernel::gauss(1.0, 1.0).map_err(|e| e.to_string())?;
    let m = conv_membership(&inv_quad(), &g, &one, &one, &Schedule::default()).map_err(|e| e.to_string())?;
    ensure(
        err <= 1e-6 && m.member,
        format!("max error {err:.1e}; gauss(1) * 1/(1+t^2) member: {}", m.member),
    )
}

fn decomposition() -> Outcome {
    let s = Schedule::default();
    let p = TrigPoly::real(2.0, &[(3.0, 1.0)], &[]);
    let phi = inv_quad();
    let f = p.to_handle().add(&phi).map_err(|e| e.to_string())?;
    let d = decomposition_recovery(&f, Some(&phi), &[0.0, 1.0], 0.1, &s).map_err(|e| e.to_string())?;
    let get = |l: f64| d.spectrum.coefficient(l).map(|c| c[0]);
    let (Some(c0), Some(c1)) = (get(0.0), get(1.0)) else {
        return Err("spectrum scan missed a line".into());
    };
    let (e0, e1) = ((c0.re - 2.0).abs(), (c1.re - 1.5).abs());
    let bound = PI / (2.0 * s.t_max());
    let phi_bound = d.error_bound.unwrap_or(f64::INFINITY);
    ensure(
        e0 <= 5e-3 && e1 <= 5e-3 && phi_bound <= bound && d.phi_member == Some(true),
        format!("errors {e0:.1e}, {e1:.1e}; ergodic-part bound {phi_bound:.2e} <= pi/(2T_max) {bound:.2e}"),
    )
}

fn composition() -> Outcome {
    let s = Schedule::default();
    let one = Weight::one();
    let cos = TrigPoly::real(0.0, &[(1.0, 1.0)], &[]);
    let sin = TrigPoly::real(0.0, &[], &[(1.0, 1.0)]);
    let a = TwoVarFunction::catalog("sin_u_cos_t").map_err(|e| e.to_string())?;
    let b = TwoVarFunction::catalog("affine_exp").map_err(|e| e.to_string())?;
    let cases = [(&a, &cos, inv_quad()), (&a, &cos, FunctionHandle::zero(1)), (&b, &sin, inv_quad())];
    let mut slacks = Vec::new();
    for (f, h1, h2) in cases {
        let r = composition_check(f, h1, &h2, &one, &one, &s, 7).map_err(|e| e.to_string())?;
        if !r.bound_holds {
            return Err(format!("{} bound violated", f.name()));
        }
        slacks.push(r.slack);
    }
    ensure(slacks.iter().all(|&x| x <= 1.1), format!("slack factors {slacks:.3?}"))
}

fn determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("dwpap-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for i in 0..2 {
        let path = dir.join(format!("suite{i}.json"));
        let code = dwpap::cli::run(["dwpap", "--seed", "11", "--out", path.to_str().unwrap(), "verify-suite"]);
        if code != 0 {
            return Err(format!("verify-suite exited with {code}"));
        }
        outputs.push(std::fs::read(&path).map_err(|e| e.to_string())?);
    }
    let _ = std::fs::remove_dir_all(&dir);
    ensure(outputs[0] == outputs[1], format!("two runs, {} bytes each, identical: {}", outputs[0].len(), outputs[0] == outputs[1]))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("worked example", worked_example),
        ("mean theorem", mean_theorem),
        ("Bohr exactness", bohr_exactness),
        ("polynomial weights", polynomial_theorem),
        ("class instance suite", instance_suite),
        ("ergodic oracle", pap0_oracle),
        ("convolution oracle", convolution_oracle),
        ("decomposition recovery", decomposition),
        ("composition bound", composition),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {detail}", i + 1);
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

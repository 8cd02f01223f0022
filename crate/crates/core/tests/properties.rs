use dwpap::apfun::{linspace, TrigPoly, TrigTerm};
use dwpap::ergodic::{dw_mean, ergodic_curve, weighted_integral, KappaParam, LimitKind, Mode, Schedule};
use dwpap::transforms::{convolve, Kernel};
use dwpap::weight_dsl::{classify_polynomial, exact_cumulative, parse_weight, Decimal, WeightExpr, DEFAULT_MAX_DEGREE};
use dwpap::weights::{Weight, CATALOG};
use dwpap::apfun::FunctionHandle;
use num_complex::Complex64;
use proptest::prelude::*;

fn leaf() -> impl Strategy<Value = WeightExpr> {
    prop_oneof![
        Just(WeightExpr::X),
        (-999i64..1000, 0u32..4).prop_map(|(m, s)| WeightExpr::Const(Decimal::new(m, s))),
    ]
}

fn tree() -> impl Strategy<Value = WeightExpr> {
    // Each recursion level adds one to the depth; six levels at most.
    leaf().prop_recursive(5, 48, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(WeightExpr::abs),
            inner.clone().prop_map(WeightExpr::exp),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| WeightExpr::sum(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| WeightExpr::product(a, b)),
            (inner, 0u32..5).prop_map(|(a, n)| WeightExpr::pow(a, n)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn print_then_parse_round_trips(e in tree()) {
        prop_assert!(e.depth() <= 6);
        let text = e.to_string();
        let back = parse_weight(&text).map_err(|err| TestCaseError::fail(format!("{text}: {err}")))?;
        prop_assert_eq!(back, e, "{}", text);
    }
}

/// Monic irreducible quadratics `x^2 + a x + b` with `a^2 < 4b`.
fn quadratic() -> impl Strategy<Value = (i64, i64)> {
    (-6i64..=6, 1i64..=40).prop_filter("irreducible", |(a, b)| a * a < 4 * b)
}

fn product_text(lead: i64, factors: &[(i64, i64)]) -> String {
    let mut s = format!("{lead}");
    for (a, b) in factors {
        s.push_str(&format!("*(x^2 + ({a})*x + {b})"));
    }
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn polynomial_weights_reconstruct_and_stay_positive(
        lead in 1i64..5,
        factors in prop::collection::vec(quadratic(), 1..4),
    ) {
        let text = product_text(lead, &factors);
        let e = parse_weight(&text).unwrap();
        let c = classify_polynomial(&e, DEFAULT_MAX_DEGREE).unwrap();
        prop_assert!(c.is_weight, "{}", text);
        prop_assert_eq!(c.degree, 2 * factors.len());
        let m: u32 = c.factors.iter().map(|f| f.multiplicity).sum();
        prop_assert_eq!(2 * m as usize, c.degree);
        for f in &c.factors {
            prop_assert!(f.a * f.a - 4.0 * f.b < 0.0);
        }
        for x in linspace(-10.0, 10.0, 32) {
            let want = e.eval(x);
            prop_assert!((c.reconstruct(x) - want).abs() <= 1e-9 * want.abs());
        }
        let min = linspace(-100.0, 100.0, 20001).into_iter().map(|x| e.eval(x)).fold(f64::INFINITY, f64::min);
        prop_assert!(min > 0.0);
    }

    #[test]
    fn closed_cumulative_matches_quadrature(c0 in 1u32..20, c1 in 0u32..20, c2 in 0u32..20, k in 0u32..3) {
        let text = format!("{c0} + {c1}*abs(x) + {c2}*x^2 + exp({k}*abs(x))");
        let closed = Weight::parse(&text).unwrap();
        prop_assert!(exact_cumulative(closed.expr()).is_closed());
        let numeric = Weight::parse(&text).unwrap().without_closed_form();
        for t in [1.0, 5.0, 10.0, 20.0] {
            let (a, b) = (closed.mu_qt(t).unwrap(), numeric.mu_qt(t).unwrap());
            prop_assert!((a - b).abs() <= 1e-8 * a, "{} at {}: {} vs {}", text, t, a, b);
        }
    }
}

fn trig_poly() -> impl Strategy<Value = TrigPoly> {
    prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0, -5.0f64..5.0), 1..6).prop_map(|ts| {
        let terms = ts
            .into_iter()
            .map(|(re, im, lambda)| TrigTerm {
                coeff: vec![Complex64::new(re, im)],
                lambda,
            })
            .collect();
        TrigPoly::new(1, terms).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn bohr_transform_is_linear_and_translation_covariant(
        p in trig_poly(), q in trig_poly(), a in -2.0f64..2.0, b in -2.0f64..2.0, alpha in -10.0f64..10.0,
    ) {
        let (ca, cb) = (Complex64::new(a, 0.0), Complex64::new(b, 0.0));
        let combo = p.scale(ca).add(&q.scale(cb)).unwrap();
        let shifted = p.translate(alpha);
        for lambda in p.frequencies().into_iter().chain(q.frequencies()).chain([0.0, 0.37]) {
            let lhs = combo.bohr_transform(lambda)[0];
            let rhs = ca * p.bohr_transform(lambda)[0] + cb * q.bohr_transform(lambda)[0];
            prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
            let phase = Complex64::from_polar(1.0, lambda * alpha);
            let cov = shifted.bohr_transform(lambda)[0] - phase * p.bohr_transform(lambda)[0];
            prop_assert!(cov.norm() <= 1e-12 * (1.0 + p.bohr_transform(lambda)[0].norm()));
        }
        prop_assert_eq!(p.bohr_mean(), p.bohr_transform(0.0));
    }

    #[test]
    fn stored_coefficients_are_recovered(p in trig_poly()) {
        for t in p.terms() {
            prop_assert_eq!(p.bohr_transform(t.lambda), t.coeff.clone());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn convolution_is_linear(p in trig_poly(), q in trig_poly(), a in -2.0f64..2.0, t in -20.0f64..20.0) {
        let g = Kernel::laplace(1.0, 1.0).unwrap();
        let h = Kernel::gauss(0.5, 1.0).unwrap();
        let tol = 1e-10;
        let sum = p.to_handle().add(&q.to_handle().scale(a)).unwrap();
        let lhs = convolve(&sum, &g, t, tol).unwrap()[0];
        let rhs = convolve(&p.to_handle(), &g, t, tol).unwrap()[0] + convolve(&q.to_handle(), &g, t, tol).unwrap()[0] * a;
        prop_assert!((lhs - rhs).norm() <= 1e-8);

        // Kernel side: f * (g + 2h) against f*g + 2 f*h.
        let gh = Kernel::custom(
            "g+2h",
            move |s| 0.5 * (-s.abs()).exp() + 2.0 * (-2.0 * s * s).exp() / (0.5 * (2.0 * std::f64::consts::PI).sqrt()),
            dwpap::transforms::Envelope::Exponential { amplitude: 0.5 + 2.0 / (0.5 * (2.0 * std::f64::consts::PI).sqrt()), rate: 1.0 },
            3.0,
        );
        let f = p.to_handle();
        let lhs = convolve(&f, &gh, t, tol).unwrap()[0];
        let rhs = convolve(&f, &g, t, tol).unwrap()[0] + convolve(&f, &h, t, tol).unwrap()[0] * 2.0;
        prop_assert!((lhs - rhs).norm() <= 1e-8);
    }

    #[test]
    fn convolved_polynomial_matches_fourier_multiplier(p in trig_poly()) {
        for k in [Kernel::gauss(0.8, 1.0).unwrap(), Kernel::laplace(1.5, 1.0).unwrap(), Kernel::boxcar(2.0, 1.0).unwrap()] {
            let q = p.multiply_spectrum(|l| k.fourier(l).unwrap());
            for t in linspace(-15.0, 15.0, 7) {
                let v = convolve(&p.to_handle(), &k, t, 1e-9).unwrap()[0];
                prop_assert!((v - q.eval(t)[0]).norm() <= 1e-6);
            }
        }
    }
}

/// Frequencies zero or at least 0.5 in modulus, so the finite-T bias
/// `|c| / (|lambda| T_max)` stays below the tolerance.
fn separated_poly() -> impl Strategy<Value = TrigPoly> {
    prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0, 0.5f64..5.0, any::<bool>(), any::<bool>()), 1..6).prop_map(|ts| {
        let terms = ts
            .into_iter()
            .map(|(re, im, l, neg, zero)| TrigTerm {
                coeff: vec![Complex64::new(re, im)],
                lambda: if zero { 0.0 } else if neg { -l } else { l },
            })
            .collect();
        TrigPoly::new(1, terms).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn classical_mean_matches_exact_mean(p in separated_poly()) {
        let one = Weight::one();
        let m = dw_mean(&p.to_handle(), &one, &one, &Schedule::default()).unwrap();
        prop_assert!((m.value[0] - p.bohr_mean()[0]).norm() <= 1e-3);
    }

    #[test]
    fn ergodic_part_moves_the_mean_by_at_most_its_curve(p in trig_poly(), which in 0usize..3) {
        let one = Weight::one();
        let s = Schedule::default();
        let phi = match which {
            0 => FunctionHandle::scalar(|t| 1.0 / (1.0 + t * t)),
            1 => FunctionHandle::scalar(|t| (-t.abs()).exp()).with_breaks(vec![0.0]),
            _ => FunctionHandle::scalar(|t| 2.0 / (1.0 + t.abs()).powi(2)).with_breaks(vec![0.0]),
        };
        let phi_curve = ergodic_curve(&phi, &one, &one, &s, Mode::Norm, None).unwrap();
        prop_assert!(phi_curve.is_member());
        let f = p.to_handle().add(&phi).unwrap();
        let mf = dw_mean(&f, &one, &one, &s).unwrap();
        let mp = dw_mean(&p.to_handle(), &one, &one, &s).unwrap();
        // Compare the raw curves at T_max, where the triangle inequality is exact.
        let gap = (mf.curve.final_value()[0] - mp.curve.final_value()[0]).norm();
        prop_assert!(gap <= phi_curve.final_norm() + 1e-9);
    }
}

#[test]
fn masses_increase_and_shells_add_up() {
    let s = Schedule::default();
    for text in CATALOG.iter().chain(&["exp(-x^2) + 1", "(1+abs(x))*exp(abs(x))"]) {
        let w = Weight::parse(text).unwrap();
        let ln = w.ln_mass_at(&s.times(), s.quad_tol).unwrap();
        assert!(ln.windows(2).all(|p| p[1] > p[0]), "{text}");
    }
    let f = FunctionHandle::scalar(|t| 1.0 / (1.0 + t * t)).with_breaks(vec![0.0]);
    for (text, mu) in [("1", "1"), ("1+abs(x)", "1"), ("exp(abs(x))", "exp(abs(x))")] {
        let nu = Weight::parse(text).unwrap();
        let one = Weight::parse(mu).unwrap();
        let curve = ergodic_curve(&f, &one, &nu, &s, Mode::Norm, None).unwrap();
        for p in curve.points.iter().step_by(4).filter(|p| p.t < 600.0) {
            let ln_d = one.ln_mu_qt(p.t).unwrap();
            let direct = weighted_integral(&f, &nu, p.t, Mode::Norm, 1e-12, ln_d).unwrap()[0].re;
            let incremental = p.r[0].re;
            assert!((direct - incremental).abs() <= 1e-9 * direct.max(1.0), "{text} at {}", p.t);
        }
    }
}

#[test]
fn kappa_monotonicity_on_instances() {
    let s = Schedule::default().with_count(40);
    let f = FunctionHandle::scalar(|t| 1.0 / (1.0 + t * t));
    for (mu, nu) in [("1", "1"), ("1+abs(x)", "1"), ("x^2+1", "1+abs(x)")] {
        let (mu, nu) = (Weight::parse(mu).unwrap(), Weight::parse(nu).unwrap());
        let mut seen_zero = false;
        for k in [0.3, 0.5, 0.7, 0.9] {
            let c = ergodic_curve(&f, &mu, &nu, &s, Mode::Norm, Some(KappaParam::new(k).unwrap())).unwrap();
            let zero = c.verdict.kind == LimitKind::ConvergesToZero;
            assert!(!seen_zero || zero, "kappa {k} lost convergence to zero");
            seen_zero |= zero;
        }
        assert!(seen_zero);
    }
}

//! Ergodic curves for decaying perturbations, including the kappa variant.
//!
//! `cargo run --release --example ergodic_membership`

use dwpap::apfun::FunctionHandle;
use dwpap::ergodic::{membership_pap0, KappaParam, Schedule};
use dwpap::weights::Weight;

fn main() -> dwpap::Result<()> {
    let s = Schedule::default();
    let cases = [
        ("1/(1+t^2)", FunctionHandle::scalar(|t| 1.0 / (1.0 + t * t))),
        ("1/(1+|t|)", FunctionHandle::scalar(|t| 1.0 / (1.0 + t.abs())).with_breaks(vec![0.0])),
        ("cos(t)", FunctionHandle::scalar(f64::cos).with_max_frequency(1.0)),
    ];
    let weights = [("1", "1"), ("1+abs(x)", "1+abs(x)"), ("exp(abs(x))", "1")];
    for (fname, f) in &cases {
        for (mu, nu) in weights {
            let (m, n) = (Weight::parse(mu)?, Weight::parse(nu)?);
            let c = membership_pap0(f, &m, &n, &s, None)?;
            println!(
                "{fname:<10} mu={mu:<12} nu={nu:<9} {:?} (final R {:.3e})",
                c.verdict.kind,
                c.final_norm()
            );
        }
    }

    let one = Weight::one();
    let f = &cases[0].1;
    // R = 2 atan(T) / (2T)^kappa. Small kappa stays above the zero
    // threshold at T_max, so those verdicts remain undecided.
    for k in [0.25, 0.5, 0.75] {
        let c = membership_pap0(f, &one, &one, &s, Some(KappaParam::new(k)?))?;
        println!("1/(1+t^2) kappa {k}: {:?}, final R {:.3e}", c.verdict.kind, c.final_norm());
    }
    Ok(())
}

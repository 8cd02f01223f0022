//! Translation invariance of the ergodic space and the uniqueness
//! preconditions on weight ratios.
//!
//! `cargo run --release --example translation_uniqueness`

use dwpap::apfun::FunctionHandle;
use dwpap::ergodic::{KappaParam, Schedule};
use dwpap::transforms::{check_hhh, check_jj, check_jjj, translation_invariance_check, uniqueness_precondition};
use dwpap::weights::Weight;

fn main() -> dwpap::Result<()> {
    let s = Schedule::default();
    let taus = [-2.0, 1.0, 5.0];
    for text in ["1+abs(x)", "x^2+1", "exp(abs(x))", "exp(x^2)"] {
        let mu = Weight::parse(text)?;
        let jj = check_jj(&mu, &taus, &s)?;
        let limits: Vec<String> = jj
            .per_tau
            .iter()
            .map(|r| match r.limit {
                Some(l) => format!("tau {}: {l:.4}", r.tau),
                None => format!("tau {}: {:?}", r.tau, r.kind),
            })
            .collect();
        println!("{text:<12} shift ratios {:?} [{}]", jj.outcome, limits.join(", "));
    }
    let jjj = check_jjj(&Weight::parse("1+abs(x)")?, &taus, KappaParam::new(0.5)?, &s)?;
    println!("1+abs(x) kappa 1/2 shift ratios: {:?}", jjj.outcome);

    for (mu, nu) in [("1+abs(x)", "2+abs(x)"), ("exp(abs(x))", "1+abs(x)")] {
        let (m, n) = (Weight::parse(mu)?, Weight::parse(nu)?);
        let sup = check_hhh(&m, &n, &s)?;
        let inf = uniqueness_precondition(&m, &n, &s, None)?;
        println!(
            "mu={mu}, nu={nu}: sup nu/mu {:?} ({:.4}), inf nu/mu {:?} ({:.3e})",
            sup.outcome, sup.estimate, inf.outcome, inf.estimate
        );
    }

    let phi = FunctionHandle::scalar(|t| 1.0 / (1.0 + t * t));
    let (mu, nu) = (Weight::parse("1+abs(x)")?, Weight::parse("1+abs(x)")?);
    let t = translation_invariance_check(&phi, 7.5, &mu, &nu, &s)?;
    println!(
        "1/(1+t^2) shifted by 7.5: original member {}, shifted member {}, hypotheses {}",
        t.original_member, t.member, t.hypotheses.hold
    );
    Ok(())
}

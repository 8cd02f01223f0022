//! Doubly-weighted means and the proportionality constant theta.
//!
//! `cargo run --release --example doubly_weighted_mean`

use dwpap::apfun::TrigPoly;
use dwpap::ergodic::{dw_mean_trig, theta, verify_mean_theorem, Schedule};
use dwpap::weights::Weight;

fn main() -> dwpap::Result<()> {
    let s = Schedule::default();
    let f = TrigPoly::real(1.0, &[(1.0, 1.0)], &[(1.0, 2f64.sqrt())]);

    // Exponential mu swamps the polynomial nu, so theta and the mean vanish.
    let (mu, nu) = (Weight::parse("exp(abs(x))")?, Weight::parse("1+abs(x)")?);
    let th = theta(&mu, &nu, &s)?;
    let m = dw_mean_trig(&f, &mu, &nu, &s)?;
    println!("mu=e^|x|, nu=1+|x|: theta {:?}, M(f) {:.3e}", th.value, m.value[0]);

    for (mu, nu) in [("1", "1"), ("1+x^2", "2+x^2"), ("1+abs(x)", "2+3*abs(x)")] {
        let (mu, nu) = (Weight::parse(mu)?, Weight::parse(nu)?);
        let check = verify_mean_theorem(&f, &mu, &nu, &s)?;
        match (&check.result, &check.skipped) {
            (Some(r), _) => println!(
                "mu={}, nu={}: theta {:.5}, M {:.5}, residual {:.2e}",
                mu.expr(),
                nu.expr(),
                r.theta.unwrap_or(f64::NAN),
                r.value[0].re,
                r.residual.unwrap_or(f64::NAN)
            ),
            (None, reason) => println!("mu={}, nu={}: skipped ({reason:?})", mu.expr(), nu.expr()),
        }
    }
    Ok(())
}

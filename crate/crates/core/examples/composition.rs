//! Lipschitz composition of a pseudo-almost periodic argument.
//!
//! `cargo run --release --example composition`

use dwpap::apfun::{FunctionHandle, TrigPoly};
use dwpap::ergodic::Schedule;
use dwpap::transforms::{check_lipschitz, composition_check, LipschitzProbe, TwoVarFunction};
use dwpap::weights::Weight;

fn main() -> dwpap::Result<()> {
    let s = Schedule::default();
    let one = Weight::one();
    let h2 = FunctionHandle::scalar(|t| 1.0 / (1.0 + t * t)).with_sup_bound(1.0);
    let cases = [
        ("sin_u_cos_t", TrigPoly::real(0.0, &[(1.0, 1.0)], &[])),
        ("affine_exp", TrigPoly::real(0.0, &[], &[(1.0, 1.0)])),
    ];
    for (name, h1) in cases {
        let f = TwoVarFunction::catalog(name)?;
        let r = composition_check(&f, &h1, &h2, &one, &one, &s, 7)?;
        println!(
            "{name}: L probe {:.3} <= {}, remainder member {}, R {:.3e} vs bound {:.3e} (slack {:.3})",
            r.lipschitz.max_quotient,
            f.lipschitz(),
            r.member,
            r.remainder.final_norm(),
            r.bound,
            r.slack
        );
    }

    // A claimed constant that is too small is caught with a witness.
    let bad = TwoVarFunction::new("2u", 1, 1, 1.0, |_, u| vec![2.0 * u[0]]);
    match check_lipschitz(&bad, &LipschitzProbe::default(), 7) {
        Err(e) => println!("2u with L=1: {e}"),
        Ok(r) => println!("2u with L=1 unexpectedly passed ({:.3})", r.max_quotient),
    }
    Ok(())
}

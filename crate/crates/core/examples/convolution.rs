//! Convolution with integrable kernels and membership of the result.
//!
//! `cargo run --release --example convolution`

use dwpap::apfun::{linspace, FunctionHandle, TrigPoly};
use dwpap::ergodic::Schedule;
use dwpap::transforms::{conv_membership, convolve_grid, Kernel};
use dwpap::weights::Weight;

fn main() -> dwpap::Result<()> {
    let cos = TrigPoly::real(0.0, &[(1.0, 1.0)], &[]);
    let grid = linspace(-3.0, 3.0, 7);
    for text in ["laplace(1)", "gauss(1)", "box(2)"] {
        let k = Kernel::parse(text, 1.0)?;
        let multiplier = k.fourier(1.0).map(|z| z.re).unwrap_or(f64::NAN);
        let vals = convolve_grid(&cos.to_handle(), &k, &grid, 1e-10)?;
        let err = grid
            .iter()
            .zip(&vals)
            .map(|(t, v)| (v[0].re - multiplier * t.cos()).abs())
            .fold(0.0, f64::max);
        println!("cos * {text}: multiplier {multiplier:.6}, max deviation {err:.1e}");
    }

    let f = FunctionHandle::scalar(|t| 1.0 / (1.0 + t * t)).with_sup_bound(1.0);
    let one = Weight::one();
    let m = conv_membership(&f, &Kernel::gauss(1.0, 1.0)?, &one, &one, &Schedule::default())?;
    println!(
        "1/(1+t^2) * gauss(1): member {}, hypotheses hold {}",
        m.member, m.hypotheses.hold
    );
    Ok(())
}

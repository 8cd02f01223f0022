//! Exact and numerical Bohr transforms of a trigonometric polynomial.
//!
//! `cargo run --release --example bohr_spectrum`

use dwpap::apfun::{bohr_spectrum_scan, bohr_transform, linspace, TrigPoly};
use dwpap::ergodic::Schedule;

fn main() -> dwpap::Result<()> {
    let p = TrigPoly::real(2.0, &[(3.0, 1.0)], &[(0.5, 2f64.sqrt())]);
    let exact = p.spectrum(&p.frequencies(), 1e-12);
    for line in &exact.lines {
        println!("exact   lambda {:+.5}: {:.6}", line.lambda, line.coeff[0]);
    }

    let s = Schedule::default();
    let grid: Vec<f64> = linspace(-2.0, 2.0, 9).into_iter().chain([2f64.sqrt(), -(2f64.sqrt())]).collect();
    let scan = bohr_spectrum_scan(&p.to_handle(), &grid, 1e-2, &s)?;
    for line in &scan.lines {
        println!("numeric lambda {:+.5}: {:.6}", line.lambda, line.coeff[0]);
    }

    let off = bohr_transform(&p.to_handle(), 0.5, &s)?;
    println!(
        "off-spectrum lambda 0.5: |a| {:.2e}, fitted decay exponent {:.3}",
        off.value[0].norm(),
        off.curve.verdict.decay_exponent
    );
    Ok(())
}

//! Class membership for the built-in weight catalog.
//!
//! `cargo run --example classify_weights`

use dwpap::weights::{check_v, check_w, check_winv, check_ws, equivalent, ProbeConfig, Weight, CATALOG};

fn main() -> dwpap::Result<()> {
    let cfg = ProbeConfig::default();
    println!("{:<14} {:>10} {:>10} {:>10} {:>10}", "weight", "W", "V", "WInv", "Ws");
    for text in CATALOG {
        let w = Weight::parse(text)?;
        let row = [
            check_w(&w, &cfg)?.verdict,
            check_v(&w, &cfg)?.verdict,
            check_winv(&w, &cfg.taus, &cfg)?.verdict,
            check_ws(&w, &cfg.taus, &cfg)?.verdict,
        ];
        println!(
            "{:<14} {:>10} {:>10} {:>10} {:>10}",
            text,
            format!("{:?}", row[0]),
            format!("{:?}", row[1]),
            format!("{:?}", row[2]),
            format!("{:?}", row[3])
        );
    }

    let (a, b) = (Weight::parse("1+abs(x)")?, Weight::parse("2+abs(x)")?);
    let eq = equivalent(&a, &b, &cfg)?;
    println!("\n1+abs(x) ~ 2+abs(x): {:?}", eq.verdict);
    for e in &eq.evidence {
        println!("  {} = {:.4} (probe {})", e.name, e.value, e.probe);
    }
    Ok(())
}

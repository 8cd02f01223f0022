//! Polynomial weights: parse, classify, factor into irreducible quadratics.
//!
//! `cargo run --example polynomial_weights`

use dwpap::weight_dsl::{classify_polynomial, exact_cumulative, parse_weight, DEFAULT_MAX_DEGREE};

fn main() -> dwpap::Result<()> {
    let inputs = [
        "x^2+1",
        "2*(x^2+1)^3*(x^2+x+1)",
        "x^4 + 4",
        "x^3+1",
        "x^2-2*x+1",
        "-x^2-1",
        "1+abs(x)",
    ];
    for text in inputs {
        let e = parse_weight(text)?;
        let c = classify_polynomial(&e, DEFAULT_MAX_DEGREE)?;
        if c.is_weight {
            let factors: Vec<String> = c
                .factors
                .iter()
                .map(|f| format!("(x^2 {:+.4} x {:+.4})^{}", f.a, f.b, f.multiplicity))
                .collect();
            println!("{text:<24} weight, degree {}, {} * {}", c.degree, c.leading, factors.join(" "));
        } else {
            println!("{text:<24} rejected: {:?}", c.rejection);
        }
    }

    // Closed-form cumulative mass for a mixed weight.
    let e = parse_weight("3 + abs(x) + exp(abs(x))")?;
    let cum = exact_cumulative(&e);
    println!("\nmu(Q_T) for {e}: closed form available: {}", cum.is_closed());
    Ok(())
}

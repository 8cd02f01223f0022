//! Run the theorem-instance registry and print a summary.
//!
//! `cargo run --release --example verify_suite`

use dwpap::cli::run_suite;
use dwpap::ergodic::Schedule;

fn main() -> dwpap::Result<()> {
    let report = run_suite(&Schedule::default(), 0)?;
    for e in &report.entries {
        println!("{:<12} {:?} ({} instances)", e.id, e.status, e.instances.len());
        for i in e.instances.iter().filter(|i| i.reason.is_some()) {
            println!("    {}: {}", i.description, i.reason.as_deref().unwrap_or(""));
        }
    }
    println!("passed {}, failed {}, skipped {}", report.passed, report.failed, report.skipped);
    Ok(())
}

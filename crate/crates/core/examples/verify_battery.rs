//! Runs the verification battery and prints one line per check. Pass check
//! ids or names as arguments to run a subset.

use trapscale::verify::{run_verify, VerifySettings};
use trapscale::Result;

fn main() -> Result<()> {
    let settings = VerifySettings {
        filter: std::env::args().skip(1).collect(),
        ..VerifySettings::default()
    };
    let report = run_verify(&settings)?;
    for c in &report.checks {
        println!(
            "{:<4} {:<30} {} statistic={:.4} threshold={:.4} ({:.1}s)",
            c.id,
            c.name,
            if c.pass { "PASS" } else { "FAIL" },
            c.statistic,
            c.threshold,
            c.runtime_s
        );
    }
    println!("overall: {}", if report.pass { "PASS" } else { "FAIL" });
    Ok(())
}

//! Trap depths: the empirical tail of `tau` against `x^{-alpha}` and the
//! spacing of deep traps.

use trapscale::env::TrapEnvironment;
use trapscale::Result;

fn main() -> Result<()> {
    let alpha = 0.5;
    let mut env = TrapEnvironment::new(alpha, 2024)?;
    let n = 1_000_000i64;
    let taus: Vec<f64> = (0..n).map(|z| env.tau_at(z)).collect();

    println!("{:>8} {:>12} {:>12}", "x", "P{tau>x}", "x^-alpha");
    for x in [2.0f64, 10.0, 100.0, 1e3, 1e4] {
        let freq = taus.iter().filter(|&&t| t > x).count() as f64 / n as f64;
        println!("{x:>8} {freq:>12.6} {:>12.6}", x.powf(-alpha));
    }

    let threshold = 1e4;
    let deep = env.deep_trap_positions(threshold, n - 1);
    let mean_gap = (deep[deep.len() - 1] - deep[1]) as f64 / (deep.len() - 2) as f64;
    println!(
        "\n{} sites deeper than {threshold}; mean gap {mean_gap:.1} (expected {:.1})",
        deep.len() - 1,
        threshold.powf(alpha)
    );
    Ok(())
}

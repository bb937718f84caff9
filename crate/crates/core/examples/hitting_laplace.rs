//! Hitting times: `E exp(-lambda T_x / N)` at `x = a mu^alpha N^{alpha(1-beta)} / Gamma(1+alpha)`
//! against `exp(-a lambda^alpha Gamma(1-alpha))`, and the embedded-walk identities.

use trapscale::ageing::Ensemble;
use trapscale::limits::gamma;
use trapscale::rng::{substream, Purpose, Runner};
use trapscale::stats::{empirical_laplace, EmpiricalDistribution};
use trapscale::walk::{
    embedded_walk_dips_below, hitting_time, min_walk_probability, WalkParams, DEFAULT_STEP_BUDGET,
};
use trapscale::Result;

fn main() -> Result<()> {
    let (alpha, beta, mu, a) = (0.5, 0.2, 1.0, 1.0);
    for n in [1_000u64, 10_000, 100_000] {
        let params = WalkParams::new(n, beta, mu)?;
        let level = a * mu.powf(alpha) * params.n().powf(alpha * (1.0 - beta)) / gamma(1.0 + alpha);
        let x = level.round() as i64;
        let ens = Ensemble::new(alpha, 3, 2000, Runner::from_env());
        let times = ens.map(|env, rng| {
            Ok(hitting_time(env, &params, x, DEFAULT_STEP_BUDGET, rng)?.time / params.n())
        })?;
        let sample = EmpiricalDistribution::new(times)?;
        print!("N={n:<7} x={x:<4}");
        for lambda in [0.5, 1.0, 2.0] {
            let (m, se) = empirical_laplace(&sample, lambda)?;
            let target = (-(x as f64 / level) * a * lambda.powf(alpha) * gamma(1.0 - alpha)).exp();
            print!("  l={lambda}: {m:.4}±{se:.4} vs {target:.4}");
        }
        println!();
    }

    let params = WalkParams::new(100, 0.5, mu)?;
    let mut rng = substream(9, Purpose::Walk, 0);
    for x in [1u64, 5, 10] {
        let trials = 10_000;
        let mut hits = 0;
        for _ in 0..trials {
            hits += embedded_walk_dips_below(&params, x, 1e-12, DEFAULT_STEP_BUDGET, &mut rng)? as u32;
        }
        println!(
            "P{{min S <= -{x}}}: {:.4} (exact {:.4})",
            hits as f64 / trials as f64,
            min_walk_probability(&params, x)
        );
    }
    Ok(())
}

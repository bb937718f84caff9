//! Slow-drift regime: `X_1 / N^{alpha(1-beta)}` approaches
//! `(mu^alpha / Gamma(1+alpha)) Sub^{-1}_1` as N grows.

use trapscale::ageing::Ensemble;
use trapscale::limits::{inverse_subordinator_marginal, scaling_constant_a};
use trapscale::rng::{substream, Purpose, Runner};
use trapscale::stats::{ks_two_sample, EmpiricalDistribution};
use trapscale::walk::{simulate_until, WalkParams};
use trapscale::Result;

fn main() -> Result<()> {
    let (alpha, beta, mu) = (0.5, 0.2, 1.0);
    let reps = 4000;
    let c = scaling_constant_a(alpha, mu)?;
    let mut rng = substream(1, Purpose::Limit, 0);
    let limit = EmpiricalDistribution::new(
        (0..20_000)
            .map(|_| Ok(c * inverse_subordinator_marginal(alpha, 1.0, &mut rng)?))
            .collect::<Result<Vec<_>>>()?,
    )?;

    println!("{:>9} {:>8} {:>10} {:>10}", "N", "D", "median", "limit");
    for n in [1_000u64, 10_000, 100_000, 1_000_000] {
        let params = WalkParams::new(n, beta, mu)?;
        let scale = params.n().powf(alpha * (1.0 - beta));
        let ens = Ensemble::new(alpha, 7, reps, Runner::from_env());
        let xs = ens.map(|env, rng| {
            let path = simulate_until(env, &params, 1.0, rng)?;
            Ok(path.position_at(1.0)? as f64 / scale)
        })?;
        let xs = EmpiricalDistribution::new(xs)?;
        println!(
            "{n:>9} {:>8.4} {:>10.4} {:>10.4}",
            ks_two_sample(&xs, &limit),
            xs.median(),
            limit.median()
        );
    }
    Ok(())
}

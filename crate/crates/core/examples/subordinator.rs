//! Stable subordinator: Laplace transform, self-similarity and the two
//! constructions of the inverse subordinator.

use trapscale::limits::{
    gamma, inverse_subordinator_marginal, path_inverse_marginal, subordinator_marginal,
};
use trapscale::rng::{substream, Purpose};
use trapscale::stats::{empirical_laplace, ks_threshold, ks_two_sample, EmpiricalDistribution, Reference};
use trapscale::Result;

fn main() -> Result<()> {
    let mut rng = substream(0, Purpose::Limit, 0);
    for alpha in [0.3, 0.5, 0.8] {
        let sub = EmpiricalDistribution::new(
            (0..100_000)
                .map(|_| subordinator_marginal(alpha, 1.0, &mut rng))
                .collect::<Result<Vec<_>>>()?,
        )?;
        for lambda in [0.5, 1.0, 2.0] {
            let (m, se) = empirical_laplace(&sub, lambda)?;
            let exact = (-gamma(1.0 - alpha) * lambda.powf(alpha)).exp();
            println!("alpha={alpha} lambda={lambda}: {m:.5} ± {se:.5}  exact {exact:.5}");
        }
    }

    let n = 10_000;
    let marginal = EmpiricalDistribution::new(
        (0..n)
            .map(|_| inverse_subordinator_marginal(0.5, 1.0, &mut rng))
            .collect::<Result<Vec<_>>>()?,
    )?;
    let path = EmpiricalDistribution::new(
        (0..n)
            .map(|_| path_inverse_marginal(0.5, 1.0, 1e-3, &mut rng))
            .collect::<Result<Vec<_>>>()?,
    )?;
    println!(
        "\nSub^-1_1: marginal vs path inversion D={:.4} (1% critical {:.4})",
        ks_two_sample(&marginal, &path),
        ks_threshold(n, Reference::Sample(n), 0.01)?
    );
    Ok(())
}

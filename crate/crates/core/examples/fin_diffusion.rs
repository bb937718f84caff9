//! FIN diffusion via the Stone chain, compared with the rescaled walk in the
//! critical (drift mu) and fast (driftless) regimes.

use trapscale::ageing::Ensemble;
use trapscale::limits::{sample_fin, DEFAULT_CUTOFF, DEFAULT_WINDOW};
use trapscale::rng::{substream, Purpose, Runner};
use trapscale::stats::{ks_two_sample, EmpiricalDistribution};
use trapscale::walk::{simulate_until, WalkParams};
use trapscale::Result;

fn main() -> Result<()> {
    let alpha = 0.5;
    let n = 100_000u64;
    let reps = 2000;
    let runner = Runner::from_env();
    for (label, beta, mu) in [("fast", 0.5, 0.0), ("critical", alpha / (alpha + 1.0), 1.0)] {
        let params = WalkParams::new(n, beta, mu)?;
        let scale = params.n().powf(alpha / (alpha + 1.0));
        let walk = Ensemble::new(alpha, 5, reps, runner).map(|env, rng| {
            Ok(simulate_until(env, &params, 1.0, rng)?.position_at(1.0)? as f64 / scale)
        })?;
        let fin: Vec<f64> = runner
            .run(reps, |i| {
                let mut rng = substream(6, Purpose::Limit, i as u64);
                sample_fin(alpha, mu, 1.0, DEFAULT_WINDOW, DEFAULT_CUTOFF, &mut rng).map(|s| s.value)
            })
            .into_iter()
            .collect::<Result<_>>()?;
        let (walk, fin) = (EmpiricalDistribution::new(walk)?, EmpiricalDistribution::new(fin)?);
        println!(
            "{label:>8}: D={:.4}  walk mean {:+.3}  Fin mean {:+.3}",
            ks_two_sample(&walk, &fin),
            walk.mean(),
            fin.mean()
        );
        println!("          walk deciles {:.2?}", walk.deciles());
        println!("          Fin deciles  {:.2?}", fin.deciles());
    }
    Ok(())
}

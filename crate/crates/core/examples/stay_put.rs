//! Ageing: probability of no jump in a window after time t, in the slow
//! regime (window N^{-beta}) and the driftless regime (window N^{-alpha/(alpha+1)}).

use trapscale::ageing::{mean_exp_neg_reciprocal, sample_zeta_limit, stay_put_probability, Ensemble};
use trapscale::limits::{DEFAULT_CUTOFF, DEFAULT_WINDOW};
use trapscale::rng::{substream, Purpose, Runner};
use trapscale::walk::WalkParams;
use trapscale::Result;

fn main() -> Result<()> {
    let alpha = 0.5;
    let runner = Runner::from_env();
    for t in [0.5, 1.0, 2.0] {
        let slow = WalkParams::new(100_000, 0.2, 1.0)?;
        let est = stay_put_probability(&Ensemble::new(alpha, 1, 2000, runner), &slow, t, 0.2, 0.95)?;
        println!(
            "slow t={t}: direct {:.4} [{:.3},{:.3}]  conditional {:.4}",
            est.direct, est.direct_ci.0, est.direct_ci.1, est.conditional
        );

        let fast = WalkParams::new(100_000, 0.5, 0.0)?;
        let est = stay_put_probability(&Ensemble::new(alpha, 2, 2000, runner), &fast, t, alpha / (alpha + 1.0), 0.95)?;
        let zeta: Vec<f64> = runner
            .run(2000, |i| {
                let mut rng = substream(3, Purpose::Limit, i as u64);
                sample_zeta_limit(alpha, 0.0, t, DEFAULT_WINDOW, DEFAULT_CUTOFF, &mut rng)
            })
            .into_iter()
            .collect::<Result<_>>()?;
        let (k, se) = mean_exp_neg_reciprocal(&zeta);
        println!(
            "fast t={t}: direct {:.4} [{:.3},{:.3}]  k(t) {k:.4} ± {se:.4}",
            est.direct, est.direct_ci.0, est.direct_ci.1
        );
    }
    Ok(())
}

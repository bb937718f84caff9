//! Deep-trap decomposition and the tail of `xi_t`: direct frequency of
//! `tau_{X_t} > v N^{1-beta}` against the renewal representation.

use trapscale::ageing::{
    segment_decomposition, u_laplace_limit, xi_renewal_estimate, xi_tail_direct, Ensemble,
};
use trapscale::rng::{substream, Purpose, Runner};
use trapscale::stats::{empirical_laplace, EmpiricalDistribution};
use trapscale::walk::{WalkParams, DEFAULT_STEP_BUDGET};
use trapscale::Result;

fn main() -> Result<()> {
    let (alpha, beta, mu, t) = (0.5, 0.2, 1.0, 1.0);
    let params = WalkParams::new(100_000, beta, mu)?;
    let runner = Runner::from_env();
    let v_grid = [0.5, 1.0, 2.0];
    let direct = xi_tail_direct(&Ensemble::new(alpha, 1, 4000, runner), &params, t, &v_grid, 0.95)?;

    println!("{:>4} {:>18} {:>18}", "v", "direct", "renewal");
    for (k, &v) in v_grid.iter().enumerate() {
        let segs = Ensemble::new(alpha, 100 + k as u64, 2000, runner)
            .map(|env, rng| segment_decomposition(env, &params, v, 2, DEFAULT_STEP_BUDGET, rng))?;
        let pool: Vec<f64> = segs.iter().map(|s| s.travel[2] / (v * params.n())).collect();
        if v == 1.0 {
            let (m, se) = empirical_laplace(&EmpiricalDistribution::new(pool.clone())?, 1.0)?;
            println!("     E exp(-U/vN) = {m:.4} ± {se:.4}, limit {:.4}", u_laplace_limit(alpha, mu, 1.0)?);
        }
        let mut rng = substream(k as u64, Purpose::Limit, 0);
        let renewal = xi_renewal_estimate(t, &[v], &pool, alpha, mu, 500, 100_000, 0.95, &mut rng)?;
        let (d, r) = (&direct.tails[k], &renewal.tails[0]);
        println!(
            "{v:>4} {:.4} [{:.3},{:.3}] {:.4} [{:.3},{:.3}]",
            d.estimate, d.ci.0, d.ci.1, r.estimate, r.ci.0, r.ci.1
        );
    }
    Ok(())
}

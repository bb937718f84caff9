use proptest::prelude::*;
use trapscale::env::TrapEnvironment;
use trapscale::rng::{substream, Purpose};
use trapscale::stats::{binomial_ci, ks_one_sample, ks_threshold, mean_and_se, EmpiricalDistribution, Reference};
use trapscale::walk::{
    embedded_local_times, embedded_walk_dips_below, hitting_time, min_walk_probability,
    simulate_until, visits_to_origin, WalkParams, DEFAULT_STEP_BUDGET,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn paths_are_nearest_neighbour_and_time_ordered(seed in any::<u64>(), beta in 0.0f64..0.9) {
        let params = WalkParams::new(100, beta, 0.5).unwrap();
        let mut env = TrapEnvironment::new(0.5, seed).unwrap();
        let mut rng = substream(seed, Purpose::Walk, 0);
        let path = simulate_until(&mut env, &params, 2.0, &mut rng).unwrap();
        let ev = path.events();
        prop_assert_eq!(ev[0], (0, 0.0));
        for w in ev.windows(2) {
            prop_assert_eq!((w[1].0 - w[0].0).abs(), 1);
            prop_assert!(w[1].1 > w[0].1);
        }
        prop_assert!(ev.last().unwrap().1 <= path.horizon());
        prop_assert_eq!(path.position_at(0.0).unwrap(), 0);
        prop_assert!(path.position_at(2.5).is_err());
        let mut previous = 0;
        for k in 0..=20 {
            let t = k as f64 * 0.1;
            let d = path.backtrack_depth(t).unwrap();
            prop_assert!(d >= previous);
            previous = d;
            let (site, arrival, next) = path.sojourn_at(t).unwrap();
            prop_assert_eq!(site, path.position_at(t).unwrap());
            prop_assert!(arrival <= t * path.scale());
            if let Some(n) = next {
                prop_assert!(n > t * path.scale());
            }
        }
    }

    #[test]
    fn hitting_field_counts_every_step(seed in any::<u64>(), x in 1i64..40) {
        let params = WalkParams::new(10_000, 0.25, 1.0).unwrap();
        let mut env = TrapEnvironment::new(0.5, seed).unwrap();
        let mut rng = substream(seed, Purpose::Walk, 1);
        let h = hitting_time(&mut env, &params, x, DEFAULT_STEP_BUDGET, &mut rng).unwrap();
        let f = &h.field;
        prop_assert_eq!(f.barrier(), x);
        prop_assert_eq!(f.get(x), 0);
        prop_assert!((0..x).all(|z| f.get(z) >= 1));
        let sum: u64 = f.iter().map(|(_, c)| c).sum();
        prop_assert_eq!(sum, f.total());
        // net displacement x = (#right) - (#left), #right + #left = total
        prop_assert_eq!((f.total() as i64 - x) % 2, 0);
        prop_assert!(f.min_site() <= 0);
        prop_assert!(h.time > 0.0);
    }
}

#[test]
fn holding_times_are_exponential_with_trap_mean() {
    let params = WalkParams::new(1, 0.0, 0.0).unwrap();
    let mut ratios = Vec::new();
    for rep in 0..40 {
        let mut env = TrapEnvironment::new(0.9, rep).unwrap();
        let mut rng = substream(rep, Purpose::Walk, 0);
        let path = simulate_until(&mut env, &params, 5e4, &mut rng).unwrap();
        ratios.extend(path.holding_times().map(|(z, d)| d / env.compute_tau(z)));
    }
    let n = ratios.len();
    assert!(n > 5_000, "only {n} sojourns");
    let ed = EmpiricalDistribution::new(ratios).unwrap();
    let d = ks_one_sample(&ed, |x| if x <= 0.0 { 0.0 } else { -(-x).exp_m1() });
    assert!(d < ks_threshold(n, Reference::Analytic, 0.001).unwrap(), "D = {d}");
}

#[test]
fn gamblers_ruin_matches_simulation() {
    let params = WalkParams::new(100, 0.5, 1.0).unwrap();
    let x = 5;
    let exact = min_walk_probability(&params, x);
    assert!((exact - (0.45f64 / 0.55).powi(5)).abs() < 1e-15);
    let n = 20_000u64;
    let mut rng = substream(4, Purpose::Walk, 0);
    let hits = (0..n)
        .filter(|_| embedded_walk_dips_below(&params, x, 1e-12, DEFAULT_STEP_BUDGET, &mut rng).unwrap())
        .count() as u64;
    let ci = binomial_ci(hits, n, 0.999).unwrap();
    assert!(ci.0 <= exact && exact <= ci.1, "{ci:?} vs {exact}");
}

#[test]
fn origin_visits_have_geometric_mean() {
    // l(0) is geometric with success probability p - q.
    let params = WalkParams::new(100, 0.5, 2.0).unwrap();
    let mut rng = substream(8, Purpose::Walk, 0);
    let draws: Vec<f64> = (0..20_000)
        .map(|_| visits_to_origin(&params, 1e-12, DEFAULT_STEP_BUDGET, &mut rng).unwrap() as f64)
        .collect();
    let (m, se) = mean_and_se(draws);
    let exact = 1.0 / (params.p() - params.q());
    assert!((m - exact).abs() < 4.0 * se, "{m} ± {se} vs {exact}");
}

#[test]
fn embedded_field_needs_no_environment() {
    let params = WalkParams::new(10_000, 0.25, 1.0).unwrap();
    let mut rng = substream(2, Purpose::Walk, 0);
    let f = embedded_local_times(&params, 30, DEFAULT_STEP_BUDGET, &mut rng).unwrap();
    assert!((0..30).all(|z| f.get(z) >= 1));
    assert!(embedded_local_times(&params, 0, 10, &mut rng).is_err());
    assert!(embedded_local_times(&params, 1_000_000, 10, &mut rng).is_err());
}

#[test]
fn backtrack_depth_shrinks_relative_to_scale() {
    // Backtracks live on scale N^beta, positions on N^{alpha(1-beta)}.
    let alpha = 0.5;
    let mean_depth = |n: u64| {
        let params = WalkParams::new(n, 0.2, 1.0).unwrap();
        let scale = params.n().powf(alpha * (1.0 - 0.2));
        let depths: Vec<f64> = (0..200)
            .map(|rep| {
                let mut env = TrapEnvironment::new(alpha, 100 + rep).unwrap();
                let mut rng = substream(rep, Purpose::Walk, n);
                let path = simulate_until(&mut env, &params, 1.0, &mut rng).unwrap();
                path.backtrack_depth(1.0).unwrap() as f64 / scale
            })
            .collect();
        mean_and_se(depths).0
    };
    let small = mean_depth(1_000);
    let large = mean_depth(100_000);
    assert!(large < small, "{large} !< {small}");
}

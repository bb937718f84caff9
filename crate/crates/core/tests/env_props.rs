use proptest::prelude::*;
use trapscale::env::{sample_pareto, TrapEnvironment};
use trapscale::stats::{chi_square_gof, ks_one_sample, ks_threshold, EmpiricalDistribution, Reference};

#[test]
fn depths_follow_pareto_tail() {
    let alpha = 0.5;
    let env = TrapEnvironment::new(alpha, 11).unwrap();
    let taus: Vec<f64> = (-10_000..10_000).map(|z| env.compute_tau(z)).collect();
    assert!(taus.iter().all(|&t| t >= 1.0));
    let n = taus.len();
    let ed = EmpiricalDistribution::new(taus).unwrap();
    let d = ks_one_sample(&ed, |x| if x < 1.0 { 0.0 } else { 1.0 - x.powf(-alpha) });
    assert!(d < ks_threshold(n, Reference::Analytic, 0.001).unwrap(), "D = {d}");
}

#[test]
fn lazy_and_direct_lookups_agree_in_any_order() {
    let mut a = TrapEnvironment::new(0.3, 5).unwrap();
    let mut b = TrapEnvironment::new(0.3, 5).unwrap();
    let forward: Vec<f64> = (-50..50).map(|z| a.tau_at(z)).collect();
    let backward: Vec<f64> = (-50..50).rev().map(|z| b.tau_at(z)).collect();
    let direct: Vec<f64> = (-50..50).map(|z| a.compute_tau(z)).collect();
    let mut backward = backward;
    backward.reverse();
    assert_eq!(forward, backward);
    assert_eq!(forward, direct);
    let other = TrapEnvironment::new(0.3, 6).unwrap();
    assert_ne!(forward[0], other.compute_tau(-50));
}

#[test]
fn deep_trap_gaps_are_geometric() {
    // P(tau > y) = y^{-alpha}, so gaps between deep sites are geometric.
    let alpha = 0.5;
    let threshold: f64 = 25.0;
    let theta = threshold.powf(-alpha);
    let mut env = TrapEnvironment::new(alpha, 3).unwrap();
    let deep = env.deep_trap_positions(threshold, 400_000);
    let manual: Vec<i64> = (1..=400_000).filter(|&z| env.compute_tau(z) > threshold).collect();
    assert_eq!(deep[0], 0);
    assert_eq!(deep[1..], manual[..]);
    let deep = manual;
    let bins = 30usize;
    let mut observed = vec![0u64; bins + 1];
    for w in deep.windows(2) {
        let g = (w[1] - w[0]) as usize;
        observed[(g - 1).min(bins)] += 1;
    }
    let total = (deep.len() - 1) as f64;
    let mut expected: Vec<f64> = (0..bins)
        .map(|k| total * (1.0 - theta).powi(k as i32) * theta)
        .collect();
    expected.push(total * (1.0 - theta).powi(bins as i32));
    let chi = chi_square_gof(&observed, &expected).unwrap();
    assert!(chi.p_value > 1e-3, "{chi:?}");
}

#[test]
fn next_deep_trap_respects_search_limit() {
    let mut env = TrapEnvironment::new(0.5, 1).unwrap();
    assert_eq!(env.next_deep_trap(0, f64::INFINITY, 1000), None);
    let first = env.next_deep_trap(0, 10.0, 100_000).unwrap();
    assert!(first > 0 && env.tau_at(first) > 10.0);
    assert!((1..first).all(|z| env.tau_at(z) <= 10.0));
}

proptest! {
    #[test]
    fn pareto_is_decreasing_in_u(alpha in 0.05f64..0.95, u in 0.001f64..0.998, du in 1e-4f64..1e-3) {
        let a = sample_pareto(alpha, u).unwrap();
        let b = sample_pareto(alpha, u + du).unwrap();
        prop_assert!(a >= 1.0 && b >= 1.0);
        prop_assert!(a > b);
    }

    #[test]
    fn environment_is_a_function_of_seed(seed in any::<u64>(), z in -1_000_000i64..1_000_000) {
        let mut a = TrapEnvironment::new(0.5, seed).unwrap();
        let b = TrapEnvironment::new(0.5, seed).unwrap();
        prop_assert_eq!(a.tau_at(z), b.compute_tau(z));
        let u = a.uniform_at(z);
        prop_assert!(u > 0.0 && u < 1.0);
    }
}

#[test]
fn pareto_rejects_bad_inputs() {
    assert!(sample_pareto(1.0, 0.5).is_err());
    assert!(sample_pareto(0.5, 0.0).is_err());
    assert!(sample_pareto(0.5, 1.0).is_err());
    assert!(TrapEnvironment::new(0.0, 0).is_err());
}

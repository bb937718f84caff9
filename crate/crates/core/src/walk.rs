//! Event-driven simulation of the trap model with vanishing drift.
//!
//! All times are stored on the unrescaled clock of `X`; the rescaled process
//! `X^(N)_t = X_{Nt}` is only formed at query boundaries.

use rand::Rng;
use rand_distr::Exp1;

use crate::env::TrapEnvironment;
use crate::error::{domain, Error, Result};

/// Default cap on embedded steps per replication.
pub const DEFAULT_STEP_BUDGET: u64 = 1_000_000_000;

/// Rescaling parameter `N`, drift-decay exponent `beta` and drift strength `mu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkParams {
    n: f64,
    beta: f64,
    mu: f64,
    p: f64,
}

impl WalkParams {
    pub fn new(n: u64, beta: f64, mu: f64) -> Result<Self> {
        if n == 0 {
            return domain("N must be a positive integer");
        }
        if !(beta >= 0.0) || !beta.is_finite() {
            return domain(format!("beta must be >= 0, got {beta}"));
        }
        if !(mu >= 0.0) || !mu.is_finite() {
            return domain(format!("mu must be >= 0, got {mu}"));
        }
        if beta == 0.0 && mu > 1.0 {
            return domain(format!("beta=0 requires mu <= 1 (p would exceed 1), got mu={mu}"));
        }
        let n = n as f64;
        let bias = mu * n.powf(-beta);
        if bias > 1.0 {
            return domain(format!("mu*N^-beta = {bias} exceeds 1 (p would exceed 1)"));
        }
        Ok(Self {
            n,
            beta,
            mu,
            p: 0.5 * (1.0 + bias),
        })
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// `N^beta`, the natural scale of local times.
    pub fn n_beta(&self) -> f64 {
        self.n.powf(self.beta)
    }

    /// `p - q = mu N^{-beta}`.
    pub fn bias(&self) -> f64 {
        2.0 * self.p - 1.0
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        1.0 - self.p
    }
}

/// `(p, q)` with `p = (1 + mu N^{-beta}) / 2`.
pub fn jump_probability(params: &WalkParams) -> (f64, f64) {
    (params.p(), params.q())
}

#[inline]
fn step<R: Rng + ?Sized>(p: f64, rng: &mut R) -> i64 {
    if p >= 1.0 || rng.random::<f64>() < p {
        1
    } else {
        -1
    }
}

/// One trajectory: the list of `(site, arrival time)` events on the unrescaled clock.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSample {
    events: Vec<(i64, f64)>,
    horizon: f64,
    scale: f64,
}

impl PathSample {
    pub fn events(&self) -> &[(i64, f64)] {
        &self.events
    }

    /// Simulation end time on the unrescaled clock.
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Time-rescaling factor `N`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    fn check_time(&self, t: f64) -> Result<f64> {
        let raw = t * self.scale;
        if !(t >= 0.0) || raw > self.horizon {
            return Err(Error::Range(format!(
                "rescaled time {t} outside [0, {}]",
                self.horizon / self.scale
            )));
        }
        Ok(raw)
    }

    fn index_at(&self, raw: f64) -> usize {
        self.events.partition_point(|e| e.1 <= raw) - 1
    }

    /// `X^(N)_t`, right-continuous.
    pub fn position_at(&self, t: f64) -> Result<i64> {
        let raw = self.check_time(t)?;
        Ok(self.events[self.index_at(raw)].0)
    }

    /// Arrival time (unrescaled) of the sojourn in progress at rescaled time `t`
    /// and the arrival time of the next event, if it happened before the horizon.
    pub fn sojourn_at(&self, t: f64) -> Result<(i64, f64, Option<f64>)> {
        let raw = self.check_time(t)?;
        let i = self.index_at(raw);
        Ok((
            self.events[i].0,
            self.events[i].1,
            self.events.get(i + 1).map(|e| e.1),
        ))
    }

    /// `sup_{v<=t} (sup_{u<=v} X_u - X_v)` on the rescaled clock.
    pub fn backtrack_depth(&self, t: f64) -> Result<u64> {
        let raw = self.check_time(t)?;
        let last = self.index_at(raw);
        let mut running_max = i64::MIN;
        let mut depth = 0i64;
        for &(site, _) in &self.events[..=last] {
            running_max = running_max.max(site);
            depth = depth.max(running_max - site);
        }
        Ok(depth as u64)
    }

    /// Completed sojourns as `(site, duration)`.
    pub fn holding_times(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.events.windows(2).map(|w| (w[0].0, w[1].1 - w[0].1))
    }
}

/// Simulates `X` from site 0 until the unrescaled clock passes `N * t_max`.
pub fn simulate_until<R: Rng + ?Sized>(
    env: &mut TrapEnvironment,
    params: &WalkParams,
    t_max: f64,
    rng: &mut R,
) -> Result<PathSample> {
    if !(t_max > 0.0) {
        return domain(format!("t_max must be positive, got {t_max}"));
    }
    let horizon = params.n * t_max;
    let p = params.p;
    let mut events = vec![(0i64, 0.0f64)];
    let mut site = 0i64;
    let mut clock = 0.0f64;
    loop {
        let eta: f64 = rng.sample(Exp1);
        clock += env.tau_at(site) * eta;
        if clock > horizon {
            break;
        }
        site += step(p, rng);
        events.push((site, clock));
    }
    Ok(PathSample {
        events,
        horizon,
        scale: params.n,
    })
}

/// Visit counts `l^(x)(z)` of the embedded walk before the first hit of `x`.
///
/// Index `n = 0` (the start at site 0) counts as a visit.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LocalTimeField {
    barrier: i64,
    right: Vec<u64>,
    left: Vec<u64>,
}

impl LocalTimeField {
    fn new(barrier: i64) -> Self {
        Self {
            barrier,
            right: Vec::with_capacity(barrier.max(0) as usize),
            left: Vec::new(),
        }
    }

    #[inline]
    fn bump(&mut self, z: i64) {
        let (v, i) = if z >= 0 {
            (&mut self.right, z as usize)
        } else {
            (&mut self.left, (-(z + 1)) as usize)
        };
        if i >= v.len() {
            v.resize(i + 1, 0);
        }
        v[i] += 1;
    }

    pub fn barrier(&self) -> i64 {
        self.barrier
    }

    pub fn get(&self, z: i64) -> u64 {
        let (v, i) = if z >= 0 {
            (&self.right, z as usize)
        } else {
            (&self.left, (-(z + 1)) as usize)
        };
        v.get(i).copied().unwrap_or(0)
    }

    /// Visited sites with their counts, in increasing site order.
    pub fn iter(&self) -> impl Iterator<Item = (i64, u64)> + '_ {
        let left = self
            .left
            .iter()
            .enumerate()
            .rev()
            .map(|(i, &c)| (-(i as i64) - 1, c));
        let right = self.right.iter().enumerate().map(|(i, &c)| (i as i64, c));
        left.chain(right).filter(|&(_, c)| c > 0)
    }

    /// Number of embedded steps taken before the barrier was hit.
    pub fn total(&self) -> u64 {
        self.left.iter().chain(self.right.iter()).sum()
    }

    /// Lowest visited site.
    pub fn min_site(&self) -> i64 {
        -(self.left.len() as i64)
    }
}

/// First-passage time to `x` together with the local-time field.
#[derive(Debug, Clone)]
pub struct Hitting {
    /// `T_x` on the unrescaled clock.
    pub time: f64,
    pub field: LocalTimeField,
}

fn check_barrier(x: i64) -> Result<()> {
    if x < 1 {
        return domain(format!("barrier must be >= 1, got {x}"));
    }
    Ok(())
}

/// Runs the trap model from 0 until it first arrives at `x`.
pub fn hitting_time<R: Rng + ?Sized>(
    env: &mut TrapEnvironment,
    params: &WalkParams,
    x: i64,
    budget: u64,
    rng: &mut R,
) -> Result<Hitting> {
    check_barrier(x)?;
    let p = params.p;
    let mut field = LocalTimeField::new(x);
    let mut site = 0i64;
    let mut clock = 0.0f64;
    let mut steps = 0u64;
    while site < x {
        if steps >= budget {
            return Err(Error::StepBudget {
                budget,
                context: format!("hitting x={x}, reached site {site}"),
            });
        }
        field.bump(site);
        let eta: f64 = rng.sample(Exp1);
        clock += env.tau_at(site) * eta;
        site += step(p, rng);
        steps += 1;
    }
    Ok(Hitting { time: clock, field })
}

/// Local-time field of the embedded walk alone (no holding times).
pub fn embedded_local_times<R: Rng + ?Sized>(
    params: &WalkParams,
    x: i64,
    budget: u64,
    rng: &mut R,
) -> Result<LocalTimeField> {
    check_barrier(x)?;
    let p = params.p;
    let mut field = LocalTimeField::new(x);
    let mut site = 0i64;
    let mut steps = 0u64;
    while site < x {
        if steps >= budget {
            return Err(Error::StepBudget {
                budget,
                context: format!("embedded walk to x={x}"),
            });
        }
        field.bump(site);
        site += step(p, rng);
        steps += 1;
    }
    Ok(field)
}

/// Gambler's-ruin value `P{min_{k>=1} S_k <= -x} = (q/p)^x`.
pub fn min_walk_probability(params: &WalkParams, x: u64) -> f64 {
    if x == 0 || params.mu == 0.0 {
        return 1.0;
    }
    (params.q() / params.p()).powf(x as f64)
}

/// Height above which a return to the origin has probability below `tol`.
fn escape_level(params: &WalkParams, tol: f64) -> Result<i64> {
    if params.mu == 0.0 {
        return domain("the driftless embedded walk is recurrent; no escape level exists");
    }
    let ratio = params.q() / params.p();
    if ratio <= 0.0 {
        return Ok(1);
    }
    Ok((tol.ln() / ratio.ln()).ceil().max(1.0) as i64)
}

/// Simulates the embedded walk and reports whether `min_{k>=1} S_k <= -x`.
///
/// The walk is stopped once it climbs to a level from which reaching `-x`
/// has probability below `tol`.
pub fn embedded_walk_dips_below<R: Rng + ?Sized>(
    params: &WalkParams,
    x: u64,
    tol: f64,
    budget: u64,
    rng: &mut R,
) -> Result<bool> {
    let target = -(x as i64);
    let ceiling = if params.mu == 0.0 {
        i64::MAX
    } else {
        escape_level(params, tol)? + target
    };
    let mut site = 0i64;
    for _ in 0..budget {
        site += step(params.p, rng);
        if site <= target {
            return Ok(true);
        }
        if site >= ceiling {
            return Ok(false);
        }
    }
    Err(Error::StepBudget {
        budget,
        context: "minimum of embedded walk".into(),
    })
}

/// `l^(inf)(0)`: total visits of the transient embedded walk to its start.
///
/// Requires `mu > 0`; the walk is abandoned once a return has probability below `tol`.
pub fn visits_to_origin<R: Rng + ?Sized>(
    params: &WalkParams,
    tol: f64,
    budget: u64,
    rng: &mut R,
) -> Result<u64> {
    let ceiling = escape_level(params, tol)?;
    let mut site = 0i64;
    let mut visits = 1u64;
    for _ in 0..budget {
        site += step(params.p, rng);
        if site == 0 {
            visits += 1;
        } else if site >= ceiling {
            return Ok(visits);
        }
    }
    Err(Error::StepBudget {
        budget,
        context: "visits to origin".into(),
    })
}

/// Result of a normalized local-time functional.
#[derive(Debug, Clone, Copy)]
pub struct FunctionalEstimate {
    pub value: f64,
    /// `x / N^beta`; the limit only applies when this is large.
    pub ratio: f64,
}

impl FunctionalEstimate {
    pub fn asymptotic(&self) -> bool {
        self.ratio >= 10.0
    }
}

/// `(1/x) sum_{z<x} psi(l^(x)(z) / N^beta)` over the visited sites.
pub fn local_time_functional<R, F>(
    params: &WalkParams,
    x: i64,
    psi: F,
    budget: u64,
    rng: &mut R,
) -> Result<FunctionalEstimate>
where
    R: Rng + ?Sized,
    F: Fn(f64) -> f64,
{
    let field = embedded_local_times(params, x, budget, rng)?;
    let nb = params.n_beta();
    let ratio = x as f64 / nb;
    if ratio < 10.0 {
        log::warn!("local_time_functional: x/N^beta = {ratio:.2} is not large; limit may not apply");
    }
    let sum: f64 = field.iter().map(|(_, c)| psi(c as f64 / nb)).sum();
    Ok(FunctionalEstimate {
        value: sum / x as f64,
        ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{substream, Purpose};

    fn env(seed: u64) -> TrapEnvironment {
        TrapEnvironment::new(0.5, seed).unwrap()
    }

    #[test]
    fn jump_probability_examples() {
        let w = WalkParams::new(10_000, 0.5, 1.0).unwrap();
        let (p, q) = jump_probability(&w);
        assert!((p - 0.505).abs() < 1e-15 && (q - 0.495).abs() < 1e-15);
        let w = WalkParams::new(123, 0.7, 0.0).unwrap();
        assert_eq!(jump_probability(&w), (0.5, 0.5));
        let w = WalkParams::new(1, 0.0, 1.0).unwrap();
        assert_eq!(jump_probability(&w), (1.0, 0.0));
        assert!(WalkParams::new(100, 0.0, 2.0).is_err());
        assert!(WalkParams::new(0, 0.2, 1.0).is_err());
    }

    #[test]
    fn monotone_walk_increases() {
        let mut e = env(3);
        let w = WalkParams::new(1, 0.0, 1.0).unwrap();
        let mut rng = substream(1, Purpose::Walk, 0);
        let path = simulate_until(&mut e, &w, 500.0, &mut rng).unwrap();
        for (i, &(site, _)) in path.events().iter().enumerate() {
            assert_eq!(site, i as i64);
        }
        assert_eq!(path.backtrack_depth(500.0).unwrap(), 0);
    }

    #[test]
    fn path_invariants() {
        let mut e = env(4);
        let w = WalkParams::new(1000, 0.2, 1.0).unwrap();
        let mut rng = substream(2, Purpose::Walk, 0);
        let path = simulate_until(&mut e, &w, 2.0, &mut rng).unwrap();
        assert_eq!(path.events()[0], (0, 0.0));
        for pair in path.events().windows(2) {
            assert_eq!((pair[1].0 - pair[0].0).abs(), 1);
            assert!(pair[1].1 > pair[0].1);
        }
        assert_eq!(path.position_at(0.0).unwrap(), 0);
        assert!(path.position_at(2.0 + 1e-9).is_err());
    }

    #[test]
    fn position_lookup_is_right_continuous() {
        let path = PathSample {
            events: vec![(0, 0.0), (1, 3.0), (0, 5.0)],
            horizon: 10.0,
            scale: 1.0,
        };
        assert_eq!(path.position_at(4.0).unwrap(), 1);
        assert_eq!(path.position_at(3.0 - 1e-12).unwrap(), 0);
        assert_eq!(path.position_at(3.0).unwrap(), 1);
        assert_eq!(path.position_at(5.0).unwrap(), 0);
    }

    #[test]
    fn backtrack_hand_example() {
        let sites = [0i64, 1, 2, 1, 0, 1];
        let path = PathSample {
            events: sites.iter().enumerate().map(|(i, &s)| (s, i as f64)).collect(),
            horizon: 10.0,
            scale: 1.0,
        };
        assert_eq!(path.backtrack_depth(10.0).unwrap(), 2);
        assert_eq!(path.backtrack_depth(2.5).unwrap(), 0);
    }

    #[test]
    fn monotone_hitting_time_is_sum_over_sites() {
        let mut e = env(9);
        let w = WalkParams::new(1, 0.0, 1.0).unwrap();
        let mut rng = substream(5, Purpose::Walk, 0);
        let mut replay = rng.clone();
        let hit = hitting_time(&mut e, &w, 25, DEFAULT_STEP_BUDGET, &mut rng).unwrap();
        let mut expected = 0.0;
        for z in 0..25 {
            let eta: f64 = replay.sample(Exp1);
            // p = 1 consumes no jump variate
            expected += e.tau_at(z) * eta;
        }
        assert!((hit.time - expected).abs() <= 1e-12 * expected);
        for z in 0..25 {
            assert_eq!(hit.field.get(z), 1);
        }
        assert_eq!(hit.field.get(25), 0);
        assert_eq!(hit.field.total(), 25);
    }

    #[test]
    fn local_time_field_counts_steps() {
        let mut e = env(10);
        let w = WalkParams::new(100, 0.5, 1.0).unwrap();
        let mut rng = substream(6, Purpose::Walk, 0);
        let hit = hitting_time(&mut e, &w, 40, DEFAULT_STEP_BUDGET, &mut rng).unwrap();
        assert!(hit.field.iter().all(|(z, c)| z < 40 && c > 0));
        assert!((0..40).all(|z| hit.field.get(z) >= 1));
        let sum: u64 = hit.field.iter().map(|(_, c)| c).sum();
        assert_eq!(sum, hit.field.total());
    }

    #[test]
    fn step_budget_aborts() {
        let mut e = env(11);
        let w = WalkParams::new(100, 0.5, 0.0).unwrap();
        let mut rng = substream(7, Purpose::Walk, 0);
        let err = hitting_time(&mut e, &w, 10_000, 1_000, &mut rng).unwrap_err();
        assert!(matches!(err, Error::StepBudget { budget: 1_000, .. }));
    }

    #[test]
    fn min_walk_probability_values() {
        // N^beta = 10 with N = 100, beta = 0.5
        let w = WalkParams::new(100, 0.5, 1.0).unwrap();
        let v = min_walk_probability(&w, 10);
        assert!((v - (9.0f64 / 11.0).powi(10)).abs() < 1e-14);
        assert!((v - 0.134_430_6).abs() < 1e-6);
        assert_eq!(min_walk_probability(&w, 0), 1.0);
        let mono = WalkParams::new(1, 0.0, 1.0).unwrap();
        assert_eq!(min_walk_probability(&mono, 3), 0.0);
        let flat = WalkParams::new(100, 0.5, 0.0).unwrap();
        assert_eq!(min_walk_probability(&flat, 3), 1.0);
    }

    #[test]
    fn psi_one_on_nonnegative_sites_is_one() {
        let w = WalkParams::new(10_000, 0.25, 1.0).unwrap();
        let mut rng = substream(8, Purpose::Walk, 0);
        let field = embedded_local_times(&w, 300, DEFAULT_STEP_BUDGET, &mut rng).unwrap();
        let covered = field.iter().filter(|&(z, _)| (0..300).contains(&z)).count();
        assert_eq!(covered, 300);
    }
}

//! Ageing analysis: deep-trap segment decomposition, limit samplers for the
//! sitting times, the renewal representation of `xi_t`, stay-put
//! probabilities and the `zeta_t = rho(Fin_t)` construction.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::Exp1;

use crate::env::{open_unit, TrapEnvironment};
use crate::error::{domain, Error, Result};
use crate::limits::{gamma, sample_fin};
use crate::quad::gauss_kronrod;
use crate::rng::{derive_seed, substream, Purpose, Runner};
use crate::stats::{binomial_ci, mean_and_se, normal_quantile};
use crate::walk::{simulate_until, WalkParams};

/// Per-replication split of the passage through successive deep traps.
///
/// Index `j` of `sitting`, `excursions` and `visits` refers to deep trap
/// `x_j` (time spent before `x_{j+1}` is first hit); index `j` of `travel`
/// is the final passage from `x_{j-1}` to `x_j`, with `travel[0] = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentDecomposition {
    pub threshold: f64,
    pub deep_sites: Vec<i64>,
    pub hitting_times: Vec<f64>,
    pub travel: Vec<f64>,
    pub sitting: Vec<f64>,
    pub excursions: Vec<f64>,
    pub visits: Vec<u64>,
}

impl SegmentDecomposition {
    /// Number of deep traps reached after `x_0`.
    pub fn segments(&self) -> usize {
        self.deep_sites.len() - 1
    }

    /// `sum_{i<j}(U_i + S_i + R_i) + U_j`.
    pub fn reconstructed_hitting_time(&self, j: usize) -> f64 {
        let before: f64 = (0..j)
            .map(|i| self.travel[i] + self.sitting[i] + self.excursions[i])
            .sum();
        before + self.travel[j]
    }
}

/// Runs the walk until the `horizon`-th deep trap (depth above `v N^{1-beta}`) is hit.
pub fn segment_decomposition<R: Rng + ?Sized>(
    env: &mut TrapEnvironment,
    params: &WalkParams,
    v: f64,
    horizon: usize,
    budget: u64,
    rng: &mut R,
) -> Result<SegmentDecomposition> {
    if !(params.mu() > 0.0) {
        return domain("segment decomposition needs mu > 0");
    }
    if !(v > 0.0) {
        return domain(format!("v must be positive, got {v}"));
    }
    if horizon == 0 {
        return domain("horizon J must be >= 1");
    }
    let threshold = v * params.n().powf(1.0 - params.beta());
    let p = params.p();
    let mut out = SegmentDecomposition {
        threshold,
        deep_sites: vec![0],
        hitting_times: vec![0.0],
        travel: vec![0.0],
        sitting: Vec::with_capacity(horizon),
        excursions: Vec::with_capacity(horizon),
        visits: Vec::with_capacity(horizon),
    };
    let mut base = 0i64;
    let (mut sit, mut exc, mut pending, mut visits) = (0.0f64, 0.0f64, 0.0f64, 0u64);
    let mut site = 0i64;
    let mut clock = 0.0f64;
    let mut steps = 0u64;
    while out.segments() < horizon {
        if steps >= budget {
            return Err(Error::StepBudget {
                budget,
                context: format!(
                    "segment decomposition reached {} of {horizon} deep traps",
                    out.segments()
                ),
            });
        }
        steps += 1;
        let eta: f64 = rng.sample(Exp1);
        let hold = env.tau_at(site) * eta;
        clock += hold;
        if site == base {
            sit += hold;
            visits += 1;
        } else {
            pending += hold;
        }
        site += if p >= 1.0 || rng.random::<f64>() < p { 1 } else { -1 };
        if site == base {
            exc += pending;
            pending = 0.0;
        } else if site > base && env.tau_at(site) > threshold {
            out.sitting.push(sit);
            out.excursions.push(exc);
            out.visits.push(visits);
            out.travel.push(pending);
            out.deep_sites.push(site);
            out.hitting_times.push(clock);
            base = site;
            sit = 0.0;
            exc = 0.0;
            pending = 0.0;
            visits = 0;
        }
    }
    Ok(out)
}

/// Limit law of the rescaled sitting time: Pareto(alpha) times an independent
/// exponential with mean `1/mu`.
pub fn sample_s_limit<R: Rng + ?Sized>(alpha: f64, mu: f64, rng: &mut R) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("alpha must lie in (0,1), got {alpha}"));
    }
    if !(mu > 0.0) {
        return domain(format!("mu must be positive, got {mu}"));
    }
    let pareto = open_unit(rng.next_u64()).powf(-1.0 / alpha);
    let e: f64 = rng.sample(Exp1);
    Ok(pareto * e / mu)
}

const QUAD_TOL: f64 = 1e-13;

/// Laplace transform of the limiting travel time `U` at `lambda`.
pub fn u_laplace_limit(alpha: f64, mu: f64, lambda: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) || !(mu > 0.0) {
        return domain("need 0 < alpha < 1 and mu > 0");
    }
    if !(lambda >= 0.0) {
        return domain(format!("lambda must be >= 0, got {lambda}"));
    }
    if lambda == 0.0 {
        return Ok(1.0);
    }
    let r = lambda / mu;
    let head = alpha * PI / (alpha * PI).sin() * r.powf(alpha);
    // z = 1/y maps alpha * int_1^inf dz / (z^{a+1}(1 + z r)) to int_0^1 y^a / (y + r) dy
    let tail = alpha * gauss_kronrod(|y: f64| y.powf(alpha) / (y + r), 0.0, 1.0, QUAD_TOL)?;
    Ok(1.0 / (head + tail))
}

/// `int_1^inf exp(-lambda z) alpha z^{-alpha-1} dz`.
fn pareto_tail_transform(alpha: f64, lambda: f64) -> Result<f64> {
    if lambda == 0.0 {
        return Ok(1.0);
    }
    gauss_kronrod(
        |s: f64| {
            if s <= 0.0 {
                0.0
            } else {
                (-lambda / s).exp() * alpha * s.powf(alpha - 1.0)
            }
        },
        0.0,
        1.0,
        QUAD_TOL,
    )
}

/// The `y^{-alpha}` coefficient `1 - Gamma(1-alpha) lambda^alpha - int_1^inf e^{-lambda z} alpha z^{-alpha-1} dz`.
pub fn truncated_laplace_coefficient(alpha: f64, lambda: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("alpha must lie in (0,1), got {alpha}"));
    }
    if !(lambda >= 0.0) {
        return domain(format!("lambda must be >= 0, got {lambda}"));
    }
    Ok(1.0 - gamma(1.0 - alpha) * lambda.powf(alpha) - pareto_tail_transform(alpha, lambda)?)
}

/// Two-term expansion of `E[exp(-(lambda/y) tau) | tau <= y]`.
pub fn conditional_laplace_truncated(alpha: f64, y: f64, lambda: f64) -> Result<f64> {
    if !(y > 1.0) {
        return domain(format!("y must exceed 1, got {y}"));
    }
    Ok(1.0 + y.powf(-alpha) * truncated_laplace_coefficient(alpha, lambda)?)
}

/// A tail probability estimate with its confidence interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailEstimate {
    pub v: f64,
    pub estimate: f64,
    pub ci: (f64, f64),
}

/// How a tail of `xi_t` was estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XiMethod {
    Direct,
    Renewal,
}

impl XiMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            XiMethod::Direct => "direct",
            XiMethod::Renewal => "renewal",
        }
    }
}

/// Tail estimates `P{xi_t > v}` over a grid of thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct XiEstimate {
    pub t: f64,
    pub method: XiMethod,
    /// Raw estimates, in the order of the requested grid.
    pub tails: Vec<TailEstimate>,
    /// Estimates after a nonincreasing isotonic fit over increasing `v`.
    pub adjusted: Vec<f64>,
    /// Set when raw estimates break monotonicity by more than a CI width.
    pub monotonicity_flag: bool,
}

impl XiEstimate {
    fn assemble(t: f64, method: XiMethod, tails: Vec<TailEstimate>) -> Self {
        let mut order: Vec<usize> = (0..tails.len()).collect();
        order.sort_by(|&a, &b| tails[a].v.total_cmp(&tails[b].v));
        let sorted: Vec<f64> = order.iter().map(|&i| tails[i].estimate).collect();
        let fitted = isotonic_nonincreasing(&sorted);
        let mut adjusted = vec![0.0; tails.len()];
        let mut flag = false;
        for (k, &i) in order.iter().enumerate() {
            adjusted[i] = fitted[k];
            let width = tails[i].ci.1 - tails[i].ci.0;
            if (tails[i].estimate - fitted[k]).abs() > width {
                flag = true;
            }
        }
        Self {
            t,
            method,
            tails,
            adjusted,
            monotonicity_flag: flag,
        }
    }
}

/// Pool-adjacent-violators fit of a nonincreasing sequence.
pub fn isotonic_nonincreasing(values: &[f64]) -> Vec<f64> {
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(values.len());
    for &v in values {
        blocks.push((v, 1));
        while blocks.len() > 1 {
            let (b, nb) = blocks[blocks.len() - 1];
            let (a, na) = blocks[blocks.len() - 2];
            if a >= b {
                break;
            }
            blocks.pop();
            let last = blocks.last_mut().expect("two blocks");
            *last = ((a * na as f64 + b * nb as f64) / (na + nb) as f64, na + nb);
        }
    }
    blocks
        .into_iter()
        .flat_map(|(v, n)| std::iter::repeat_n(v, n))
        .collect()
}

/// Renewal estimate of `P{xi_t > v}` from a pool of rescaled travel times.
///
/// Each draw alternates resampled travel periods `U` and limit sitting
/// periods `S` and records whether `t/v` falls inside a sitting period.
#[allow(clippy::too_many_arguments)]
pub fn xi_tail_renewal<R: Rng + ?Sized>(
    t: f64,
    v: f64,
    u_pool: &[f64],
    alpha: f64,
    mu: f64,
    j_max: usize,
    draws: usize,
    tolerance: f64,
    confidence: f64,
    rng: &mut R,
) -> Result<TailEstimate> {
    if u_pool.is_empty() {
        return domain("travel-time pool is empty");
    }
    if !(t > 0.0 && v > 0.0) || draws == 0 || j_max == 0 {
        return domain("need t > 0, v > 0, draws >= 1, J_max >= 1");
    }
    let target = t / v;
    let mut hits = 0u64;
    let mut unresolved = 0u64;
    for _ in 0..draws {
        let mut clock = 0.0;
        let mut resolved = false;
        for _ in 0..j_max {
            clock += u_pool[rng.random_range(0..u_pool.len())];
            if clock >= target {
                resolved = true;
                break;
            }
            clock += sample_s_limit(alpha, mu, rng)?;
            if clock >= target {
                hits += 1;
                resolved = true;
                break;
            }
        }
        if !resolved {
            unresolved += 1;
        }
    }
    let remainder = unresolved as f64 / draws as f64;
    if remainder > tolerance {
        return Err(Error::Truncation {
            remainder,
            tolerance,
        });
    }
    Ok(TailEstimate {
        v,
        estimate: hits as f64 / draws as f64,
        ci: binomial_ci(hits, draws as u64, confidence)?,
    })
}

/// Renewal estimates over a grid of thresholds.
#[allow(clippy::too_many_arguments)]
pub fn xi_renewal_estimate<R: Rng + ?Sized>(
    t: f64,
    v_grid: &[f64],
    u_pool: &[f64],
    alpha: f64,
    mu: f64,
    j_max: usize,
    draws: usize,
    confidence: f64,
    rng: &mut R,
) -> Result<XiEstimate> {
    let tails = v_grid
        .iter()
        .map(|&v| xi_tail_renewal(t, v, u_pool, alpha, mu, j_max, draws, 1e-3, confidence, rng))
        .collect::<Result<Vec<_>>>()?;
    Ok(XiEstimate::assemble(t, XiMethod::Renewal, tails))
}

/// What the walker sees at rescaled time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Snapshot {
    pub site: i64,
    /// Depth of the trap occupied at time `t`.
    pub tau: f64,
    /// No jump in `[Nt, Nt + window]` (unrescaled window).
    pub stayed: bool,
}

/// Independent environments and walks, one pair per replication.
#[derive(Debug, Clone, Copy)]
pub struct Ensemble {
    pub alpha: f64,
    pub seed: u64,
    pub reps: usize,
    pub runner: Runner,
}

impl Ensemble {
    pub fn new(alpha: f64, seed: u64, reps: usize, runner: Runner) -> Self {
        Self {
            alpha,
            seed,
            reps,
            runner,
        }
    }

    /// Environment of replication `rep`.
    pub fn environment(&self, rep: usize) -> Result<TrapEnvironment> {
        TrapEnvironment::new(
            self.alpha,
            derive_seed(self.seed, Purpose::Environment, rep as u64),
        )
    }

    /// Applies `f` to every replication's environment and walk stream.
    pub fn map<T, F>(&self, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(&mut TrapEnvironment, &mut crate::rng::Stream) -> Result<T> + Sync + Send,
    {
        self.runner
            .run(self.reps, |rep| {
                let mut env = self.environment(rep)?;
                let mut rng = substream(self.seed, Purpose::Walk, rep as u64);
                f(&mut env, &mut rng)
            })
            .into_iter()
            .collect()
    }

    /// Walk position, trap depth and stay-put indicator at rescaled time `t`
    /// for an unrescaled observation window.
    pub fn snapshots(&self, params: &WalkParams, t: f64, window: f64) -> Result<Vec<Snapshot>> {
        if !(t > 0.0) || !(window >= 0.0) {
            return domain("need t > 0 and window >= 0");
        }
        let horizon = t + window / params.n();
        self.map(|env, rng| {
            let path = simulate_until(env, params, horizon, rng)?;
            let (site, _, next) = path.sojourn_at(t)?;
            let stayed = next.is_none_or(|a| a > params.n() * t + window);
            Ok(Snapshot {
                site,
                tau: env.tau_at(site),
                stayed,
            })
        })
    }
}

/// Frequency of `tau_{X_t} > v N^{1-beta}` over an environment ensemble.
pub fn xi_tail_direct(
    ensemble: &Ensemble,
    params: &WalkParams,
    t: f64,
    v_grid: &[f64],
    confidence: f64,
) -> Result<XiEstimate> {
    let snaps = ensemble.snapshots(params, t, 0.0)?;
    xi_tail_from_snapshots(&snaps, params, t, v_grid, confidence)
}

/// Direct tail estimate from already harvested snapshots.
pub fn xi_tail_from_snapshots(
    snaps: &[Snapshot],
    params: &WalkParams,
    t: f64,
    v_grid: &[f64],
    confidence: f64,
) -> Result<XiEstimate> {
    let scale = params.n().powf(1.0 - params.beta());
    let tails = v_grid
        .iter()
        .map(|&v| {
            let hits = snaps.iter().filter(|s| s.tau > v * scale).count() as u64;
            Ok(TailEstimate {
                v,
                estimate: hits as f64 / snaps.len() as f64,
                ci: binomial_ci(hits, snaps.len() as u64, confidence)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(XiEstimate::assemble(t, XiMethod::Direct, tails))
}

/// Two estimates of the probability of no jump in `[t, t + N^{-window_exponent}]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StayPutEstimate {
    /// Frequency of observed stays.
    pub direct: f64,
    pub direct_ci: (f64, f64),
    /// Mean of `exp(-window / tau_{X_t})` (exact given environment and site).
    pub conditional: f64,
    pub conditional_ci: (f64, f64),
    /// The unrescaled window length `N^{1 - window_exponent}`.
    pub window: f64,
}

/// Stay-put estimates from snapshots harvested with `window`.
pub fn stay_put_from_snapshots(
    snaps: &[Snapshot],
    window: f64,
    confidence: f64,
) -> Result<StayPutEstimate> {
    if snaps.is_empty() {
        return domain("no snapshots");
    }
    let stays = snaps.iter().filter(|s| s.stayed).count() as u64;
    let n = snaps.len() as u64;
    let (mean, se) = mean_and_se(snaps.iter().map(|s| (-window / s.tau).exp()));
    let z = normal_quantile(confidence);
    Ok(StayPutEstimate {
        direct: stays as f64 / n as f64,
        direct_ci: binomial_ci(stays, n, confidence)?,
        conditional: mean,
        conditional_ci: (mean - z * se, mean + z * se),
        window,
    })
}

/// Estimates `P{X^(N)_t = X^(N)_{t+s} for 0 <= s <= N^{-window_exponent}}`.
pub fn stay_put_probability(
    ensemble: &Ensemble,
    params: &WalkParams,
    t: f64,
    window_exponent: f64,
    confidence: f64,
) -> Result<StayPutEstimate> {
    let window = params.n().powf(1.0 - window_exponent);
    let snaps = ensemble.snapshots(params, t, window)?;
    stay_put_from_snapshots(&snaps, window, confidence)
}

/// `zeta_t = rho({Fin^theta_t})`.
pub fn sample_zeta_limit<R: Rng + ?Sized>(
    alpha: f64,
    theta: f64,
    t: f64,
    window: (f64, f64),
    cutoff: f64,
    rng: &mut R,
) -> Result<f64> {
    Ok(sample_fin(alpha, theta, t, window, cutoff, rng)?.weight)
}

/// Mean and standard error of `exp(-1/x)`; estimates `c(t)` or `k(t)` from limit samples.
pub fn mean_exp_neg_reciprocal(samples: &[f64]) -> (f64, f64) {
    mean_and_se(samples.iter().map(|&x| (-1.0 / x).exp()))
}

//! The verification battery: statistical checks of the simulators against
//! the limit laws and exact identities, with a JSON report and a
//! timing-free CSV summary.

use std::time::Instant;

use rand::{Rng, RngCore};
use serde::Serialize;

use crate::ageing::{
    conditional_laplace_truncated, mean_exp_neg_reciprocal, sample_s_limit, sample_zeta_limit,
    segment_decomposition, stay_put_from_snapshots, truncated_laplace_coefficient,
    u_laplace_limit, xi_tail_from_snapshots, xi_tail_renewal, Ensemble, SegmentDecomposition,
};
use crate::config::ExperimentConfig;
use crate::env::{open_unit, TrapEnvironment};
use crate::error::{Error, Result};
use crate::limits::{
    gamma, inverse_subordinator_marginal, path_inverse_marginal, sample_fin,
    scaling_constant_a, subordinator_marginal, truncated_mass_per_length, DEFAULT_CUTOFF,
    DEFAULT_WINDOW,
};
use crate::rng::{derive_seed, substream, Purpose, Runner};
use crate::stats::{
    binomial_ci, chi_square_gof, empirical_laplace, intervals_overlap, ks_one_sample,
    ks_threshold, ks_two_sample, mean_and_se, normal_quantile, EmpiricalDistribution, Reference,
};
use crate::walk::{
    embedded_walk_dips_below, local_time_functional, min_walk_probability, simulate_until,
    visits_to_origin, hitting_time, WalkParams, DEFAULT_STEP_BUDGET,
};

/// Version of the JSON report layout.
pub const REPORT_SCHEMA: u32 = 1;

const ALPHA: f64 = 0.5;
const MU: f64 = 1.0;

/// Settings shared by every check.
#[derive(Debug, Clone)]
pub struct VerifySettings {
    pub seed: u64,
    pub runner: Runner,
    pub step_budget: u64,
    pub fin_window: (f64, f64),
    pub fin_cutoff: f64,
    /// Case-insensitive substrings matched against check ids and names;
    /// empty selects everything.
    pub filter: Vec<String>,
    /// Replace the slow-regime constant by 1 so that its check must fail.
    pub negative_control: bool,
}

impl Default for VerifySettings {
    fn default() -> Self {
        Self {
            seed: 0,
            runner: Runner::from_env(),
            step_budget: DEFAULT_STEP_BUDGET,
            fin_window: DEFAULT_WINDOW,
            fin_cutoff: DEFAULT_CUTOFF,
            filter: Vec::new(),
            negative_control: false,
        }
    }
}

impl VerifySettings {
    pub fn from_config(config: &ExperimentConfig, runner: Runner) -> Self {
        Self {
            seed: config.seed,
            runner,
            step_budget: config.step_budget,
            fin_window: config.fin_window,
            fin_cutoff: config.fin_cutoff,
            ..Self::default()
        }
    }
}

/// Result of one check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub id: String,
    pub name: String,
    /// The statement under test.
    pub statement: String,
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
    pub detail: String,
    pub runtime_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerdictReport {
    pub schema: u32,
    pub seed: u64,
    pub negative_control: bool,
    pub pass: bool,
    pub checks: Vec<CheckRecord>,
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl VerdictReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// One row per check, without timing, so that reruns compare byte for byte.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("id,name,statistic,threshold,verdict,detail\n");
        for c in &self.checks {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                c.id,
                csv_field(&c.name),
                c.statistic,
                c.threshold,
                if c.pass { "pass" } else { "fail" },
                csv_field(&c.detail)
            ));
        }
        out
    }

    pub fn record(&self, id: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.id == id)
    }
}

/// Statistic, threshold and verdict produced by a check body.
#[derive(Debug, Clone)]
struct Outcome {
    statistic: f64,
    threshold: f64,
    pass: bool,
    detail: String,
}

/// Context handed to a check: settings plus a seed namespace of its own.
struct Ctx<'a> {
    settings: &'a VerifySettings,
    index: u64,
}

impl Ctx<'_> {
    fn seed(&self, k: u64) -> u64 {
        derive_seed(self.settings.seed, Purpose::Resample, (self.index << 16) | k)
    }

    fn stream(&self, k: u64) -> crate::rng::Stream {
        substream(self.seed(k), Purpose::Limit, 0)
    }

    fn ensemble(&self, k: u64, reps: usize) -> Ensemble {
        Ensemble::new(ALPHA, self.seed(k), reps, self.settings.runner)
    }

    fn budget(&self) -> u64 {
        self.settings.step_budget
    }

    /// Independent draws, one substream per replication.
    fn draws<F>(&self, k: u64, n: usize, f: F) -> Result<Vec<f64>>
    where
        F: Fn(&mut crate::rng::Stream) -> Result<f64> + Sync + Send,
    {
        let seed = self.seed(k);
        self.settings
            .runner
            .run(n, |i| f(&mut substream(seed, Purpose::Limit, i as u64)))
            .into_iter()
            .collect()
    }
}

type CheckFn = fn(&Ctx) -> Result<Outcome>;

/// A named entry of the battery.
pub struct Check {
    pub id: &'static str,
    pub name: &'static str,
    pub statement: &'static str,
    /// Wall-clock limit in seconds, when the check has one.
    pub time_limit: Option<f64>,
    run: CheckFn,
}

/// The full battery in execution order.
pub fn checks() -> &'static [Check] {
    &CHECKS
}

static CHECKS: [Check; 18] = [
    Check {
        id: "A1",
        name: "subordinator-transform",
        statement: "E exp(-lambda Sub_1) = exp(-Gamma(1-alpha) lambda^alpha)",
        time_limit: Some(10.0),
        run: check_subordinator_transform,
    },
    Check {
        id: "A2",
        name: "inverse-subordinator-cross",
        statement: "(s/Sub_1)^alpha and grid-path inversion give the same law of Sub^-1_s",
        time_limit: Some(30.0),
        run: check_inverse_cross,
    },
    Check {
        id: "A3",
        name: "min-walk-gamblers-ruin",
        statement: "P{min_k S_k <= -x} = (q/p)^x for the embedded walk",
        time_limit: Some(60.0),
        run: check_min_walk,
    },
    Check {
        id: "A4",
        name: "origin-local-time-geometric",
        statement: "visits of the embedded walk to 0 are geometric with success mu N^-beta",
        time_limit: None,
        run: check_origin_visits,
    },
    Check {
        id: "A5",
        name: "local-time-functional",
        statement: "(1/x) sum_z psi(l(z)/N^beta) -> int psi(y) mu e^{-mu y} dy, psi = sqrt",
        time_limit: None,
        run: check_local_time_functional,
    },
    Check {
        id: "A6",
        name: "hitting-time-transform",
        statement: "E exp(-lambda T_x/N) -> exp(-a lambda^alpha Gamma(1-alpha)) at x = a mu^alpha N^{alpha(1-beta)}/Gamma(1+alpha)",
        time_limit: Some(600.0),
        run: check_hitting_transform,
    },
    Check {
        id: "A7",
        name: "slow-regime-marginal",
        statement: "X_1/N^{alpha(1-beta)} -> (mu^alpha/Gamma(1+alpha)) Sub^-1_1",
        time_limit: None,
        run: check_slow_marginal,
    },
    Check {
        id: "A8",
        name: "fast-regime-marginal",
        statement: "mu = 0: X_1/N^{alpha/(alpha+1)} -> Fin^0_1",
        time_limit: None,
        run: check_fast_marginal,
    },
    Check {
        id: "A9",
        name: "critical-regime-marginal",
        statement: "beta = alpha/(alpha+1): X_1/N^beta -> Fin^mu_1",
        time_limit: None,
        run: check_critical_marginal,
    },
    Check {
        id: "A10",
        name: "deep-trap-gaps",
        statement: "deep-trap gaps / N^{alpha(1-beta)} -> Exp(mean v^alpha)",
        time_limit: None,
        run: check_deep_gaps,
    },
    Check {
        id: "A11",
        name: "deep-trap-visits",
        statement: "visits to a deep trap before the next one, / N^beta -> Exp(mean 1/mu)",
        time_limit: None,
        run: check_deep_visits,
    },
    Check {
        id: "A12",
        name: "sitting-time-limit",
        statement: "S_j/(vN) -> Pareto(alpha) x Exp(mean 1/mu)",
        time_limit: None,
        run: check_sitting_limit,
    },
    Check {
        id: "A13",
        name: "travel-time-transform",
        statement: "E exp(-lambda U_j/(vN)) -> u_laplace_limit(alpha, mu, lambda)",
        time_limit: None,
        run: check_travel_transform,
    },
    Check {
        id: "A14",
        name: "xi-direct-vs-renewal",
        statement: "P{tau_{X_t} > v N^{1-beta}}: direct frequency agrees with the renewal representation",
        time_limit: None,
        run: check_xi_cross,
    },
    Check {
        id: "A15",
        name: "slow-regime-stay-put",
        statement: "P{no jump in [t, t+N^-beta]} -> c(t) = E exp(-1/xi_t); direct = conditional estimator",
        time_limit: None,
        run: check_stay_put_slow,
    },
    Check {
        id: "A16",
        name: "fast-regime-zeta",
        statement: "tau_{X_t}/N^{1/(alpha+1)} -> zeta_t = rho({Fin_t}); stay-put -> k(t) = E exp(-1/zeta_t)",
        time_limit: None,
        run: check_zeta,
    },
    Check {
        id: "A17",
        name: "excursion-time-trend",
        statement: "median R_j/N decreases along N = 1e3, 1e4, 1e5",
        time_limit: None,
        run: check_excursion_trend,
    },
    Check {
        id: "A18",
        name: "truncated-transform-expansion",
        statement: "E[exp(-lambda tau/y) | tau <= y] = 1 + C(lambda) y^-alpha + o(y^-alpha)",
        time_limit: None,
        run: check_truncated_transform,
    },
];

/// Checks whose id or name contains one of the filter strings.
pub fn select(filter: &[String]) -> Result<Vec<&'static Check>> {
    let wanted: Vec<String> = filter
        .iter()
        .map(|f| f.trim().to_ascii_lowercase())
        .filter(|f| !f.is_empty())
        .collect();
    let picked: Vec<&Check> = CHECKS
        .iter()
        .filter(|c| {
            wanted.is_empty()
                || wanted.iter().any(|w| {
                    c.id.eq_ignore_ascii_case(w) || c.name.contains(w.as_str())
                })
        })
        .collect();
    if picked.is_empty() {
        return Err(Error::Config(format!(
            "check filter {filter:?} matches no check"
        )));
    }
    Ok(picked)
}

/// Runs the selected checks. Aborts inside a check become failed records.
pub fn run_verify(settings: &VerifySettings) -> Result<VerdictReport> {
    let selected = select(&settings.filter)?;
    let mut records = Vec::with_capacity(selected.len());
    for check in selected {
        let index = CHECKS
            .iter()
            .position(|c| c.id == check.id)
            .expect("selected from the table") as u64;
        let ctx = Ctx { settings, index };
        let start = Instant::now();
        let result = (check.run)(&ctx);
        let runtime_s = start.elapsed().as_secs_f64();
        let mut record = match result {
            Ok(o) => CheckRecord {
                id: check.id.into(),
                name: check.name.into(),
                statement: check.statement.into(),
                statistic: o.statistic,
                threshold: o.threshold,
                pass: o.pass,
                detail: o.detail,
                runtime_s,
            },
            Err(e) => CheckRecord {
                id: check.id.into(),
                name: check.name.into(),
                statement: check.statement.into(),
                statistic: f64::NAN,
                threshold: f64::NAN,
                pass: false,
                detail: format!("aborted: {e}"),
                runtime_s,
            },
        };
        if let Some(limit) = check.time_limit {
            if runtime_s > limit {
                record.pass = false;
                record.detail.push_str(&format!("; exceeded time limit {limit}s"));
            }
        }
        log::info!(
            "{} {} statistic={} threshold={} {}",
            record.id,
            record.name,
            record.statistic,
            record.threshold,
            if record.pass { "pass" } else { "fail" }
        );
        records.push(record);
    }
    Ok(VerdictReport {
        schema: REPORT_SCHEMA,
        seed: settings.seed,
        negative_control: settings.negative_control,
        pass: records.iter().all(|r| r.pass),
        checks: records,
    })
}

fn ed(samples: Vec<f64>) -> Result<EmpiricalDistribution> {
    EmpiricalDistribution::new(samples)
}

fn exp_cdf(mean: f64) -> impl Fn(f64) -> f64 {
    move |x: f64| if x <= 0.0 { 0.0 } else { -(-x / mean).exp_m1() }
}

fn check_subordinator_transform(ctx: &Ctx) -> Result<Outcome> {
    const N: usize = 100_000;
    let mut worst = 0.0f64;
    let mut detail = Vec::new();
    for (k, &alpha) in [0.3, 0.5, 0.8].iter().enumerate() {
        let sample = ed(ctx.draws(k as u64, N, |rng| subordinator_marginal(alpha, 1.0, rng))?)?;
        for &lambda in &[0.5, 1.0, 2.0] {
            let (m, se) = empirical_laplace(&sample, lambda)?;
            let exact = (-gamma(1.0 - alpha) * lambda.powf(alpha)).exp();
            let z = (m - exact).abs() / se;
            worst = worst.max(z);
            detail.push(format!("a={alpha} l={lambda} z={z:.3}"));
        }
    }
    Ok(Outcome {
        statistic: worst,
        threshold: 3.0,
        pass: worst < 3.0,
        detail: detail.join("; "),
    })
}

fn check_inverse_cross(ctx: &Ctx) -> Result<Outcome> {
    const N: usize = 10_000;
    let marginal = ed(ctx.draws(0, N, |rng| inverse_subordinator_marginal(ALPHA, 1.0, rng))?)?;
    let path = ed(ctx.draws(1, N, |rng| path_inverse_marginal(ALPHA, 1.0, 1e-3, rng))?)?;
    let d = ks_two_sample(&marginal, &path);
    let thr = ks_threshold(N, Reference::Sample(N), 0.01)?;
    Ok(Outcome {
        statistic: d,
        threshold: thr,
        pass: d < thr,
        detail: format!("alpha={ALPHA} s=1 dt=1e-3 n=m={N}"),
    })
}

fn check_min_walk(ctx: &Ctx) -> Result<Outcome> {
    const N: usize = 10_000;
    let params = WalkParams::new(100, 0.5, MU)?;
    let mut worst = 0.0f64;
    let mut detail = Vec::new();
    for (k, &x) in [1u64, 5, 10].iter().enumerate() {
        let hits = ctx.draws(k as u64, N, |rng| {
            let dips = embedded_walk_dips_below(&params, x, 1e-12, ctx.budget(), rng)?;
            Ok(if dips { 1.0 } else { 0.0 })
        })?;
        let freq = hits.iter().sum::<f64>() / N as f64;
        let exact = min_walk_probability(&params, x);
        let se = (exact * (1.0 - exact) / N as f64).sqrt();
        let z = (freq - exact).abs() / se;
        worst = worst.max(z);
        detail.push(format!("x={x} freq={freq:.4} exact={exact:.6} z={z:.3}"));
    }
    Ok(Outcome {
        statistic: worst,
        threshold: 3.0,
        pass: worst < 3.0,
        detail: detail.join("; "),
    })
}

fn check_origin_visits(ctx: &Ctx) -> Result<Outcome> {
    const N: usize = 10_000;
    const BINS: usize = 50;
    let params = WalkParams::new(10_000, 0.25, MU)?;
    let counts = ctx.draws(0, N, |rng| {
        Ok(visits_to_origin(&params, 1e-12, ctx.budget(), rng)? as f64)
    })?;
    let s = params.mu() / params.n_beta();
    let mut observed = vec![0u64; BINS + 1];
    for c in counts {
        let k = c as usize;
        observed[(k - 1).min(BINS)] += 1;
    }
    let mut expected: Vec<f64> = (1..=BINS)
        .map(|k| N as f64 * s * (1.0 - s).powi(k as i32 - 1))
        .collect();
    expected.push(N as f64 * (1.0 - s).powi(BINS as i32));
    let chi = chi_square_gof(&observed, &expected)?;
    Ok(Outcome {
        statistic: chi.p_value,
        threshold: 0.01,
        pass: chi.p_value > 0.01,
        detail: format!(
            "chi2={:.2} dof={} success={s} n={N}",
            chi.statistic, chi.dof
        ),
    })
}

fn check_local_time_functional(ctx: &Ctx) -> Result<Outcome> {
    const REPS: usize = 400;
    let params = WalkParams::new(10_000, 0.25, MU)?;
    let x = (100.0 * params.n_beta()).round() as i64;
    let values = ctx.draws(0, REPS, |rng| {
        Ok(local_time_functional(&params, x, f64::sqrt, ctx.budget(), rng)?.value)
    })?;
    let (mean, se) = mean_and_se(values.iter().copied());
    let limit = gamma(1.5) / MU.powf(0.5);
    let rel = (mean / limit - 1.0).abs();
    Ok(Outcome {
        statistic: rel,
        threshold: 0.05,
        pass: rel < 0.05,
        detail: format!("mean={mean:.5} se={se:.5} limit={limit:.5} x={x} reps={REPS}"),
    })
}

fn check_hitting_transform(ctx: &Ctx) -> Result<Outcome> {
    const REPS: usize = 2000;
    let (n, beta) = (10_000u64, 0.2);
    let params = WalkParams::new(n, beta, MU)?;
    let scale = MU.powf(ALPHA) * params.n().powf(ALPHA * (1.0 - beta)) / gamma(1.0 + ALPHA);
    let x = scale.round().max(1.0) as i64;
    // the barrier is an integer, so the level a is the realized one
    let a = x as f64 / scale;
    let times = ctx.ensemble(0, REPS).map(|env, rng| {
        Ok(hitting_time(env, &params, x, ctx.budget(), rng)?.time / params.n())
    })?;
    let sample = ed(times)?;
    let mut worst = 0.0f64;
    let mut detail = vec![format!("x={x} a={a:.5}")];
    for &lambda in &[0.5, 1.0, 2.0] {
        let (m, se) = empirical_laplace(&sample, lambda)?;
        let target = (-a * lambda.powf(ALPHA) * gamma(1.0 - ALPHA)).exp();
        let ratio = (m - target).abs() / (3.0 * se + 0.02);
        worst = worst.max(ratio);
        detail.push(format!("l={lambda} mean={m:.4} target={target:.4} se={se:.4}"));
    }
    Ok(Outcome {
        statistic: worst,
        threshold: 1.0,
        pass: worst < 1.0,
        detail: detail.join("; "),
    })
}

/// `X^(N)_t / scale` over an ensemble.
fn rescaled_positions(ens: &Ensemble, params: &WalkParams, t: f64, scale: f64) -> Result<Vec<f64>> {
    ens.map(|env, rng| Ok(simulate_until(env, params, t, rng)?.position_at(t)? as f64 / scale))
}

fn check_slow_marginal(ctx: &Ctx) -> Result<Outcome> {
    const REPS: usize = 2000;
    const LIMIT_REPS: usize = 10_000;
    let beta = 0.2;
    let constant = if ctx.settings.negative_control {
        1.0
    } else {
        scaling_constant_a(ALPHA, MU)?
    };
    let limit = ed(ctx.draws(0, LIMIT_REPS, |rng| {
        Ok(constant * inverse_subordinator_marginal(ALPHA, 1.0, rng)?)
    })?)?;
    let mut d = Vec::new();
    for (k, n) in [100_000u64, 1000].into_iter().enumerate() {
        let params = WalkParams::new(n, beta, MU)?;
        let scale = params.n().powf(ALPHA * (1.0 - beta));
        let xs = ed(rescaled_positions(&ctx.ensemble(1 + k as u64, REPS), &params, 1.0, scale)?)?;
        d.push(ks_two_sample(&xs, &limit));
    }
    let (d_big, d_small) = (d[0], d[1]);
    Ok(Outcome {
        statistic: d_big,
        threshold: 0.05,
        pass: d_big < 0.05 && d_big < d_small,
        detail: format!(
            "D(N=1e5)={d_big:.4} D(N=1e3)={d_small:.4} constant={constant:.6} n={REPS} m={LIMIT_REPS}"
        ),
    })
}

/// KS distance between the rescaled walk and FIN samples, plus the effect of
/// halving the measure cutoff on FIN deciles.
fn fin_marginal(ctx: &Ctx, params: &WalkParams, theta: f64) -> Result<Outcome> {
    const REPS: usize = 2000;
    let scale = params.n().powf(ALPHA / (ALPHA + 1.0));
    let walk = ed(rescaled_positions(&ctx.ensemble(0, REPS), params, 1.0, scale)?)?;
    let (window, cutoff) = (ctx.settings.fin_window, ctx.settings.fin_cutoff);
    let fin = ed(ctx.draws(1, REPS, |rng| {
        Ok(sample_fin(ALPHA, theta, 1.0, window, cutoff, rng)?.value)
    })?)?;
    let finer = ed(ctx.draws(2, REPS, |rng| {
        Ok(sample_fin(ALPHA, theta, 1.0, window, cutoff / 2.0, rng)?.value)
    })?)?;
    let shift = fin
        .deciles()
        .iter()
        .zip(finer.deciles().iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let bound = truncated_mass_per_length(ALPHA, cutoff) * (window.1 - window.0);
    let d = ks_two_sample(&walk, &fin);
    Ok(Outcome {
        statistic: d,
        threshold: 0.08,
        pass: d < 0.08 && shift < bound,
        detail: format!(
            "N={} theta={theta} decile shift on cutoff halving={shift:.4} bound={bound:.4} n=m={REPS}",
            params.n()
        ),
    })
}

fn check_fast_marginal(ctx: &Ctx) -> Result<Outcome> {
    fin_marginal(ctx, &WalkParams::new(100_000, 0.5, 0.0)?, 0.0)
}

fn check_critical_marginal(ctx: &Ctx) -> Result<Outcome> {
    fin_marginal(ctx, &WalkParams::new(100_000, ALPHA / (ALPHA + 1.0), MU)?, MU)
}

/// Integer-valued samples are spread uniformly over the unit below each
/// value before rescaling, so that a KS test against a continuous law sees
/// no lattice steps.
fn jitter<R: Rng + ?Sized>(k: u64, scale: f64, rng: &mut R) -> f64 {
    (k as f64 - open_unit(rng.next_u64())) / scale
}

fn check_deep_gaps(ctx: &Ctx) -> Result<Outcome> {
    const REPS: usize = 2000;
    let (n, beta, v) = (10_000f64, 0.2, 1.0);
    let threshold = v * n.powf(1.0 - beta);
    let scale = n.powf(ALPHA * (1.0 - beta));
    let seed = ctx.seed(0);
    let gaps = ctx.settings.runner.run(REPS, |rep| -> Result<(u64, f64)> {
        let mut env = TrapEnvironment::new(ALPHA, derive_seed(seed, Purpose::Environment, rep as u64))?;
        let first = env
            .next_deep_trap(0, threshold, i64::MAX)
            .ok_or_else(|| Error::Numeric("no deep trap found".into()))?;
        let second = env
            .next_deep_trap(first, threshold, i64::MAX)
            .ok_or_else(|| Error::Numeric("no deep trap found".into()))?;
        let gap = (second - first) as u64;
        let mut rng = substream(seed, Purpose::Resample, rep as u64);
        Ok((gap, jitter(gap, scale, &mut rng)))
    });
    let gaps = gaps.into_iter().collect::<Result<Vec<_>>>()?;
    let raw = ed(gaps.iter().map(|g| g.0 as f64 / scale).collect())?;
    let smooth = ed(gaps.iter().map(|g| g.1).collect())?;
    let cdf = exp_cdf(v.powf(ALPHA));
    let d = ks_one_sample(&smooth, &cdf);
    let thr = ks_threshold(REPS, Reference::Analytic, 0.01)?;
    Ok(Outcome {
        statistic: d,
        threshold: thr,
        pass: d < thr,
        detail: format!(
            "jittered gaps; unjittered D={:.4}; N=1e4 beta={beta} v={v} n={REPS}",
            ks_one_sample(&raw, &cdf)
        ),
    })
}

/// One decomposition per replication, up to the `horizon`-th deep trap.
fn harvest(
    ctx: &Ctx,
    k: u64,
    reps: usize,
    params: &WalkParams,
    v: f64,
    horizon: usize,
) -> Result<Vec<SegmentDecomposition>> {
    ctx.ensemble(k, reps)
        .map(|env, rng| segment_decomposition(env, params, v, horizon, ctx.budget(), rng))
}

fn check_deep_visits(ctx: &Ctx) -> Result<Outcome> {
    const REPS: usize = 2000;
    let params = WalkParams::new(10_000, 0.25, MU)?;
    let segs = harvest(ctx, 0, REPS, &params, 1.0, 2)?;
    let mut rng = ctx.stream(1);
    let nb = params.n_beta();
    let raw = ed(segs.iter().map(|s| s.visits[1] as f64 / nb).collect())?;
    let smooth = ed(segs.iter().map(|s| jitter(s.visits[1], nb, &mut rng)).collect())?;
    let cdf = exp_cdf(1.0 / MU);
    let d = ks_one_sample(&smooth, &cdf);
    let thr = ks_threshold(REPS, Reference::Analytic, 0.01)?;
    Ok(Outcome {
        statistic: d,
        threshold: thr,
        pass: d < thr,
        detail: format!(
            "jittered counts; unjittered D={:.4}; N=1e4 beta=0.25 j=1 n={REPS}",
            ks_one_sample(&raw, &cdf)
        ),
    })
}

fn check_sitting_limit(ctx: &Ctx) -> Result<Outcome> {
    const REPS: usize = 2000;
    const LIMIT_REPS: usize = 10_000;
    let (v, params) = (1.0, WalkParams::new(100_000, 0.2, MU)?);
    let segs = harvest(ctx, 0, REPS, &params, v, 2)?;
    let sitting = ed(segs.iter().map(|s| s.sitting[1] / (v * params.n())).collect())?;
    let limit = ed(ctx.draws(1, LIMIT_REPS, |rng| sample_s_limit(ALPHA, MU, rng))?)?;
    let d = ks_two_sample(&sitting, &limit);
    let thr = ks_threshold(REPS, Reference::Sample(LIMIT_REPS), 0.01)?;
    Ok(Outcome {
        statistic: d,
        threshold: thr,
        pass: d < thr,
        detail: format!("N=1e5 beta=0.2 v={v} j=1 n={REPS} m={LIMIT_REPS}"),
    })
}

fn check_travel_transform(ctx: &Ctx) -> Result<Outcome> {
    const REPS: usize = 2000;
    let (v, params) = (1.0, WalkParams::new(100_000, 0.2, MU)?);
    let segs = harvest(ctx, 0, REPS, &params, v, 2)?;
    let travel = ed(segs.iter().map(|s| s.travel[2] / (v * params.n())).collect())?;
    let (m, se) = empirical_laplace(&travel, 1.0)?;
    let target = u_laplace_limit(ALPHA, MU, 1.0)?;
    let ratio = (m - target).abs() / (3.0 * se + 0.03);
    Ok(Outcome {
        statistic: ratio,
        threshold: 1.0,
        pass: ratio < 1.0,
        detail: format!("mean={m:.4} se={se:.4} target={target:.4} N=1e5 j=2 n={REPS}"),
    })
}

fn check_xi_cross(ctx: &Ctx) -> Result<Outcome> {
    const REPS: usize = 2000;
    const DRAWS: usize = 100_000;
    let (t, v) = (1.0, 1.0);
    let params = WalkParams::new(100_000, 0.2, MU)?;
    let snaps = ctx.ensemble(0, REPS).snapshots(&params, t, 0.0)?;
    let direct = xi_tail_from_snapshots(&snaps, &params, t, &[v], 0.95)?.tails[0];
    let segs = harvest(ctx, 1, REPS, &params, v, 2)?;
    let pool: Vec<f64> = segs.iter().map(|s| s.travel[2] / (v * params.n())).collect();
    let mut rng = ctx.stream(2);
    let renewal = xi_tail_renewal(t, v, &pool, ALPHA, MU, 500, DRAWS, 1e-3, 0.95, &mut rng)?;
    let overlap = intervals_overlap(direct.ci, renewal.ci);
    Ok(Outcome {
        statistic: (direct.estimate - renewal.estimate).abs(),
        threshold: (direct.ci.1 - direct.ci.0 + renewal.ci.1 - renewal.ci.0) / 2.0,
        pass: overlap,
        detail: format!(
            "direct={:.4} [{:.4},{:.4}] renewal={:.4} [{:.4},{:.4}]",
            direct.estimate, direct.ci.0, direct.ci.1, renewal.estimate, renewal.ci.0, renewal.ci.1
        ),
    })
}

fn normal_ci(samples: &[f64], confidence: f64) -> (f64, f64, f64) {
    let (m, se) = mean_and_se(samples.iter().copied());
    let z = normal_quantile(confidence);
    (m, m - z * se, m + z * se)
}

fn check_stay_put_slow(ctx: &Ctx) -> Result<Outcome> {
    const REPS: usize = 2000;
    let t = 1.0;
    let params = WalkParams::new(100_000, 0.2, MU)?;
    let window = params.n().powf(1.0 - params.beta());
    let snaps = ctx.ensemble(0, REPS).snapshots(&params, t, window)?;
    let est = stay_put_from_snapshots(&snaps, window, 0.95)?;
    // c(t) from an independent harvest of xi = tau_{X_t}/N^{1-beta}
    let xi: Vec<f64> = ctx
        .ensemble(1, REPS)
        .snapshots(&params, t, 0.0)?
        .iter()
        .map(|s| (-window / s.tau).exp())
        .collect();
    let (c, c_lo, c_hi) = normal_ci(&xi, 0.95);
    let limit_ok = intervals_overlap(est.direct_ci, (c_lo, c_hi));
    let identity_ok = intervals_overlap(est.direct_ci, est.conditional_ci);
    Ok(Outcome {
        statistic: (est.direct - c).abs(),
        threshold: (est.direct_ci.1 - est.direct_ci.0 + c_hi - c_lo) / 2.0,
        pass: limit_ok && identity_ok,
        detail: format!(
            "direct={:.4} [{:.4},{:.4}] conditional={:.4} [{:.4},{:.4}] c={c:.4} [{c_lo:.4},{c_hi:.4}]",
            est.direct,
            est.direct_ci.0,
            est.direct_ci.1,
            est.conditional,
            est.conditional_ci.0,
            est.conditional_ci.1
        ),
    })
}

fn check_zeta(ctx: &Ctx) -> Result<Outcome> {
    const REPS: usize = 2000;
    let t = 1.0;
    let params = WalkParams::new(100_000, 0.5, 0.0)?;
    let scale = params.n().powf(1.0 / (ALPHA + 1.0));
    let snaps = ctx.ensemble(0, REPS).snapshots(&params, t, scale)?;
    let depth = ed(snaps.iter().map(|s| s.tau / scale).collect())?;
    let (window, cutoff) = (ctx.settings.fin_window, ctx.settings.fin_cutoff);
    let zeta = ctx.draws(1, REPS, |rng| sample_zeta_limit(ALPHA, 0.0, t, window, cutoff, rng))?;
    let (k, k_se) = mean_exp_neg_reciprocal(&zeta);
    let z = normal_quantile(0.95);
    let k_ci = (k - z * k_se, k + z * k_se);
    let stays = snaps.iter().filter(|s| s.stayed).count() as u64;
    let direct = stays as f64 / REPS as f64;
    let direct_ci = binomial_ci(stays, REPS as u64, 0.95)?;
    let d = ks_two_sample(&depth, &ed(zeta)?);
    Ok(Outcome {
        statistic: d,
        threshold: 0.08,
        pass: d < 0.08 && intervals_overlap(k_ci, direct_ci),
        detail: format!(
            "k={k:.4} [{:.4},{:.4}] stay-put={direct:.4} [{:.4},{:.4}] N=1e5 n=m={REPS}",
            k_ci.0, k_ci.1, direct_ci.0, direct_ci.1
        ),
    })
}

fn check_excursion_trend(ctx: &Ctx) -> Result<Outcome> {
    const REPS: usize = 1000;
    let v = 1.0;
    let mut medians = Vec::new();
    for (k, n) in [1000u64, 10_000, 100_000].into_iter().enumerate() {
        let params = WalkParams::new(n, 0.2, MU)?;
        let segs = harvest(ctx, k as u64, REPS, &params, v, 2)?;
        let r = ed(segs.iter().map(|s| s.excursions[1] / params.n()).collect())?;
        medians.push(r.median());
    }
    let decreasing = medians.windows(2).all(|w| w[1] < w[0]);
    Ok(Outcome {
        statistic: medians[2],
        threshold: medians[0],
        pass: decreasing,
        detail: format!(
            "median R/N: N=1e3 {:.5}, N=1e4 {:.5}, N=1e5 {:.5}; j=1 reps={REPS}",
            medians[0], medians[1], medians[2]
        ),
    })
}

fn check_truncated_transform(ctx: &Ctx) -> Result<Outcome> {
    const CHUNKS: usize = 100;
    const PER_CHUNK: usize = 100_000;
    let (y, lambda) = (1000.0f64, 1.0);
    let floor = y.powf(-ALPHA);
    let seed = ctx.seed(0);
    // tau conditioned on tau <= y: u uniform on (y^-alpha, 1), tau = u^{-1/alpha}
    let sums = ctx.settings.runner.run(CHUNKS, |c| {
        let mut rng = substream(seed, Purpose::Limit, c as u64);
        (0..PER_CHUNK)
            .map(|_| {
                let u = floor + (1.0 - floor) * open_unit(rng.next_u64());
                (-(lambda / y) * u.powf(-1.0 / ALPHA)).exp_m1()
            })
            .sum::<f64>()
    });
    let n = (CHUNKS * PER_CHUNK) as f64;
    let estimate = sums.iter().sum::<f64>() / n * y.powf(ALPHA);
    let exact = truncated_laplace_coefficient(ALPHA, lambda)?;
    let rel = (estimate / exact - 1.0).abs();
    Ok(Outcome {
        statistic: rel,
        threshold: 0.1,
        pass: rel < 0.1,
        detail: format!(
            "MC coefficient={estimate:.5} expansion={exact:.5} (two-term value {:.6}) y={y} n={n:e}",
            conditional_laplace_truncated(ALPHA, y, lambda)?
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_selection_is_an_error() {
        assert!(select(&["no-such-check".into()]).is_err());
        assert_eq!(select(&[]).unwrap().len(), 18);
        let one = select(&["a7".into()]).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].id, "A7");
        assert_eq!(select(&["trend".into()]).unwrap()[0].id, "A17");
    }

    #[test]
    fn ids_are_unique_and_ordered() {
        for (i, c) in checks().iter().enumerate() {
            assert_eq!(c.id, format!("A{}", i + 1));
        }
    }

    #[test]
    fn csv_has_no_timing_and_quotes_commas() {
        let report = VerdictReport {
            schema: REPORT_SCHEMA,
            seed: 3,
            negative_control: false,
            pass: false,
            checks: vec![CheckRecord {
                id: "A1".into(),
                name: "x".into(),
                statement: "s".into(),
                statistic: 0.5,
                threshold: 1.0,
                pass: false,
                detail: "a, b".into(),
                runtime_s: 12.0,
            }],
        };
        let csv = report.to_csv();
        assert_eq!(csv, "id,name,statistic,threshold,verdict,detail\nA1,x,0.5,1,fail,\"a, b\"\n");
        assert!(report.to_json().contains("\"schema\": 1"));
    }

    #[test]
    fn quick_checks_pass_and_report_is_a_conjunction() {
        let settings = VerifySettings {
            filter: vec!["A18".into(), "A3".into()],
            runner: Runner::serial(),
            ..VerifySettings::default()
        };
        let report = run_verify(&settings).unwrap();
        assert_eq!(report.checks.len(), 2);
        assert_eq!(report.pass, report.checks.iter().all(|c| c.pass));
        assert!(report.pass, "{report:?}");
    }
}

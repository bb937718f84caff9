//! Command-line front end. Every subcommand writes CSV with a header row to
//! `--out` or standard output.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::ageing::{segment_decomposition, xi_renewal_estimate, xi_tail_direct, Ensemble};
use crate::config::{parse_config, ExperimentConfig};
use crate::error::{Error, Result};
use crate::limits::{
    inverse_subordinator_marginal, path_inverse_marginal, sample_fin, subordinator_marginal,
};
use crate::rng::{substream, Purpose, Runner};
use crate::verify::{run_verify, VerifySettings};
use crate::walk::{hitting_time, simulate_until, WalkParams};

/// Exit status of a finished command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass = 0,
    CheckFailure = 1,
    Usage = 2,
    Abort = 3,
}

impl Status {
    pub fn of_error(e: &Error) -> Self {
        match e {
            Error::Config(_) | Error::Domain(_) | Error::Range(_) => Status::Usage,
            _ => Status::Abort,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "trapscale", version, about = "Trap model with vanishing drift: simulation and limit-law checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Settings shared by all subcommands; each maps onto a configuration key.
#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// key=value configuration file; flags override its entries.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub alpha: Option<String>,
    #[arg(long, global = true)]
    pub beta: Option<String>,
    #[arg(long, global = true)]
    pub mu: Option<String>,
    /// Comma-separated list of N values.
    #[arg(long = "bigN", alias = "bign", global = true)]
    pub big_n: Option<String>,
    /// Comma-separated list of rescaled times.
    #[arg(long, global = true)]
    pub t: Option<String>,
    #[arg(long = "v-grid", global = true)]
    pub v_grid: Option<String>,
    #[arg(long, global = true)]
    pub reps: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<String>,
    #[arg(long = "step-budget", global = true)]
    pub step_budget: Option<String>,
    /// FIN measure window `lo..hi`.
    #[arg(long = "fin-window", global = true, allow_hyphen_values = true)]
    pub fin_window: Option<String>,
    #[arg(long = "fin-cutoff", global = true)]
    pub fin_cutoff: Option<String>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

impl Common {
    fn overrides(&self) -> Vec<(String, String)> {
        let pairs = [
            ("alpha", &self.alpha),
            ("beta", &self.beta),
            ("mu", &self.mu),
            ("bigN", &self.big_n),
            ("t", &self.t),
            ("v_grid", &self.v_grid),
            ("reps", &self.reps),
            ("seed", &self.seed),
            ("step_budget", &self.step_budget),
            ("fin_window", &self.fin_window),
            ("fin_cutoff", &self.fin_cutoff),
        ];
        let mut out: Vec<(String, String)> = pairs
            .iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
            .collect();
        if let Some(p) = &self.out {
            out.push(("out".into(), p.display().to_string()));
        }
        out
    }

    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let text = match &self.config {
            Some(path) => Some(fs::read_to_string(path).map_err(|e| {
                Error::Config(format!("config file {}: {e}", path.display()))
            })?),
            None => None,
        };
        parse_config(text.as_deref(), &self.overrides())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SubordinatorMode {
    Marginal,
    Inverse,
    Path,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Trap depths `site,tau` over a range of sites.
    Env {
        #[command(flatten)]
        common: Common,
        /// Sites `LO..HI`, inclusive.
        #[arg(long, allow_hyphen_values = true)]
        range: String,
    },
    /// Positions `rep,t,site` on the grid given by `--t`.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Simulation horizon; defaults to the largest grid time.
        #[arg(long)]
        tmax: Option<f64>,
    },
    /// Hitting times `rep,T_over_N` of a site.
    Hitting {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        x: i64,
    },
    /// Deep-trap decomposition rows `rep,j,U,S,R,ell`.
    Segments {
        #[command(flatten)]
        common: Common,
        /// Number of deep traps to pass.
        #[arg(long, default_value_t = 2)]
        horizon: usize,
    },
    /// Tail estimates of `xi_t`: `v,method,estimate,ci_lo,ci_hi`.
    Ageing {
        #[command(flatten)]
        common: Common,
        /// Renewal draws per threshold.
        #[arg(long, default_value_t = 100_000)]
        draws: usize,
        /// Renewal periods per draw before truncation.
        #[arg(long = "j-max", default_value_t = 500)]
        j_max: usize,
    },
    /// FIN diffusion samples `rep,value,weight`.
    Fin {
        #[command(flatten)]
        common: Common,
    },
    /// Subordinator samples `rep,value` at time (or level) `--t`.
    Subordinator {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = SubordinatorMode::Marginal)]
        mode: SubordinatorMode,
        /// Grid step for path inversion.
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
    },
    /// Runs the verification battery.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Only checks whose id or name contains one of these (comma-separated).
        #[arg(long, value_delimiter = ',')]
        filter: Vec<String>,
        /// Replace the slow-regime constant by 1; the affected check must fail.
        #[arg(long = "negative-control")]
        negative_control: bool,
        /// JSON report path.
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    let io_err = |e: io::Error| Error::Config(format!("cannot write output: {e}"));
    match path {
        Some(p) => fs::write(p, text).map_err(io_err),
        None => io::stdout().write_all(text.as_bytes()).map_err(io_err),
    }
}

fn single<T: Copy + std::fmt::Debug>(name: &str, list: &[T]) -> T {
    if list.len() > 1 {
        log::warn!("{name}: using the first of {list:?}");
    }
    list[0]
}

fn params(config: &ExperimentConfig) -> Result<WalkParams> {
    WalkParams::new(single("bigN", &config.big_n), config.beta, config.mu)
}

fn ensemble(config: &ExperimentConfig, runner: Runner) -> Ensemble {
    Ensemble::new(config.alpha, config.seed, config.reps, runner)
}

fn parse_sites(range: &str) -> Result<(i64, i64)> {
    let bad = || Error::Config(format!("range: expected LO..HI, got '{range}'"));
    let (lo, hi) = range.split_once("..").ok_or_else(bad)?;
    let lo: i64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: i64 = hi.trim().parse().map_err(|_| bad())?;
    if lo > hi {
        return Err(Error::Config(format!("range: LO={lo} exceeds HI={hi}")));
    }
    Ok((lo, hi))
}

/// Executes a parsed command line.
pub fn run(cli: Cli, runner: Runner) -> Result<Status> {
    match cli.command {
        Command::Env { common, range } => {
            let config = common.resolve()?;
            let (lo, hi) = parse_sites(&range)?;
            let env = crate::env::TrapEnvironment::new(config.alpha, config.seed)?;
            let mut out = String::from("site,tau\n");
            for z in lo..=hi {
                out.push_str(&format!("{z},{}\n", env.compute_tau(z)));
            }
            write_output(config.out.as_deref(), &out)?;
        }
        Command::Simulate { common, tmax } => {
            let config = common.resolve()?;
            let params = params(&config)?;
            let grid = config.t.clone();
            let horizon = tmax.unwrap_or_else(|| grid.iter().copied().fold(0.0, f64::max));
            if let Some(t) = grid.iter().find(|&&t| t > horizon) {
                return Err(Error::Config(format!("t={t} lies beyond tmax={horizon}")));
            }
            let rows = ensemble(&config, runner).map(|env, rng| {
                let path = simulate_until(env, &params, horizon, rng)?;
                grid.iter().map(|&t| path.position_at(t)).collect::<Result<Vec<_>>>()
            })?;
            let mut out = String::from("rep,t,site\n");
            for (rep, sites) in rows.iter().enumerate() {
                for (t, site) in grid.iter().zip(sites) {
                    out.push_str(&format!("{rep},{t},{site}\n"));
                }
            }
            write_output(config.out.as_deref(), &out)?;
        }
        Command::Hitting { common, x } => {
            let config = common.resolve()?;
            let params = params(&config)?;
            let times = ensemble(&config, runner).map(|env, rng| {
                Ok(hitting_time(env, &params, x, config.step_budget, rng)?.time / params.n())
            })?;
            let mut out = String::from("rep,T_over_N\n");
            for (rep, t) in times.iter().enumerate() {
                out.push_str(&format!("{rep},{t}\n"));
            }
            write_output(config.out.as_deref(), &out)?;
        }
        Command::Segments { common, horizon } => {
            let config = common.resolve()?;
            let params = params(&config)?;
            let v = single("v_grid", &config.v_grid);
            let segs = ensemble(&config, runner).map(|env, rng| {
                segment_decomposition(env, &params, v, horizon, config.step_budget, rng)
            })?;
            // row j covers the passage from x_{j-1} to x_j
            let mut out = String::from("rep,j,U,S,R,ell\n");
            for (rep, s) in segs.iter().enumerate() {
                for j in 1..=horizon {
                    out.push_str(&format!(
                        "{rep},{j},{},{},{},{}\n",
                        s.travel[j],
                        s.sitting[j - 1],
                        s.excursions[j - 1],
                        s.visits[j - 1]
                    ));
                }
            }
            write_output(config.out.as_deref(), &out)?;
        }
        Command::Ageing {
            common,
            draws,
            j_max,
        } => {
            let config = common.resolve()?;
            let params = params(&config)?;
            let t = single("t", &config.t);
            let ens = ensemble(&config, runner);
            let direct = xi_tail_direct(&ens, &params, t, &config.v_grid, 0.95)?;
            let mut out = String::from("v,method,estimate,ci_lo,ci_hi\n");
            for (k, &v) in config.v_grid.iter().enumerate() {
                // travel times depend on v, so each threshold gets its own pool
                let pool_ens = Ensemble::new(
                    config.alpha,
                    crate::rng::derive_seed(config.seed, Purpose::Resample, k as u64),
                    config.reps,
                    runner,
                );
                let pool = pool_ens
                    .map(|env, rng| {
                        segment_decomposition(env, &params, v, 2, config.step_budget, rng)
                    })?
                    .iter()
                    .map(|s| s.travel[2] / (v * params.n()))
                    .collect::<Vec<_>>();
                let mut rng = substream(config.seed, Purpose::Limit, k as u64);
                let renewal = xi_renewal_estimate(
                    t, &[v], &pool, config.alpha, config.mu, j_max, draws, 0.95, &mut rng,
                )?;
                for (est, method) in [(&direct.tails[k], "direct"), (&renewal.tails[0], "renewal")] {
                    out.push_str(&format!(
                        "{v},{method},{},{},{}\n",
                        est.estimate, est.ci.0, est.ci.1
                    ));
                }
            }
            if direct.monotonicity_flag {
                log::warn!("direct tail estimates are not monotone in v beyond their CI width");
            }
            write_output(config.out.as_deref(), &out)?;
        }
        Command::Fin { common } => {
            let config = common.resolve()?;
            let t = single("t", &config.t);
            let samples: Vec<_> = runner
                .run(config.reps, |rep| {
                    let mut rng = substream(config.seed, Purpose::Limit, rep as u64);
                    sample_fin(config.alpha, config.mu, t, config.fin_window, config.fin_cutoff, &mut rng)
                })
                .into_iter()
                .collect::<Result<_>>()?;
            let mut out = String::from("rep,value,weight\n");
            for (rep, s) in samples.iter().enumerate() {
                out.push_str(&format!("{rep},{},{}\n", s.value, s.weight));
            }
            write_output(config.out.as_deref(), &out)?;
        }
        Command::Subordinator { common, mode, dt } => {
            let config = common.resolve()?;
            let t = single("t", &config.t);
            let alpha = config.alpha;
            let values: Vec<f64> = runner
                .run(config.reps, |rep| {
                    let mut rng = substream(config.seed, Purpose::Limit, rep as u64);
                    match mode {
                        SubordinatorMode::Marginal => subordinator_marginal(alpha, t, &mut rng),
                        SubordinatorMode::Inverse => inverse_subordinator_marginal(alpha, t, &mut rng),
                        SubordinatorMode::Path => path_inverse_marginal(alpha, t, dt, &mut rng),
                    }
                })
                .into_iter()
                .collect::<Result<_>>()?;
            let mut out = String::from("rep,value\n");
            for (rep, v) in values.iter().enumerate() {
                out.push_str(&format!("{rep},{v}\n"));
            }
            write_output(config.out.as_deref(), &out)?;
        }
        Command::Verify {
            common,
            filter,
            negative_control,
            report,
        } => {
            let config = common.resolve()?;
            let settings = VerifySettings {
                filter,
                negative_control,
                ..VerifySettings::from_config(&config, runner)
            };
            let verdict = run_verify(&settings)?;
            if let Some(path) = report {
                write_output(Some(&path), &verdict.to_json())?;
            }
            write_output(config.out.as_deref(), &verdict.to_csv())?;
            if !verdict.pass {
                return Ok(Status::CheckFailure);
            }
        }
    }
    Ok(Status::Pass)
}

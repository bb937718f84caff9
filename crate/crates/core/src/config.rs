//! Experiment configuration: flat `key=value` documents with overrides.

use std::fmt;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::limits::{DEFAULT_CUTOFF, DEFAULT_WINDOW};
use crate::walk::DEFAULT_STEP_BUDGET;

/// Distance below which `beta` is treated as equal to `alpha/(alpha+1)`.
pub const CRITICAL_TOLERANCE: f64 = 1e-9;

/// Scaling regime, decided by comparing `beta` with `alpha/(alpha+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `beta < alpha/(alpha+1)`: inverse subordinator limit.
    Slow,
    /// `beta = alpha/(alpha+1)`: FIN diffusion with drift.
    Critical,
    /// `beta > alpha/(alpha+1)`: driftless FIN diffusion.
    Fast,
}

impl Regime {
    pub fn classify(alpha: f64, beta: f64) -> Self {
        let c = alpha / (alpha + 1.0);
        if (beta - c).abs() <= CRITICAL_TOLERANCE {
            Regime::Critical
        } else if beta < c {
            Regime::Slow
        } else {
            Regime::Fast
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Slow => "slow",
            Regime::Critical => "critical",
            Regime::Fast => "fast",
        }
    }

    /// Drift of the limiting FIN diffusion.
    pub fn fin_drift(&self, mu: f64) -> f64 {
        match self {
            Regime::Critical => mu,
            _ => 0.0,
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub alpha: f64,
    pub beta: f64,
    pub mu: f64,
    pub big_n: Vec<u64>,
    pub t: Vec<f64>,
    pub v_grid: Vec<f64>,
    pub reps: usize,
    pub seed: u64,
    pub step_budget: u64,
    pub fin_window: (f64, f64),
    pub fin_cutoff: f64,
    pub out: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            beta: 0.2,
            mu: 1.0,
            big_n: vec![10_000],
            t: vec![1.0],
            v_grid: vec![1.0],
            reps: 1000,
            seed: 0,
            step_budget: DEFAULT_STEP_BUDGET,
            fin_window: DEFAULT_WINDOW,
            fin_cutoff: DEFAULT_CUTOFF,
            out: None,
            report: None,
        }
    }
}

fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::Config(format!("{key}: cannot parse '{value}' as a number")))
}

fn parse_u64(key: &str, value: &str) -> Result<u64> {
    let v = value.trim();
    if let Ok(n) = v.parse::<u64>() {
        return Ok(n);
    }
    // accept 1e5-style integers
    match v.parse::<f64>() {
        Ok(x) if x >= 0.0 && x.fract() == 0.0 && x <= u64::MAX as f64 => Ok(x as u64),
        _ => invalid(format!("{key}: cannot parse '{value}' as a nonnegative integer")),
    }
}

fn parse_list<T>(key: &str, value: &str, item: fn(&str, &str) -> Result<T>) -> Result<Vec<T>> {
    let items = value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| item(key, s))
        .collect::<Result<Vec<_>>>()?;
    if items.is_empty() {
        return invalid(format!("{key}: empty list"));
    }
    Ok(items)
}

fn parse_range(key: &str, value: &str) -> Result<(f64, f64)> {
    let (lo, hi) = value
        .split_once("..")
        .or_else(|| value.split_once(','))
        .ok_or_else(|| Error::Config(format!("{key}: expected 'lo..hi', got '{value}'")))?;
    Ok((parse_f64(key, lo)?, parse_f64(key, hi)?))
}

impl ExperimentConfig {
    /// Sets one field from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key.trim().replace('-', "_").as_str() {
            "alpha" => self.alpha = parse_f64("alpha", value)?,
            "beta" => self.beta = parse_f64("beta", value)?,
            "mu" => self.mu = parse_f64("mu", value)?,
            "bign" | "bigN" | "n" => self.big_n = parse_list("bigN", value, parse_u64)?,
            "t" => self.t = parse_list("t", value, parse_f64)?,
            "v_grid" | "v" => self.v_grid = parse_list("v_grid", value, parse_f64)?,
            "reps" => self.reps = parse_u64("reps", value)? as usize,
            "seed" => self.seed = parse_u64("seed", value)?,
            "step_budget" => self.step_budget = parse_u64("step_budget", value)?,
            "fin_window" => self.fin_window = parse_range("fin_window", value)?,
            "fin_cutoff" => self.fin_cutoff = parse_f64("fin_cutoff", value)?,
            "out" => self.out = Some(PathBuf::from(value.trim())),
            "report" => self.report = Some(PathBuf::from(value.trim())),
            other => return invalid(format!("unknown key '{other}'")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return invalid(format!("alpha={} violates 0 < alpha < 1", self.alpha));
        }
        if !(self.beta >= 0.0) {
            return invalid(format!("beta={} violates beta ≥ 0", self.beta));
        }
        if !(self.mu >= 0.0) {
            return invalid(format!("mu={} violates mu ≥ 0", self.mu));
        }
        if self.beta == 0.0 && self.mu > 1.0 {
            return invalid(format!(
                "beta=0 requires mu ≤ 1 (got mu={}; p would exceed 1)",
                self.mu
            ));
        }
        if self.reps == 0 {
            return invalid("reps=0 violates reps ≥ 1");
        }
        if let Some(n) = self.big_n.iter().find(|&&n| n == 0) {
            return invalid(format!("bigN={n} violates bigN ≥ 1"));
        }
        if let Some(t) = self.t.iter().find(|&&t| !(t > 0.0)) {
            return invalid(format!("t={t} violates t > 0"));
        }
        if let Some(v) = self.v_grid.iter().find(|&&v| !(v > 0.0)) {
            return invalid(format!("v_grid entry {v} violates v > 0"));
        }
        if self.step_budget == 0 {
            return invalid("step_budget=0 violates step_budget ≥ 1");
        }
        let (lo, hi) = self.fin_window;
        if !(lo < 0.0 && hi > 0.0) {
            return invalid(format!("fin_window=({lo}, {hi}) must contain 0"));
        }
        if !(self.fin_cutoff > 0.0) {
            return invalid(format!("fin_cutoff={} violates cutoff > 0", self.fin_cutoff));
        }
        Ok(())
    }

    /// Classification by `beta` alone; with `mu = 0` every regime has the
    /// driftless FIN limit.
    pub fn regime(&self) -> Regime {
        Regime::classify(self.alpha, self.beta)
    }
}

/// Splits a `key=value` document; blank lines and `#` comments are skipped.
pub fn parse_document(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {}: expected key=value, got '{line}'", lineno + 1))
        })?;
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(pairs)
}

/// Builds a validated configuration: defaults, then the document, then overrides.
pub fn parse_config(document: Option<&str>, overrides: &[(String, String)]) -> Result<ExperimentConfig> {
    let mut config = ExperimentConfig::default();
    if let Some(text) = document {
        for (k, v) in parse_document(text)? {
            config.set(&k, &v)?;
        }
    }
    for (k, v) in overrides {
        config.set(k, v)?;
    }
    config.validate()?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kv(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn minimal_flags_fill_defaults() {
        let c = parse_config(None, &kv(&[("alpha", "0.5")])).unwrap();
        assert_eq!((c.beta, c.mu, c.reps, c.seed), (0.2, 1.0, 1000, 0));
        assert_eq!(c.big_n, vec![10_000]);
    }

    #[test]
    fn beta_zero_with_large_mu_names_the_constraint() {
        let err = parse_config(None, &kv(&[("beta", "0"), ("mu", "2")])).unwrap_err();
        let Error::Config(msg) = err else { panic!("wrong error kind") };
        assert!(msg.contains("beta=0 requires mu ≤ 1"), "{msg}");
    }

    #[test]
    fn regimes() {
        assert_eq!(Regime::classify(0.5, 0.2), Regime::Slow);
        assert_eq!(Regime::classify(0.5, 1.0 / 3.0), Regime::Critical);
        assert_eq!(Regime::classify(0.5, 0.5), Regime::Fast);
        assert_eq!(Regime::Critical.fin_drift(1.5), 1.5);
        assert_eq!(Regime::Fast.fin_drift(1.5), 0.0);
    }

    #[test]
    fn flags_override_document() {
        let doc = "# run\nalpha = 0.3\nbigN = 1e3,1e4\nfin_window=-5..5\n";
        let c = parse_config(Some(doc), &kv(&[("alpha", "0.7")])).unwrap();
        assert_eq!(c.alpha, 0.7);
        assert_eq!(c.big_n, vec![1000, 10_000]);
        assert_eq!(c.fin_window, (-5.0, 5.0));
        assert!(parse_config(Some("alpha"), &[]).is_err());
        assert!(parse_config(Some("gamma=1"), &[]).is_err());
    }
}

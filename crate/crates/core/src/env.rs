//! The random trap environment `(tau_z)` on the integers.
//!
//! Trap depths follow the exact Pareto law `P{tau > x} = x^{-alpha}` for
//! `x >= 1`. Each depth is a pure function of `(seed, z)`: a ChaCha block
//! keyed by the seed is read at a word offset determined by the site, so
//! sites can be realized in any order without storing the line.

use std::collections::HashMap;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, Result};

const DENSE_LIMIT: usize = 1 << 22;

/// Inverse-CDF Pareto draw: `u^{-1/alpha}`.
pub fn sample_pareto(alpha: f64, u: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("alpha must lie in (0,1), got {alpha}"));
    }
    if !(u > 0.0 && u < 1.0) {
        return domain(format!("u must lie in (0,1), got {u}"));
    }
    Ok(u.powf(-1.0 / alpha))
}

fn zigzag(z: i64) -> u64 {
    ((z << 1) ^ (z >> 63)) as u64
}

/// Maps 53 random bits to the open interval (0,1).
#[inline]
pub(crate) fn open_unit(bits: u64) -> f64 {
    ((bits >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

#[derive(Debug, Clone, Default)]
struct TauCache {
    right: Vec<f64>,
    left: Vec<f64>,
    sparse: HashMap<i64, f64>,
}

impl TauCache {
    fn get(&self, z: i64) -> Option<f64> {
        let (vec, idx) = if z >= 0 {
            (&self.right, z as u64)
        } else {
            (&self.left, (-(z + 1)) as u64)
        };
        match vec.get(idx as usize) {
            Some(v) if !v.is_nan() => Some(*v),
            Some(_) => None,
            None => self.sparse.get(&z).copied(),
        }
    }

    fn insert(&mut self, z: i64, tau: f64) {
        let (vec, idx) = if z >= 0 {
            (&mut self.right, z as u64)
        } else {
            (&mut self.left, (-(z + 1)) as u64)
        };
        let idx = idx as usize;
        if idx < DENSE_LIMIT {
            if idx >= vec.len() {
                let new_len = (idx + 1).max(vec.len() * 2).min(DENSE_LIMIT);
                vec.resize(new_len, f64::NAN);
            }
            vec[idx] = tau;
        } else {
            self.sparse.insert(z, tau);
        }
    }
}

/// Lazily realized i.i.d. Pareto(alpha) trap depths indexed by `z in Z`.
#[derive(Debug, Clone)]
pub struct TrapEnvironment {
    alpha: f64,
    seed: u64,
    key: [u8; 32],
    cache: TauCache,
}

impl TrapEnvironment {
    pub fn new(alpha: f64, seed: u64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return domain(format!("alpha must lie in (0,1), got {alpha}"));
        }
        let key = ChaCha8Rng::seed_from_u64(seed).get_seed();
        Ok(Self {
            alpha,
            seed,
            key,
            cache: TauCache::default(),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The uniform variate keyed on `(seed, z)`.
    pub fn uniform_at(&self, z: i64) -> f64 {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_word_pos(u128::from(zigzag(z)) * 2);
        open_unit(rng.next_u64())
    }

    /// Trap depth at `z` without touching the cache.
    pub fn compute_tau(&self, z: i64) -> f64 {
        self.uniform_at(z).powf(-1.0 / self.alpha)
    }

    /// Trap depth at `z`; repeated calls return the identical value.
    pub fn tau_at(&mut self, z: i64) -> f64 {
        if let Some(t) = self.cache.get(z) {
            return t;
        }
        let t = self.compute_tau(z);
        self.cache.insert(z, t);
        t
    }

    /// First site strictly to the right of `after` whose depth exceeds `threshold`,
    /// searching no further than `max_site`.
    pub fn next_deep_trap(&mut self, after: i64, threshold: f64, max_site: i64) -> Option<i64> {
        ((after + 1)..=max_site).find(|&z| self.tau_at(z) > threshold)
    }

    /// `x_0 = 0` followed by every site in `(0, max_site]` deeper than `threshold`.
    pub fn deep_trap_positions(&mut self, threshold: f64, max_site: i64) -> Vec<i64> {
        let mut out = vec![0];
        for z in 1..=max_site {
            if self.compute_tau(z) > threshold {
                out.push(z);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pareto_examples() {
        assert_eq!(sample_pareto(0.5, 0.0625).unwrap(), 256.0);
        let edge = sample_pareto(0.5, 1.0 - 1e-12).unwrap();
        assert!((edge - 1.0).abs() < 1e-11);
        // root of v^{-0.3} = 0.5 by bisection, independent of the closed form
        let (mut lo, mut hi) = (1.0f64, 1e3f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid.powf(-0.3) > 0.5 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let v = sample_pareto(0.3, 0.5).unwrap();
        assert!((v - lo).abs() < 1e-9);
        assert!((v - 10.079_368_399_158_986).abs() < 1e-9);
    }

    #[test]
    fn pareto_domain_errors() {
        assert!(sample_pareto(0.5, 0.0).is_err());
        assert!(sample_pareto(0.5, 1.0).is_err());
        assert!(sample_pareto(1.0, 0.5).is_err());
        assert!(sample_pareto(0.0, 0.5).is_err());
        assert!(TrapEnvironment::new(1.2, 0).is_err());
    }

    #[test]
    fn tau_is_deterministic_and_at_least_one() {
        let mut env = TrapEnvironment::new(0.5, 42).unwrap();
        let other = TrapEnvironment::new(0.5, 42).unwrap();
        for z in [-5_000_000i64, -3, -1, 0, 1, 17, 9_000_000] {
            let a = env.tau_at(z);
            assert_eq!(a, env.tau_at(z));
            assert_eq!(a, other.compute_tau(z));
            assert!(a >= 1.0);
        }
        let different = TrapEnvironment::new(0.5, 43).unwrap();
        assert_ne!(env.tau_at(5), different.compute_tau(5));
    }

    #[test]
    fn deep_trap_edge_thresholds() {
        let mut env = TrapEnvironment::new(0.5, 1).unwrap();
        assert_eq!(env.deep_trap_positions(0.5, 6), vec![0, 1, 2, 3, 4, 5, 6]);
        assert_eq!(env.deep_trap_positions(1e300, 10_000), vec![0]);
        let deep = env.deep_trap_positions(50.0, 5_000);
        assert!(deep.windows(2).all(|w| w[0] < w[1]));
        assert!(deep[1..].iter().all(|&z| env.tau_at(z) > 50.0));
        assert_eq!(env.next_deep_trap(0, 50.0, 5_000), deep.get(1).copied());
    }
}

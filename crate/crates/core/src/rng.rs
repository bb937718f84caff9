//! Seed derivation and replication scheduling.
//!
//! Every replication draws from its own ChaCha stream, selected by
//! `(master seed, purpose tag, replication index)`. Results therefore do not
//! depend on how replications are scheduled across workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Random stream type used throughout the crate.
pub type Stream = ChaCha8Rng;

/// Purpose tags keep the walk randomness, the environment and the limit
/// samplers of one replication on unrelated streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Walk = 0x5741_4c4b,
    Environment = 0x454e_5652,
    Limit = 0x4c49_4d54,
    Resample = 0x5253_4d50,
}

fn mix(mut z: u64) -> u64 {
    // splitmix64 finalizer
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a 64-bit seed for `(master, purpose, index)`.
pub fn derive_seed(master: u64, purpose: Purpose, index: u64) -> u64 {
    mix(mix(master ^ purpose as u64).wrapping_add(index))
}

/// An independent stream for replication `index`.
pub fn substream(master: u64, purpose: Purpose, index: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(mix(master ^ purpose as u64));
    rng.set_stream(index);
    rng
}

/// Worker count from `TRAPSCALE_WORKERS`, or 0 (rayon default) when unset.
pub fn workers_from_env() -> usize {
    std::env::var("TRAPSCALE_WORKERS")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(0)
}

/// Runs independent replications, serially for one worker and on a rayon
/// pool otherwise. Output order always follows the replication index.
#[derive(Debug, Clone, Copy)]
pub struct Runner {
    workers: usize,
}

impl Runner {
    pub fn new(workers: usize) -> Self {
        Self { workers }
    }

    pub fn serial() -> Self {
        Self { workers: 1 }
    }

    pub fn from_env() -> Self {
        Self::new(workers_from_env())
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    pub fn run<T, F>(&self, reps: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        if self.workers == 1 || reps <= 1 {
            return (0..reps).map(f).collect();
        }
        let mut builder = rayon::ThreadPoolBuilder::new();
        if self.workers > 0 {
            builder = builder.num_threads(self.workers);
        }
        match builder.build() {
            Ok(pool) => pool.install(|| (0..reps).into_par_iter().map(&f).collect()),
            Err(_) => (0..reps).map(f).collect(),
        }
    }
}

impl Default for Runner {
    fn default() -> Self {
        Self::from_env()
    }
}

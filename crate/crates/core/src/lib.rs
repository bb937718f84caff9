//! Random walk among heavy-tailed traps with a vanishing drift.
//!
//! The walk sits at site `z` for an exponential time with mean `tau_z`,
//! where the `tau_z` are i.i.d. Pareto(alpha), and steps right with
//! probability `(1 + mu N^{-beta}) / 2`. The crate simulates the walk and
//! its environment, samples the scaling limits (inverse subordinator, FIN
//! diffusion with or without drift), decomposes trajectories into deep-trap
//! segments, estimates ageing quantities and runs a battery of statistical
//! checks against the limit laws.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ageing;
pub mod cli;
pub mod config;
pub mod env;
pub mod error;
pub mod limits;
pub mod quad;
pub mod rng;
pub mod stats;
pub mod verify;
pub mod walk;

pub use error::{Error, Result};

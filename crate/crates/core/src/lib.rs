//! Brownian and Ornstein-Uhlenbeck diffusion ratchets.
//!
//! A diffusion ratchet is a diffusion reflected at a lower boundary that
//! jumps upward at a rate proportional to the gap between particle and
//! boundary. This crate evaluates the closed-form ratchet speeds, samples the
//! jump chain exactly, simulates paths, and provides the statistics used to
//! check one against the other.

pub mod error;
pub mod quad;
pub mod closedform;
pub mod specfun;
pub mod rng;
pub mod pathsim;
pub mod mcstats;
pub mod jumpchain;

#[cfg(test)]
mod checks;

pub use closedform::{Model, RatchetParams, ScalingMap};
pub use error::{Error, Result};
pub use jumpchain::{ChainRun, JumpSample};
pub use mcstats::{Comparison, Estimate, KsReport, Verdict};
pub use pathsim::{JumpEvent, RatchetPath, SimConfig};

//! Path simulation of reflected diffusions, of both ratchets via their
//! graphical constructions, and of the coupling experiments.
//!
//! Brownian increments are exact Gaussians; the running maximum inside each
//! step is drawn from the Brownian-bridge maximum law, so boundary touches are
//! detected without discretisation error. Boundary jumps integrate the hazard
//! γ·gap with the trapezoidal rule against a unit-exponential clock.

mod coupling;
mod ratchet;
mod reflected;

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use coupling::{simulate_coupling, CouplingOutcome};
pub use ratchet::{
    simulate_bm_ratchet, simulate_ou_ratchet, simulate_ratchet, simulate_ratchet_summary, RatchetSummary,
};
pub use reflected::{simulate_killed_reflected, simulate_rbm, simulate_rou, KilledOutcome};

/// Largest time step accepted; coarser grids make the hazard bias visible.
pub const MAX_DT: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dt: f64,
    pub horizon: f64,
    pub x0: f64,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(dt: f64, horizon: f64, x0: f64, seed: u64) -> Result<Self> {
        let c = SimConfig { dt, horizon, x0, seed };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt <= MAX_DT) {
            return Err(Error::InvalidParams(format!("dt must lie in (0, {MAX_DT}], got {}", self.dt)));
        }
        if !(self.horizon.is_finite() && self.horizon >= self.dt) {
            return Err(Error::InvalidParams(format!(
                "horizon must be finite and at least dt, got {}",
                self.horizon
            )));
        }
        if !(self.x0 >= 0.0 && self.x0.is_finite()) {
            return Err(Error::InvalidParams(format!("x0 must be finite and >= 0, got {}", self.x0)));
        }
        Ok(())
    }

    /// Number of steps; the grid has steps() + 1 points.
    pub fn steps(&self) -> usize {
        (self.horizon / self.dt - 1e-9).ceil() as usize
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }
}

/// One boundary jump.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpEvent {
    /// Interpolated jump time inside the step.
    pub time: f64,
    pub r_before: f64,
    pub r_after: f64,
    /// Particle position at the jump.
    pub x: f64,
    /// Grid index at which the jump takes effect.
    pub step: usize,
}

/// A simulated ratchet path on the time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct RatchetPath {
    pub times: Vec<f64>,
    pub x: Vec<f64>,
    pub r: Vec<f64>,
    pub jumps: Vec<JumpEvent>,
    /// Grid indices k such that the particle touched the boundary during
    /// the step ending at k (index 0 when the path starts on the boundary).
    pub touches: Vec<usize>,
}

impl RatchetPath {
    /// Checks the structural invariants; returns a description of the first violation.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let n = self.times.len();
        if self.x.len() != n || self.r.len() != n {
            return Err("length mismatch".into());
        }
        for k in 0..n {
            if self.x[k] < self.r[k] {
                return Err(format!("x < r at index {k}"));
            }
            if k > 0 && self.r[k] < self.r[k - 1] {
                return Err(format!("r decreases at index {k}"));
            }
        }
        let mut jump_steps = self.jumps.iter().map(|j| j.step).peekable();
        for k in 1..n {
            let changed = self.r[k] != self.r[k - 1];
            let jumped = jump_steps.peek() == Some(&k);
            if jumped {
                jump_steps.next();
            }
            if changed && !jumped {
                return Err(format!("r changes without a jump at index {k}"));
            }
        }
        for (i, j) in self.jumps.iter().enumerate() {
            if !(j.r_before <= j.r_after && j.r_after <= j.x) {
                return Err(format!("jump {i} violates r_before <= r_after <= x"));
            }
            let old_gap = j.x - j.r_before;
            let split = (j.r_after - j.r_before) + (j.x - j.r_after);
            if (old_gap - split).abs() > 4.0 * f64::EPSILON * j.x.abs().max(1.0) {
                return Err(format!("jump {i} does not conserve the gap"));
            }
        }
        Ok(())
    }

    /// CSV `t,x,r`, one row per grid point.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,x,r")?;
        for k in 0..self.times.len() {
            writeln!(w, "{},{},{}", self.times[k], self.x[k], self.r[k])?;
        }
        Ok(())
    }

    /// CSV `t,r_before,r_after,x`, one row per jump.
    pub fn write_jumps_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,r_before,r_after,x")?;
        for j in &self.jumps {
            writeln!(w, "{},{},{},{}", j.time, j.r_before, j.r_after, j.x)?;
        }
        Ok(())
    }
}

/// Alternating touch/jump bookkeeping for regeneration epochs: ρ_n is the
/// first touch after the jump that followed ρ_{n−1}.
#[derive(Clone, Debug, Default)]
pub struct RegenerationTracker {
    last: Option<(f64, f64)>,
    awaiting_jump: bool,
    increments: Vec<(f64, f64)>,
}

impl RegenerationTracker {
    pub fn new() -> Self {
        Self::default()
    }

    /// A touch at time t with particle position x (equal to the boundary).
    pub fn touch(&mut self, t: f64, x: f64) {
        if self.awaiting_jump {
            return;
        }
        if let Some((t0, x0)) = self.last {
            self.increments.push((t - t0, x - x0));
        }
        self.last = Some((t, x));
        self.awaiting_jump = true;
    }

    pub fn jump(&mut self) {
        if self.last.is_some() {
            self.awaiting_jump = false;
        }
    }

    pub fn increments(&self) -> &[(f64, f64)] {
        &self.increments
    }

    pub fn into_increments(self) -> Vec<(f64, f64)> {
        self.increments
    }
}

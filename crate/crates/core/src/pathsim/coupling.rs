use rand::Rng;
use rand_distr::StandardNormal;

use super::ratchet::{bridge_crossed, bridge_max, HazardClock};
use super::SimConfig;
use crate::closedform::{Model, RatchetParams};
use crate::error::{Error, Result};
use crate::rng::{stream, Purpose};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CouplingOutcome {
    /// Grid time of coupling, or the horizon when censored.
    pub time: f64,
    pub censored: bool,
}

/// Runs two ratchets from gaps x_hi ≥ x_lo on the same noise and the same
/// jump sheet and reports when they coalesce.
///
/// The jump sheet is driven by the upper ratchet's hazard: a point landing
/// at or below the lower gap would kill both, and both then restart from the
/// same level, which is coupling.
pub fn simulate_coupling(params: &RatchetParams, x_hi: f64, x_lo: f64, config: &SimConfig) -> Result<CouplingOutcome> {
    config.validate()?;
    if !(x_hi >= x_lo && x_lo >= 0.0 && x_hi.is_finite()) {
        return Err(Error::InvalidParams(format!("need x_hi >= x_lo >= 0, got {x_hi}, {x_lo}")));
    }
    if params.model == Model::Ou && !(params.mu > 0.0) {
        return Err(Error::InvalidParams("the OU ratchet needs mu > 0".into()));
    }
    if x_hi == x_lo {
        return Ok(CouplingOutcome { time: 0.0, censored: false });
    }
    let n = config.steps();
    let coupled_at = match params.model {
        Model::Bm => couple_bm(params.gamma, params.mu, x_hi, x_lo, config, n),
        Model::Ou => couple_ou(params.gamma, params.mu, x_hi, x_lo, config, n),
    };
    Ok(match coupled_at {
        Some(k) => CouplingOutcome { time: config.time(k), censored: false },
        None => CouplingOutcome { time: config.time(n), censored: true },
    })
}

fn couple_bm(gamma: f64, mu: f64, x_hi: f64, x_lo: f64, config: &SimConfig, n: usize) -> Option<usize> {
    let dt = config.dt;
    let sqrt_dt = dt.sqrt();
    let mut noise = stream(config.seed, Purpose::Noise);
    let mut jumps = stream(config.seed, Purpose::Jump);
    let mut clock = HazardClock::new(&mut jumps);
    let (mut b, mut s_hi, mut s_lo) = (0.0f64, x_hi, x_lo);
    for k in 1..=n {
        let g: f64 = noise.sample(StandardNormal);
        let u: f64 = 1.0 - noise.random::<f64>();
        let b1 = b + mu * dt + sqrt_dt * g;
        let m = bridge_max(b, b1, dt, u);
        let gap0 = s_hi - b;
        s_hi = s_hi.max(m);
        s_lo = s_lo.max(m);
        b = b1;
        if s_hi == s_lo {
            return Some(k);
        }
        if clock.advance(gamma * gap0, gamma * (s_hi - b), dt, &mut jumps).is_some() {
            let v: f64 = jumps.random();
            let level = b + v * (s_hi - b);
            if level <= s_lo {
                return Some(k);
            }
            s_hi = level;
        }
        assert!(s_hi >= s_lo, "coupling lost monotonicity at step {k}");
    }
    None
}

fn couple_ou(gamma: f64, mu: f64, x_hi: f64, x_lo: f64, config: &SimConfig, n: usize) -> Option<usize> {
    let dt = config.dt;
    let decay = (-mu * dt).exp();
    let sd = ((1.0 - decay * decay) / (2.0 * mu)).sqrt();
    let mut noise = stream(config.seed, Purpose::Noise);
    let mut jumps = stream(config.seed, Purpose::Jump);
    let mut clock = HazardClock::new(&mut jumps);
    let (mut hi, mut lo) = (x_hi, x_lo);
    for k in 1..=n {
        let g: f64 = noise.sample(StandardNormal);
        let u: f64 = noise.random();
        let shift = sd * g;
        let y = hi * decay + shift;
        if y <= 0.0 || bridge_crossed(hi, y, dt, u) {
            return Some(k);
        }
        let h0 = hi;
        hi = y;
        // Same increment for the lower gap; reflection pushes it up only.
        lo = (lo * decay + shift).max(0.0);
        if clock.advance(gamma * h0, gamma * hi, dt, &mut jumps).is_some() {
            let v: f64 = jumps.random();
            let level = v * hi;
            if level <= lo {
                return Some(k);
            }
            hi = level;
        }
        assert!(hi >= lo, "coupling lost monotonicity at step {k}");
    }
    None
}

use super::ratchet::{make_stepper, BmStepper, OuStepper, Stepper};
use super::SimConfig;
use crate::closedform::RatchetParams;
use crate::error::{Error, Result};

/// Reflected BM with drift −μ on the grid, Z = (x0 ∨ M) − B^μ with the
/// running maximum M taken over the continuous path.
pub fn simulate_rbm(mu: f64, config: &SimConfig) -> Result<Vec<f64>> {
    config.validate()?;
    if !(mu >= 0.0 && mu.is_finite()) {
        return Err(Error::InvalidParams(format!("mu must be finite and >= 0, got {mu}")));
    }
    let st = BmStepper::new(0.0, mu, config);
    Ok(run(st, config))
}

/// Reflected OU dZ = −μZ dt + dB + dL via exact transitions and |·|.
pub fn simulate_rou(mu: f64, config: &SimConfig) -> Result<Vec<f64>> {
    config.validate()?;
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::InvalidParams(format!("reflected OU needs mu > 0, got {mu}")));
    }
    let st = OuStepper::new(0.0, mu, config);
    Ok(run(st, config))
}

fn run<S: Stepper>(mut st: S, config: &SimConfig) -> Vec<f64> {
    let n = config.steps();
    let mut out = Vec::with_capacity(n + 1);
    out.push(st.x());
    for k in 1..=n {
        st.step(k, config.dt);
        out.push(st.x());
    }
    out
}

/// First jump of a ratchet started with gap x0: the killing time and the
/// gap at which the killing happened.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KilledOutcome {
    pub tau: f64,
    pub z: f64,
    /// No killing before the horizon; tau is then the horizon and z the final gap.
    pub censored: bool,
}

/// Simulates the reflected diffusion killed at rate γ·gap, started at config.x0.
pub fn simulate_killed_reflected(params: &RatchetParams, config: &SimConfig) -> Result<KilledOutcome> {
    let mut st = make_stepper(params, config)?;
    let n = config.steps();
    for k in 1..=n {
        if let Some(j) = st.step(k, config.dt).jump {
            return Ok(KilledOutcome { tau: j.time, z: j.x - j.r_before, censored: false });
        }
    }
    Ok(KilledOutcome { tau: config.time(n), z: st.x() - st.r(), censored: true })
}

//! Exact sampling of the Markov chain of gaps at jump times.
//!
//! Between jumps the gap is a reflected diffusion killed at rate γ·gap. A
//! jump happens at the killing time; the killing position z is split by an
//! independent uniform u into the new gap y = u·z and the boundary increment
//! w = z − y. Positions are drawn from the tabulated killing law, and the
//! inter-jump time enters through its conditional mean E_y[τ].

mod kernel;

use std::io::{self, Write};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::closedform::{
    canonicalize_bm, BmGreenBasis, BmInvariantDensity, Model, OuGreenBasis, OuInvariantDensity, RatchetParams, ScalingMap,
};
use crate::error::{Error, Result};
use crate::mcstats::{batch_means_ratio, Estimate};
use crate::pathsim::{RatchetPath, RegenerationTracker};
use crate::rng::{stream, Purpose};

pub use kernel::{KernelBasis, KillingKernel};

pub const DEFAULT_BURN_IN: usize = 1000;
pub const BATCHES: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpSample {
    /// Gap right after the jump.
    pub y: f64,
    /// Boundary increment at the jump.
    pub w: f64,
    /// E[η | previous gap].
    pub eta_mean: f64,
    /// Killing position, y + w.
    pub z: f64,
}

/// Draws the next chain state from gap `cur_y`.
pub fn step_chain<R: Rng + ?Sized>(kernel: &KillingKernel, cur_y: f64, rng: &mut R) -> Result<JumpSample> {
    if !(cur_y >= 0.0) {
        return Err(Error::Domain { func: "step_chain", arg: cur_y });
    }
    let eta_mean = kernel.expected_killing_time(cur_y)?;
    let z = kernel.sample(cur_y, rng)?;
    let u: f64 = rng.random();
    let y = u * z;
    Ok(JumpSample { y, w: z - y, eta_mean, z })
}

/// Killing-kernel tables and the unit conversion for one parameter set.
#[derive(Clone, Debug)]
pub struct ChainModel {
    pub params: RatchetParams,
    pub kernel: KillingKernel,
    /// Present for BM: the kernel is that of the canonical γ = 1/2 ratchet.
    pub scaling: Option<ScalingMap>,
}

impl ChainModel {
    pub fn new(params: &RatchetParams) -> Result<Self> {
        if !(params.gamma > 0.0) {
            return Err(Error::InvalidParams("the jump chain needs gamma > 0; without jumps there is no chain".into()));
        }
        match params.model {
            Model::Bm => {
                let map = canonicalize_bm(params.gamma, params.mu)?;
                let kernel = KillingKernel::new(&KernelBasis::Bm(BmGreenBasis::new(map.mu_canonical)?))?;
                Ok(ChainModel { params: *params, kernel, scaling: Some(map) })
            }
            Model::Ou => {
                let kernel = KillingKernel::new(&KernelBasis::Ou(OuGreenBasis::new(params.gamma, params.mu)?))?;
                Ok(ChainModel { params: *params, kernel, scaling: None })
            }
        }
    }

    fn to_physical(&self, s: JumpSample) -> JumpSample {
        match self.scaling {
            None => s,
            Some(m) => JumpSample {
                y: s.y * m.space_scale,
                w: s.w * m.space_scale,
                eta_mean: s.eta_mean / m.time_scale,
                z: s.z * m.space_scale,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainRun {
    pub params: RatchetParams,
    /// Samples after burn-in, in the units of `params`.
    pub samples: Vec<JumpSample>,
    pub burn_in: usize,
    pub seed: u64,
}

impl ChainRun {
    /// CSV `k,y,w,eta_mean`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "k,y,w,eta_mean")?;
        for (k, s) in self.samples.iter().enumerate() {
            writeln!(w, "{},{},{},{}", k, s.y, s.w, s.eta_mean)?;
        }
        Ok(())
    }

    /// Σw/Σeta_mean with a batch-means standard error.
    pub fn speed(&self) -> Result<Estimate> {
        let w: Vec<f64> = self.samples.iter().map(|s| s.w).collect();
        let eta: Vec<f64> = self.samples.iter().map(|s| s.eta_mean).collect();
        batch_means_ratio(&w, &eta, BATCHES)
    }
}

/// Runs the chain from y₀ = 0, discarding `burn_in` steps.
pub fn run_chain_with(model: &ChainModel, n: usize, burn_in: usize, seed: u64) -> Result<ChainRun> {
    if n == 0 {
        return Err(Error::InvalidParams("need at least one chain sample".into()));
    }
    let mut rng: ChaCha8Rng = stream(seed, Purpose::Chain);
    let mut y = 0.0;
    for _ in 0..burn_in {
        y = step_chain(&model.kernel, y, &mut rng)?.y;
    }
    let mut samples = Vec::with_capacity(n);
    for _ in 0..n {
        let s = step_chain(&model.kernel, y, &mut rng)?;
        y = s.y;
        samples.push(model.to_physical(s));
    }
    Ok(ChainRun { params: model.params, samples, burn_in, seed })
}

pub fn run_chain(params: &RatchetParams, n: usize, burn_in: usize, seed: u64) -> Result<ChainRun> {
    run_chain_with(&ChainModel::new(params)?, n, burn_in, seed)
}

/// Ratio estimate of the ratchet speed from n chain steps.
pub fn chain_speed(params: &RatchetParams, n: usize, burn_in: usize, seed: u64) -> Result<Estimate> {
    if n < 1000 {
        return Err(Error::InvalidParams(format!("chain_speed needs n >= 1000, got {n}")));
    }
    run_chain(params, n, burn_in, seed)?.speed()
}

/// Stationary density of the gap chain in the units of `params`.
pub fn invariant_density(params: &RatchetParams) -> Result<Box<dyn Fn(f64) -> f64 + Send + Sync>> {
    match params.model {
        Model::Bm => {
            let map = canonicalize_bm(params.gamma, params.mu)?;
            let d = BmInvariantDensity::new(map.mu_canonical)?;
            let a = map.space_scale;
            Ok(Box::new(move |y| d.density(y / a) / a))
        }
        Model::Ou => {
            let d = OuInvariantDensity::new(params.gamma, params.mu)?;
            Ok(Box::new(move |y| d.density(y)))
        }
    }
}

/// Increments (ρ_{i+1} − ρ_i, X_{ρ_{i+1}} − X_{ρ_i}) between regeneration
/// times: ρ is a boundary touch, and the next ρ is the first touch after
/// the jump following it. Empty when fewer than two regenerations occurred.
pub fn extract_regenerations(path: &RatchetPath) -> Vec<(f64, f64)> {
    let mut tracker = RegenerationTracker::new();
    let mut jumps = path.jumps.iter().map(|j| j.step).peekable();
    let mut touches = path.touches.iter().copied().peekable();
    loop {
        let next_touch = touches.peek().copied();
        let next_jump = jumps.peek().copied();
        match (next_touch, next_jump) {
            // A touch inside the step is processed before a jump in the same step.
            (Some(t), Some(j)) if t <= j => {
                touches.next();
                let x = if t == 0 { path.r[0] } else { path.r[t - 1] };
                tracker.touch(path.times[t], x);
            }
            (Some(t), None) => {
                touches.next();
                let x = if t == 0 { path.r[0] } else { path.r[t - 1] };
                tracker.touch(path.times[t], x);
            }
            (_, Some(_)) => {
                jumps.next();
                tracker.jump();
            }
            (None, None) => break,
        }
    }
    tracker.into_increments()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pathsim::{simulate_ratchet, simulate_ratchet_summary, SimConfig};

    #[test]
    fn split_conserves_killing_position() {
        let model = ChainModel::new(&RatchetParams::bm(0.5, 1.0).unwrap()).unwrap();
        let mut rng = stream(1, Purpose::Test);
        let mut y = 0.0;
        for _ in 0..1000 {
            let s = step_chain(&model.kernel, y, &mut rng).unwrap();
            assert!(s.y >= 0.0 && s.w >= 0.0 && s.eta_mean > 0.0);
            assert!((s.y + s.w - s.z).abs() <= f64::EPSILON * s.z);
            y = s.y;
        }
    }

    #[test]
    fn regenerations_match_streaming_tracker() {
        let c = SimConfig::new(1e-3, 200.0, 0.0, 9).unwrap();
        for params in [RatchetParams::bm(0.5, 1.0).unwrap(), RatchetParams::ou(0.5, 1.0).unwrap()] {
            let path = simulate_ratchet(&params, &c).unwrap();
            let inc = extract_regenerations(&path);
            assert!(inc.len() > 5);
            assert!(inc.iter().all(|&(dt, dx)| dt > 0.0 && dx >= 0.0));
            assert_eq!(inc, simulate_ratchet_summary(&params, &c).unwrap().regenerations);
        }
    }

    #[test]
    fn gamma_zero_has_no_chain() {
        assert!(ChainModel::new(&RatchetParams::bm(0.0, 1.0).unwrap()).is_err());
        assert!(chain_speed(&RatchetParams::bm(0.5, 1.0).unwrap(), 10, 0, 0).is_err());
    }

    #[test]
    fn deterministic_and_csv() {
        let p = RatchetParams::ou(0.5, 1.0).unwrap();
        let a = run_chain(&p, 50, 10, 4).unwrap();
        assert_eq!(a, run_chain(&p, 50, 10, 4).unwrap());
        let mut buf = Vec::new();
        a.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("k,y,w,eta_mean\n0,"));
        assert_eq!(text.lines().count(), 51);
    }
}

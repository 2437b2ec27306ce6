use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use super::{JumpEvent, RatchetPath, RegenerationTracker, SimConfig};
use crate::closedform::{Model, RatchetParams};
use crate::error::{Error, Result};
use crate::rng::{stream, Purpose};

/// Unit-exponential clock integrating a piecewise-linear hazard.
#[derive(Clone, Debug)]
pub(crate) struct HazardClock {
    target: f64,
    acc: f64,
}

impl HazardClock {
    pub(crate) fn new(rng: &mut ChaCha8Rng) -> Self {
        HazardClock { target: rng.sample(Exp1), acc: 0.0 }
    }

    /// Adds the trapezoidal hazard over one step with end rates h0, h1.
    /// Returns the fraction of the step at which the clock rang, if it did;
    /// the clock is then re-armed.
    pub(crate) fn advance(&mut self, h0: f64, h1: f64, dt: f64, rng: &mut ChaCha8Rng) -> Option<f64> {
        let inc = 0.5 * (h0 + h1) * dt;
        if inc <= 0.0 {
            return None;
        }
        if self.acc + inc < self.target {
            self.acc += inc;
            return None;
        }
        let frac = ((self.target - self.acc) / inc).clamp(0.0, 1.0);
        self.acc = 0.0;
        self.target = rng.sample(Exp1);
        Some(frac)
    }
}

/// Outcome of one grid step.
pub(crate) struct StepOutcome {
    pub touched: bool,
    /// Boundary level at the touch (equal to the particle position there).
    pub touch_x: f64,
    pub jump: Option<JumpEvent>,
}

pub(crate) trait Stepper {
    fn x(&self) -> f64;
    fn r(&self) -> f64;
    fn starts_on_boundary(&self) -> bool {
        self.x() == self.r()
    }
    /// Advances from grid index k−1 to k.
    fn step(&mut self, k: usize, dt: f64) -> StepOutcome;
}

/// Brownian ratchet via its graphical construction: X = R + S − B^μ with
/// B^μ_t = B_t + μt and S its running maximum, reset downwards at jumps.
pub(crate) struct BmStepper {
    gamma: f64,
    mu: f64,
    sqrt_dt: f64,
    b: f64,
    s: f64,
    r: f64,
    clock: HazardClock,
    noise: ChaCha8Rng,
    jumps: ChaCha8Rng,
}

impl BmStepper {
    pub(crate) fn new(gamma: f64, mu: f64, config: &SimConfig) -> Self {
        let noise = stream(config.seed, Purpose::Noise);
        let mut jumps = stream(config.seed, Purpose::Jump);
        let clock = HazardClock::new(&mut jumps);
        BmStepper {
            gamma,
            mu,
            sqrt_dt: config.dt.sqrt(),
            b: 0.0,
            s: config.x0,
            r: 0.0,
            clock,
            noise,
            jumps,
        }
    }
}

/// Maximum of a Brownian bridge from a to b over time dt, given a uniform u ∈ (0, 1].
pub(crate) fn bridge_max(a: f64, b: f64, dt: f64, u: f64) -> f64 {
    let d = b - a;
    0.5 * (a + b + (d * d - 2.0 * dt * u.ln()).sqrt())
}

impl Stepper for BmStepper {
    fn x(&self) -> f64 {
        self.r + self.s - self.b
    }
    fn r(&self) -> f64 {
        self.r
    }
    fn step(&mut self, k: usize, dt: f64) -> StepOutcome {
        let n: f64 = self.noise.sample(StandardNormal);
        let u: f64 = 1.0 - self.noise.random::<f64>();
        let b0 = self.b;
        let b1 = b0 + self.mu * dt + self.sqrt_dt * n;
        let m = bridge_max(b0, b1, dt, u);
        let gap0 = self.s - b0;
        let touched = m >= self.s;
        if touched {
            self.s = m;
        }
        let touch_x = self.r;
        self.b = b1;
        let gap1 = self.s - b1;
        let mut jump = None;
        if let Some(frac) = self.clock.advance(self.gamma * gap0, self.gamma * gap1, dt, &mut self.jumps) {
            let v: f64 = self.jumps.random();
            let x_at = self.r + gap1;
            let new_s = b1 + v * gap1;
            let r_before = self.r;
            self.r += self.s - new_s;
            self.s = new_s;
            jump = Some(JumpEvent {
                time: (k as f64 - 1.0 + frac) * dt,
                r_before,
                r_after: self.r,
                x: x_at,
                step: k,
            });
        }
        StepOutcome { touched, touch_x, jump }
    }
}

/// OU ratchet: the gap S follows reflected OU with exact Gaussian
/// transitions, X = R + S.
pub(crate) struct OuStepper {
    gamma: f64,
    decay: f64,
    sd: f64,
    s: f64,
    r: f64,
    clock: HazardClock,
    noise: ChaCha8Rng,
    jumps: ChaCha8Rng,
}

impl OuStepper {
    pub(crate) fn new(gamma: f64, mu: f64, config: &SimConfig) -> Self {
        let noise = stream(config.seed, Purpose::Noise);
        let mut jumps = stream(config.seed, Purpose::Jump);
        let clock = HazardClock::new(&mut jumps);
        let decay = (-mu * config.dt).exp();
        let sd = ((1.0 - decay * decay) / (2.0 * mu)).sqrt();
        OuStepper { gamma, decay, sd, s: config.x0, r: 0.0, clock, noise, jumps }
    }
}

/// Whether a unit-variance path from a > 0 to b > 0 over dt crossed zero,
/// using the Brownian-bridge crossing probability exp(−2ab/dt).
pub(crate) fn bridge_crossed(a: f64, b: f64, dt: f64, u: f64) -> bool {
    u < (-2.0 * a * b / dt).exp()
}

impl Stepper for OuStepper {
    fn x(&self) -> f64 {
        self.r + self.s
    }
    fn r(&self) -> f64 {
        self.r
    }
    fn step(&mut self, k: usize, dt: f64) -> StepOutcome {
        let n: f64 = self.noise.sample(StandardNormal);
        let u: f64 = self.noise.random();
        let s0 = self.s;
        let y = s0 * self.decay + self.sd * n;
        let touched = y <= 0.0 || bridge_crossed(s0, y, dt, u);
        self.s = y.abs();
        let touch_x = self.r;
        let mut jump = None;
        if let Some(frac) = self.clock.advance(self.gamma * s0, self.gamma * self.s, dt, &mut self.jumps) {
            let v: f64 = self.jumps.random();
            let gap = self.s;
            let z = v * gap;
            let r_before = self.r;
            self.r += gap - z;
            self.s = z;
            jump = Some(JumpEvent {
                time: (k as f64 - 1.0 + frac) * dt,
                r_before,
                r_after: self.r,
                x: r_before + gap,
                step: k,
            });
        }
        StepOutcome { touched, touch_x, jump }
    }
}

fn check_model(params: &RatchetParams) -> Result<()> {
    if !(params.gamma >= 0.0 && params.mu >= 0.0) {
        return Err(Error::InvalidParams("gamma and mu must be >= 0".into()));
    }
    if params.model == Model::Ou && params.mu <= 0.0 {
        return Err(Error::InvalidParams("the OU ratchet needs mu > 0".into()));
    }
    Ok(())
}

pub(crate) fn make_stepper(params: &RatchetParams, config: &SimConfig) -> Result<Box<dyn Stepper>> {
    config.validate()?;
    check_model(params)?;
    Ok(match params.model {
        Model::Bm => Box::new(BmStepper::new(params.gamma, params.mu, config)),
        Model::Ou => Box::new(OuStepper::new(params.gamma, params.mu, config)),
    })
}

/// Simulates the ratchet and records the full path.
pub fn simulate_ratchet(params: &RatchetParams, config: &SimConfig) -> Result<RatchetPath> {
    let mut st = make_stepper(params, config)?;
    let n = config.steps();
    let mut path = RatchetPath {
        times: Vec::with_capacity(n + 1),
        x: Vec::with_capacity(n + 1),
        r: Vec::with_capacity(n + 1),
        jumps: Vec::new(),
        touches: Vec::new(),
    };
    path.times.push(0.0);
    path.x.push(st.x());
    path.r.push(st.r());
    if st.starts_on_boundary() {
        path.touches.push(0);
    }
    for k in 1..=n {
        let out = st.step(k, config.dt);
        if out.touched {
            path.touches.push(k);
        }
        if let Some(j) = out.jump {
            path.jumps.push(j);
        }
        path.times.push(config.time(k));
        path.x.push(st.x());
        path.r.push(st.r());
    }
    Ok(path)
}

pub fn simulate_bm_ratchet(params: &RatchetParams, config: &SimConfig) -> Result<RatchetPath> {
    expect_model(params, Model::Bm)?;
    simulate_ratchet(params, config)
}

pub fn simulate_ou_ratchet(params: &RatchetParams, config: &SimConfig) -> Result<RatchetPath> {
    expect_model(params, Model::Ou)?;
    simulate_ratchet(params, config)
}

fn expect_model(params: &RatchetParams, model: Model) -> Result<()> {
    if params.model != model {
        return Err(Error::InvalidParams(format!("expected {model} parameters, got {}", params.model)));
    }
    Ok(())
}

/// Endpoint and regeneration increments of one ratchet run, without the path.
#[derive(Clone, Debug, PartialEq)]
pub struct RatchetSummary {
    pub horizon: f64,
    pub x_end: f64,
    pub r_end: f64,
    pub n_jumps: usize,
    pub regenerations: Vec<(f64, f64)>,
}

/// Same random evolution as `simulate_ratchet`, keeping only a summary.
pub fn simulate_ratchet_summary(params: &RatchetParams, config: &SimConfig) -> Result<RatchetSummary> {
    let mut st = make_stepper(params, config)?;
    let n = config.steps();
    let mut tracker = RegenerationTracker::new();
    if st.starts_on_boundary() {
        tracker.touch(0.0, st.r());
    }
    let mut n_jumps = 0;
    for k in 1..=n {
        let out = st.step(k, config.dt);
        if out.touched {
            tracker.touch(config.time(k), out.touch_x);
        }
        if out.jump.is_some() {
            n_jumps += 1;
            tracker.jump();
        }
    }
    Ok(RatchetSummary {
        horizon: config.time(n),
        x_end: st.x(),
        r_end: st.r(),
        n_jumps,
        regenerations: tracker.into_increments(),
    })
}

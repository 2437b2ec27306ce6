//! Ratchet speeds, Green functions of the killed reflected diffusions,
//! killing-time and killing-position functionals, invariant densities.

mod bm;
mod ou;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{integrate, integrate_from, Decay};

pub use crate::quad::integrate_semiinfinite;
pub use bm::{
    bm_expected_killing_time, bm_green, bm_green_basis, bm_inv_expectations, bm_invariant_density,
    bm_killing_density, bm_speed, bm_speed_via_scaling, BasisValues, BmGreenBasis, BmInvariantDensity,
};
pub use ou::{
    ou_expected_killing_time, ou_green_basis, ou_h, ou_invariant_density, ou_killing_density, ou_speed,
    OuGreenBasis, OuH, OuInvariantDensity,
};

/// Which diffusion drives the ratchet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    /// Brownian motion with constant drift −μ.
    Bm,
    /// Ornstein-Uhlenbeck process with drift −μx.
    Ou,
}

impl Model {
    pub fn as_str(self) -> &'static str {
        match self {
            Model::Bm => "bm",
            Model::Ou => "ou",
        }
    }
}

impl std::fmt::Display for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Model {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bm" => Ok(Model::Bm),
            "ou" => Ok(Model::Ou),
            other => Err(Error::InvalidParams(format!("unknown model '{other}' (expected bm or ou)"))),
        }
    }
}

/// Model tag plus jump-rate coefficient γ and drift coefficient μ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatchetParams {
    pub model: Model,
    pub gamma: f64,
    pub mu: f64,
}

impl RatchetParams {
    pub fn new(model: Model, gamma: f64, mu: f64) -> Result<Self> {
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidParams(format!("gamma must be finite and >= 0, got {gamma}")));
        }
        if !(mu >= 0.0) || !mu.is_finite() {
            return Err(Error::InvalidParams(format!("mu must be finite and >= 0, got {mu}")));
        }
        Ok(RatchetParams { model, gamma, mu })
    }

    pub fn bm(gamma: f64, mu: f64) -> Result<Self> {
        Self::new(Model::Bm, gamma, mu)
    }

    pub fn ou(gamma: f64, mu: f64) -> Result<Self> {
        Self::new(Model::Ou, gamma, mu)
    }

    /// Closed-form asymptotic speed of the ratchet.
    pub fn speed(&self) -> Result<f64> {
        match self.model {
            Model::Bm => Ok(bm_speed(self.gamma, self.mu)),
            Model::Ou => ou_speed(self.gamma, self.mu),
        }
    }
}

/// Map from a (γ, μ) Brownian ratchet to the canonical γ = 1/2 one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingMap {
    pub mu_canonical: f64,
    pub space_scale: f64,
    pub time_scale: f64,
}

impl ScalingMap {
    /// Converts a speed of the canonical ratchet back to the original one:
    /// X_t = space_scale · X^canonical_{time_scale·t}.
    pub fn speed_from_canonical(&self, v: f64) -> f64 {
        v * self.space_scale * self.time_scale
    }
}

/// Scaling map to the canonical γ = 1/2 Brownian ratchet.
pub fn canonicalize_bm(gamma: f64, mu: f64) -> Result<ScalingMap> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidParams(format!(
            "canonical scaling needs gamma > 0, got {gamma}; the speed at gamma = 0 is 0"
        )));
    }
    if !(mu >= 0.0) || !mu.is_finite() {
        return Err(Error::InvalidParams(format!("mu must be finite and >= 0, got {mu}")));
    }
    let c = (2.0 * gamma).cbrt();
    Ok(ScalingMap { mu_canonical: mu / c, space_scale: 1.0 / c, time_scale: c * c })
}

/// Decreasing (φ) and increasing (ψ) solutions of the killed generator's ODE
/// on [0, ∞), normalised so that the scale-weighted Wronskian
/// (ψ'φ − ψφ')/s' equals 1, where s' is the scale density.
pub trait GreenBasis: Send + Sync {
    fn phi(&self, x: f64) -> f64;
    fn phi_prime(&self, x: f64) -> f64;
    fn psi(&self, x: f64) -> f64;
    fn psi_prime(&self, x: f64) -> f64;
    /// Scale density s'(x); the speed density is m(x) = 2/s'(x).
    fn scale_density(&self, x: f64) -> f64;
    /// Jump-rate coefficient; the killing rate at gap y is γ·y.
    fn gamma(&self) -> f64;
    /// Decay of the integrands built from φ at +∞.
    fn decay(&self) -> Decay;

    /// φ weighted by the speed density: φ/s'.
    fn big_phi(&self, x: f64) -> f64 {
        self.phi(x) / self.scale_density(x)
    }
    /// ψ weighted by the speed density: ψ/s'.
    fn big_psi(&self, x: f64) -> f64 {
        self.psi(x) / self.scale_density(x)
    }
    fn speed_density(&self, x: f64) -> f64 {
        2.0 / self.scale_density(x)
    }
    /// Density of the killing measure, γ·y·m(y).
    fn killing_measure(&self, y: f64) -> f64 {
        self.gamma() * y * self.speed_density(y)
    }
    fn green(&self, x: f64, y: f64) -> f64 {
        if x <= y {
            self.psi(x) * self.phi(y)
        } else {
            self.phi(x) * self.psi(y)
        }
    }
    fn wronskian(&self, x: f64) -> f64 {
        (self.psi_prime(x) * self.phi(x) - self.psi(x) * self.phi_prime(x)) / self.scale_density(x)
    }
}

const QUAD_TOL: f64 = 1e-13;

/// E_x[τ] = 2(φ(x)∫_0^x Ψ + ψ(x)∫_x^∞ Φ).
pub fn expected_killing_time<G: GreenBasis + ?Sized>(basis: &G, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::Domain { func: "expected_killing_time", arg: x });
    }
    let lower = integrate(&|y| basis.big_psi(y), 0.0, x, 1e-15, QUAD_TOL)?.value;
    let upper = integrate_from(&|y| basis.big_phi(y), x, basis.decay())?;
    Ok(2.0 * (basis.phi(x) * lower + basis.psi(x) * upper))
}

/// Density at y of the position at killing time for the diffusion started at x.
pub fn killing_density<G: GreenBasis + ?Sized>(basis: &G, x: f64, y: f64) -> f64 {
    basis.green(x, y) * basis.killing_measure(y)
}

/// ∫_0^∞ weight(y) times the killing density started at x, integrating each
/// side of the kink at y = x separately.
pub fn killing_mass<G: GreenBasis + ?Sized>(basis: &G, x: f64, weight: &dyn Fn(f64) -> f64) -> Result<f64> {
    let f = |y: f64| killing_density(basis, x, y) * weight(y);
    let lower = integrate(&f, 0.0, x, 1e-15, QUAD_TOL)?.value;
    let upper = integrate_from(&f, x, basis.decay())?;
    Ok(lower + upper)
}

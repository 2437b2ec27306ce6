//! Ornstein-Uhlenbeck ratchet: the function h, the speed v̂, and the Green
//! basis of reflected OU killed at rate γ·x.

use std::f64::consts::PI;

use super::{expected_killing_time, killing_density, GreenBasis};
use crate::error::{Error, Result};
use crate::quad::{integrate_semiinfinite, Decay};
use crate::specfun::{kummer_m, rgamma, tricomi_u, HypergeomArgs};

fn check_params(gamma: f64, mu: f64, need_positive_gamma: bool) -> Result<()> {
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(Error::InvalidParams(format!(
            "the OU ratchet needs mu > 0, got {mu}; the driftless limit is the Brownian ratchet, use bm_speed(gamma, 0)"
        )));
    }
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidParams(format!("gamma must be finite and >= 0, got {gamma}")));
    }
    if need_positive_gamma && gamma == 0.0 {
        return Err(Error::InvalidParams("the killed OU Green basis needs gamma > 0".into()));
    }
    Ok(())
}

fn u(a: f64, b: f64, x: f64) -> f64 {
    tricomi_u(HypergeomArgs::new(a, b, x)).unwrap_or(f64::NAN)
}

fn m(a: f64, b: f64, x: f64) -> f64 {
    kummer_m(HypergeomArgs::new(a, b, x)).unwrap_or(f64::NAN)
}

/// h(x) = e^{−γx/μ−μx²} U(1/2 − γ²/(4μ³), 1/2, p(x)²), p(x) = γ/μ^{3/2} + √μ x.
#[derive(Clone, Debug)]
pub struct OuH {
    gamma: f64,
    mu: f64,
    a: f64,
    p0: f64,
    sqrt_mu: f64,
}

impl OuH {
    pub fn new(gamma: f64, mu: f64) -> Result<Self> {
        check_params(gamma, mu, false)?;
        let kappa = gamma * gamma / (4.0 * mu * mu * mu);
        Ok(OuH { gamma, mu, a: 0.5 - kappa, p0: gamma / mu.powf(1.5), sqrt_mu: mu.sqrt() })
    }

    fn prefactor(&self, x: f64) -> f64 {
        (-self.gamma * x / self.mu - self.mu * x * x).exp()
    }

    pub fn value(&self, x: f64) -> f64 {
        let p = self.p0 + self.sqrt_mu * x;
        self.prefactor(x) * u(self.a, 0.5, p * p)
    }

    /// h'(x) by the chain rule with U'(a, b, z) = −a U(a+1, b+1, z).
    pub fn derivative(&self, x: f64) -> f64 {
        let p = self.p0 + self.sqrt_mu * x;
        let z = p * p;
        // p·U(a+1, 3/2, p²) → √π/Γ(a+1) as p → 0.
        let p_uprime = if self.a == 0.0 {
            0.0
        } else if p == 0.0 {
            -self.a * PI.sqrt() * rgamma(self.a + 1.0).unwrap_or(f64::NAN)
        } else {
            -self.a * p * u(self.a + 1.0, 1.5, z)
        };
        let e = self.prefactor(x);
        e * ((-self.gamma / self.mu - 2.0 * self.mu * x) * u(self.a, 0.5, z) + 2.0 * self.sqrt_mu * p_uprime)
    }

    pub fn integral(&self) -> Result<f64> {
        integrate_semiinfinite(&|x| self.value(x), Decay::Gauss)
    }
}

pub fn ou_h(gamma: f64, mu: f64, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::Domain { func: "ou_h", arg: x });
    }
    Ok(OuH::new(gamma, mu)?.value(x))
}

/// Speed v̂(μ, γ) = −h'(0)/(2h(0)) − μ∫h/h(0); exactly 0 when γ = 0.
pub fn ou_speed(gamma: f64, mu: f64) -> Result<f64> {
    check_params(gamma, mu, false)?;
    if gamma == 0.0 {
        return Ok(0.0);
    }
    let h = OuH::new(gamma, mu)?;
    let h0 = h.value(0.0);
    let v = -h.derivative(0.0) / (2.0 * h0) - mu * h.integral()? / h0;
    if !v.is_finite() {
        return Err(Error::Degenerate(format!("OU speed not finite at gamma={gamma}, mu={mu}")));
    }
    Ok(v)
}

/// Normalised invariant density f̂_ν = h/∫h of the OU gap chain.
#[derive(Clone, Debug)]
pub struct OuInvariantDensity {
    h: OuH,
    norm: f64,
}

impl OuInvariantDensity {
    pub fn new(gamma: f64, mu: f64) -> Result<Self> {
        check_params(gamma, mu, true)?;
        let h = OuH::new(gamma, mu)?;
        let norm = h.integral()?;
        Ok(OuInvariantDensity { h, norm })
    }

    pub fn density(&self, z: f64) -> f64 {
        self.h.value(z) / self.norm
    }

    /// E_ν[η̂] = f̂_ν(0)/γ.
    pub fn mean_inter_jump_time(&self) -> f64 {
        self.density(0.0) / self.h.gamma
    }
}

pub fn ou_invariant_density(gamma: f64, mu: f64, z: f64) -> Result<f64> {
    if !(z >= 0.0) {
        return Err(Error::Domain { func: "ou_invariant_density", arg: z });
    }
    Ok(OuInvariantDensity::new(gamma, mu)?.density(z))
}

/// Which Kummer solution is paired with φ̂ to build ψ̂.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum SecondSolution {
    /// M(−κ, 1/2, p²)
    Even,
    /// p·M(1/2 − κ, 3/2, p²)
    Odd,
}

/// φ̂(x) = e^{−γx/μ} U(−κ, 1/2, p²), ψ̂ = (ψ̂₁ − (ψ̂₁'(0)/φ̂'(0)) φ̂)/w with
/// κ = γ²/(4μ³) and w the scale-normalised Wronskian.
#[derive(Clone, Debug)]
pub struct OuGreenBasis {
    gamma: f64,
    mu: f64,
    kappa: f64,
    p0: f64,
    sqrt_mu: f64,
    second: SecondSolution,
    c_phi: f64,
    inv_w: f64,
}

const VALIDATION_GRID: usize = 25;
const VALIDATION_STEP: f64 = 0.25;

impl OuGreenBasis {
    pub fn new(gamma: f64, mu: f64) -> Result<Self> {
        check_params(gamma, mu, true)?;
        let kappa = gamma * gamma / (4.0 * mu * mu * mu);
        // U(−κ,1/2,z) = √π/Γ(1/2−κ)·M(−κ,1/2,z) − 2√π/Γ(−κ)·√z·M(1/2−κ,3/2,z).
        // Pair φ̂ with whichever Kummer solution carries the smaller weight in U,
        // so that removing the φ̂ component does not cancel catastrophically.
        let w_even = rgamma(0.5 - kappa)?.abs();
        let w_odd = 2.0 * rgamma(-kappa)?.abs();
        let second = if w_even <= w_odd { SecondSolution::Even } else { SecondSolution::Odd };
        let mut b = OuGreenBasis {
            gamma,
            mu,
            kappa,
            p0: gamma / mu.powf(1.5),
            sqrt_mu: mu.sqrt(),
            second,
            c_phi: 0.0,
            inv_w: 1.0,
        };
        let (_, dphi0) = b.phi_pair(0.0);
        let (_, dpsi1_0) = b.psi1_pair(0.0);
        if !(dphi0 != 0.0 && dphi0.is_finite()) {
            return Err(Error::Degenerate(format!("phi'(0) = {dphi0} at gamma={gamma}, mu={mu}")));
        }
        b.c_phi = -dpsi1_0 / dphi0;
        let x_star = (0..VALIDATION_GRID)
            .map(|i| i as f64 * VALIDATION_STEP)
            .min_by(|&x, &y| b.phi_pair(x).0.ln().abs().total_cmp(&b.phi_pair(y).0.ln().abs()))
            .unwrap_or(0.0);
        let w = b.wronskian(x_star);
        if !(w.is_finite() && w != 0.0) {
            return Err(Error::Degenerate(format!("Wronskian {w} at gamma={gamma}, mu={mu}")));
        }
        b.inv_w = 1.0 / w;
        b.validate()?;
        Ok(b)
    }

    fn p(&self, x: f64) -> f64 {
        self.p0 + self.sqrt_mu * x
    }

    fn decay_factor(&self, x: f64) -> f64 {
        (-self.gamma * x / self.mu).exp()
    }

    /// (φ̂, φ̂')
    fn phi_pair(&self, x: f64) -> (f64, f64) {
        let p = self.p(x);
        let z = p * p;
        let e = self.decay_factor(x);
        let u0 = u(-self.kappa, 0.5, z);
        let du = if self.kappa == 0.0 { 0.0 } else { self.kappa * u(1.0 - self.kappa, 1.5, z) };
        (e * u0, e * (-self.gamma / self.mu * u0 + 2.0 * self.sqrt_mu * p * du))
    }

    /// (ψ̂₁, ψ̂₁') before the φ̂ correction and Wronskian scaling.
    fn psi1_pair(&self, x: f64) -> (f64, f64) {
        let p = self.p(x);
        let z = p * p;
        let k = self.kappa;
        let (g, dg) = match self.second {
            SecondSolution::Even => (m(-k, 0.5, z), -2.0 * k * m(1.0 - k, 1.5, z)),
            SecondSolution::Odd => {
                let m0 = m(0.5 - k, 1.5, z);
                (p * m0, 0.5 / p * m0 + p * (0.5 - k) / 1.5 * m(1.5 - k, 2.5, z))
            }
        };
        let e = self.decay_factor(x);
        (e * g, e * (-self.gamma / self.mu * g + 2.0 * self.sqrt_mu * p * dg))
    }

    /// φ̂, φ̂', ψ̂, ψ̂' at one point.
    pub fn values(&self, x: f64) -> super::bm::BasisValues {
        let (phi, dphi) = self.phi_pair(x);
        let (psi1, dpsi1) = self.psi1_pair(x);
        super::bm::BasisValues {
            phi,
            phi_prime: dphi,
            psi: (psi1 + self.c_phi * phi) * self.inv_w,
            psi_prime: (dpsi1 + self.c_phi * dphi) * self.inv_w,
        }
    }

    fn validate(&self) -> Result<()> {
        let fail = |what: &str, x: f64| {
            Err(Error::Degenerate(format!(
                "{what} at x={x} for gamma={}, mu={}",
                self.gamma, self.mu
            )))
        };
        let v0 = self.values(0.0);
        if v0.psi_prime.abs() > 1e-8 * v0.psi.abs().max(1.0) {
            return fail("psi'(0) != 0", 0.0);
        }
        for i in 0..VALIDATION_GRID {
            let x = i as f64 * VALIDATION_STEP;
            let v = self.values(x);
            if !(v.phi > 0.0 && v.phi_prime < 0.0) {
                return fail("phi not positive decreasing", x);
            }
            if !(v.psi > 0.0 && (x == 0.0 || v.psi_prime > 0.0)) {
                return fail("psi not positive increasing", x);
            }
            if (self.wronskian(x) - 1.0).abs() > 1e-6 {
                return fail("Wronskian drift", x);
            }
        }
        Ok(())
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }
}

impl GreenBasis for OuGreenBasis {
    fn phi(&self, x: f64) -> f64 {
        self.phi_pair(x).0
    }
    fn phi_prime(&self, x: f64) -> f64 {
        self.phi_pair(x).1
    }
    fn psi(&self, x: f64) -> f64 {
        let phi = self.phi(x);
        (self.psi1_pair(x).0 + self.c_phi * phi) * self.inv_w
    }
    fn psi_prime(&self, x: f64) -> f64 {
        self.values(x).psi_prime
    }
    fn scale_density(&self, x: f64) -> f64 {
        (self.mu * x * x).exp()
    }
    fn gamma(&self) -> f64 {
        self.gamma
    }
    fn decay(&self) -> Decay {
        Decay::Gauss
    }
    fn wronskian(&self, x: f64) -> f64 {
        let (phi, dphi) = self.phi_pair(x);
        let (psi1, dpsi1) = self.psi1_pair(x);
        let psi = (psi1 + self.c_phi * phi) * self.inv_w;
        let dpsi = (dpsi1 + self.c_phi * dphi) * self.inv_w;
        (dpsi * phi - psi * dphi) * (-self.mu * x * x).exp()
    }
}

pub fn ou_green_basis(gamma: f64, mu: f64) -> Result<OuGreenBasis> {
    OuGreenBasis::new(gamma, mu)
}

/// E_x[τ̂] for the killed reflected OU process.
pub fn ou_expected_killing_time(gamma: f64, mu: f64, x: f64) -> Result<f64> {
    expected_killing_time(&OuGreenBasis::new(gamma, mu)?, x)
}

/// Density G(x,y)·2γy·e^{−μy²} of the killing position started at x.
pub fn ou_killing_density(gamma: f64, mu: f64, x: f64, y: f64) -> Result<f64> {
    if !(x >= 0.0 && y >= 0.0) {
        return Err(Error::Domain { func: "ou_killing_density", arg: x.min(y) });
    }
    Ok(killing_density(&OuGreenBasis::new(gamma, mu)?, x, y))
}

//! Brownian ratchet at the canonical jump rate γ = 1/2.
//!
//! Airy values are taken in exponentially scaled form throughout so that
//! every quantity stays representable for large μ and x.

use std::f64::consts::PI;

use super::{canonicalize_bm, expected_killing_time, killing_density, GreenBasis};
use crate::error::{Error, Result};
use crate::quad::{integrate_semiinfinite, Decay};
use crate::specfun::{airy_ai_log_derivative, airy_scaled};

fn zeta(s: f64) -> f64 {
    2.0 / 3.0 * s * s.sqrt()
}

fn check_mu(mu: f64) -> Result<()> {
    if !(mu >= 0.0) || !mu.is_finite() {
        return Err(Error::InvalidParams(format!("mu must be finite and >= 0, got {mu}")));
    }
    Ok(())
}

/// Speed v(μ, γ) of the Brownian ratchet; exactly 0 when γ = 0.
pub fn bm_speed(gamma: f64, mu: f64) -> f64 {
    if gamma == 0.0 {
        return 0.0;
    }
    let s = (2.0 * gamma).powf(-2.0 / 3.0) * mu * mu;
    let ld = airy_ai_log_derivative(s).unwrap_or(f64::NAN);
    -(gamma.cbrt() / 2f64.powf(2.0 / 3.0)) * ld - mu / 2.0
}

/// φ(x) = π e^{μx} Ai(μ²+x), ψ(x) = e^{μx}(C·Ai(μ²+x) + Bi(μ²+x)) with C
/// chosen so that ψ'(0) = 0.
#[derive(Clone, Debug)]
pub struct BmGreenBasis {
    mu: f64,
    zeta0: f64,
    // C·e^{−2ζ(μ²)}, finite for every μ.
    c_scaled: f64,
}

/// φ, φ', ψ, ψ' at one point.
#[derive(Clone, Copy, Debug)]
pub struct BasisValues {
    pub phi: f64,
    pub phi_prime: f64,
    pub psi: f64,
    pub psi_prime: f64,
}

impl BmGreenBasis {
    pub fn new(mu: f64) -> Result<Self> {
        check_mu(mu)?;
        let s0 = mu * mu;
        let q = airy_scaled(s0)?;
        let denom = mu * q.ai + q.ai_prime;
        if !(denom < 0.0) {
            return Err(Error::Degenerate(format!("mu·Ai(mu²) + Ai'(mu²) = {denom} is not negative")));
        }
        let c_scaled = -(mu * q.bi + q.bi_prime) / denom;
        Ok(BmGreenBasis { mu, zeta0: zeta(s0), c_scaled })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// All four basis values with a single Airy evaluation.
    pub fn values(&self, x: f64) -> BasisValues {
        let mu = self.mu;
        let s = mu * mu + x;
        let q = match airy_scaled(s) {
            Ok(q) => q,
            Err(_) => {
                return BasisValues { phi: f64::NAN, phi_prime: f64::NAN, psi: f64::NAN, psi_prime: f64::NAN }
            }
        };
        let z = zeta(s);
        let e_ai = (mu * x - z).exp();
        let e_c = (mu * x + 2.0 * self.zeta0 - z).exp();
        let e_bi = (mu * x + z).exp();
        BasisValues {
            phi: PI * q.ai * e_ai,
            phi_prime: PI * e_ai * (mu * q.ai + q.ai_prime),
            psi: self.c_scaled * q.ai * e_c + q.bi * e_bi,
            psi_prime: self.c_scaled * e_c * (mu * q.ai + q.ai_prime) + e_bi * (mu * q.bi + q.bi_prime),
        }
    }
}

impl GreenBasis for BmGreenBasis {
    fn phi(&self, x: f64) -> f64 {
        self.values(x).phi
    }
    fn phi_prime(&self, x: f64) -> f64 {
        self.values(x).phi_prime
    }
    fn psi(&self, x: f64) -> f64 {
        self.values(x).psi
    }
    fn psi_prime(&self, x: f64) -> f64 {
        self.values(x).psi_prime
    }
    fn scale_density(&self, x: f64) -> f64 {
        (2.0 * self.mu * x).exp()
    }
    fn gamma(&self) -> f64 {
        0.5
    }
    fn decay(&self) -> Decay {
        Decay::Exp
    }
    fn big_phi(&self, x: f64) -> f64 {
        let s = self.mu * self.mu + x;
        match airy_scaled(s) {
            Ok(q) => PI * q.ai * (-self.mu * x - zeta(s)).exp(),
            Err(_) => f64::NAN,
        }
    }
}

pub fn bm_green_basis(mu: f64) -> Result<BmGreenBasis> {
    BmGreenBasis::new(mu)
}

/// Green function G(x, y) of killed reflected BM with drift −μ (γ = 1/2).
pub fn bm_green(mu: f64, x: f64, y: f64) -> Result<f64> {
    if !(x >= 0.0 && y >= 0.0) {
        return Err(Error::Domain { func: "bm_green", arg: x.min(y) });
    }
    Ok(BmGreenBasis::new(mu)?.green(x, y))
}

/// E_x[τ] for the killed reflected BM at γ = 1/2.
pub fn bm_expected_killing_time(mu: f64, x: f64) -> Result<f64> {
    expected_killing_time(&BmGreenBasis::new(mu)?, x)
}

/// Density G(x,y)·y·e^{−2μy} of the killing position started at x (γ = 1/2).
pub fn bm_killing_density(mu: f64, x: f64, y: f64) -> Result<f64> {
    if !(x >= 0.0 && y >= 0.0) {
        return Err(Error::Domain { func: "bm_killing_density", arg: x.min(y) });
    }
    Ok(killing_density(&BmGreenBasis::new(mu)?, x, y))
}

/// Invariant density f_ν(z) ∝ e^{−μz} Ai(μ²+z) of the gap chain (γ = 1/2),
/// with its normalising constant computed once.
#[derive(Clone, Debug)]
pub struct BmInvariantDensity {
    mu: f64,
    zeta0: f64,
    // ∫_0^∞ e^{−μx} Ai(μ²+x) dx · e^{ζ(μ²)}
    norm_scaled: f64,
}

impl BmInvariantDensity {
    pub fn new(mu: f64) -> Result<Self> {
        check_mu(mu)?;
        let zeta0 = zeta(mu * mu);
        let mut d = BmInvariantDensity { mu, zeta0, norm_scaled: 1.0 };
        d.norm_scaled = integrate_semiinfinite(&|x| d.unnormalised(x), Decay::Exp)?;
        Ok(d)
    }

    fn unnormalised(&self, z: f64) -> f64 {
        let s = self.mu * self.mu + z;
        match airy_scaled(s) {
            Ok(q) => q.ai * (self.zeta0 - zeta(s) - self.mu * z).exp(),
            Err(_) => f64::NAN,
        }
    }

    pub fn density(&self, z: f64) -> f64 {
        self.unnormalised(z) / self.norm_scaled
    }

    /// (E_ν[Y], E_ν[η]) = (−(μAi(μ²)+Ai'(μ²))/K, 2Ai(μ²)/K), K = ∫e^{−μx}Ai(μ²+x)dx.
    pub fn expectations(&self) -> Result<(f64, f64)> {
        let q = airy_scaled(self.mu * self.mu)?;
        Ok((-(self.mu * q.ai + q.ai_prime) / self.norm_scaled, 2.0 * q.ai / self.norm_scaled))
    }
}

pub fn bm_invariant_density(mu: f64, z: f64) -> Result<f64> {
    if !(z >= 0.0) {
        return Err(Error::Domain { func: "bm_invariant_density", arg: z });
    }
    Ok(BmInvariantDensity::new(mu)?.density(z))
}

/// E_ν[Y₁] and E_ν[η₁] for the canonical (γ = 1/2) chain.
pub fn bm_inv_expectations(mu: f64) -> Result<(f64, f64)> {
    BmInvariantDensity::new(mu)?.expectations()
}

/// Speed through the canonical map: (2γ)^{1/3} v((2γ)^{−1/3} μ, 1/2).
pub fn bm_speed_via_scaling(gamma: f64, mu: f64) -> Result<f64> {
    let map = canonicalize_bm(gamma, mu)?;
    Ok(map.speed_from_canonical(bm_speed(0.5, map.mu_canonical)))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::closedform::killing_mass;
    use crate::quad::gauss10;
    use crate::specfun::airy;
    use proptest::prelude::*;

    /// First and second derivatives by five-point central differences.
    pub(crate) fn five_point(f: &dyn Fn(f64) -> f64, x: f64, h: f64) -> (f64, f64) {
        let (m2, m1, c, p1, p2) = (f(x - 2.0 * h), f(x - h), f(x), f(x + h), f(x + 2.0 * h));
        let d1 = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h);
        let d2 = (-m2 + 16.0 * m1 - 30.0 * c + 16.0 * p1 - p2) / (12.0 * h * h);
        (d1, d2)
    }

    const V_CANONICAL_ZERO: f64 = 0.364_505_566_473_613_5;

    #[test]
    fn speed_at_zero_drift() {
        let a = airy(0.0).unwrap();
        assert!((bm_speed(0.5, 0.0) - V_CANONICAL_ZERO).abs() < 1e-15);
        assert!((bm_speed(0.5, 0.0) + a.ai_prime / (2.0 * a.ai)).abs() < 1e-15);
        assert_eq!(bm_speed(0.0, 3.0), 0.0);
        assert!((bm_speed(4.0, 0.0) - 2.0 * V_CANONICAL_ZERO).abs() < 1e-14);
    }

    #[test]
    fn speed_reference_values() {
        for &(g, m, v) in &[
            (0.5, 1.0, 0.088_160_983_571_850_51),
            (0.5, 0.3, 0.237_979_152_377_542_1),
            (0.5, 2.0, 0.029_169_481_230_444_106),
            (1.0, 2.0, 0.055_152_464_071_144_31),
            (2.0, 0.25, 0.464_024_439_594_559_17),
            (0.5, 8.0, 0.001_950_747_767_909_097_1),
            (0.1, 4.0, 0.001_559_462_445_366_116_4),
        ] {
            assert!((bm_speed(g, m) - v).abs() < 1e-11 * v.max(1e-3), "{g} {m}");
        }
    }

    #[test]
    fn speed_decreases_in_the_tail() {
        let mut prev = bm_speed(0.5, 4.0);
        for i in 1..=40 {
            let v = bm_speed(0.5, 4.0 + 0.1 * i as f64);
            assert!(v >= 0.0 && v <= prev);
            prev = v;
        }
    }

    #[test]
    fn scaling_examples() {
        let m = canonicalize_bm(0.5, 1.3).unwrap();
        assert!((m.space_scale - 1.0).abs() < 1e-15 && (m.time_scale - 1.0).abs() < 1e-15);
        assert!((m.mu_canonical - 1.3).abs() < 1e-15);
        let m = canonicalize_bm(4.0, 1.0).unwrap();
        assert!((m.time_scale - 4.0).abs() < 1e-14);
        assert!((m.space_scale - 0.5).abs() < 1e-15);
        assert!((m.mu_canonical - 0.5).abs() < 1e-15);
        assert!(canonicalize_bm(0.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn scaling_identity(mu in 0.0f64..5.0, gamma in 0.01f64..5.0) {
            let v = bm_speed(gamma, mu);
            let w = bm_speed_via_scaling(gamma, mu).unwrap();
            prop_assert!((v - w).abs() <= 1e-12 * (1.0 + v.abs()));
        }
    }

    #[test]
    fn basis_properties() {
        let b0 = bm_green_basis(0.0).unwrap();
        assert!((b0.phi(0.0) - 1.115_353_525_912_247_9).abs() < 1e-14);
        assert!((b0.psi(0.0) - 1.229_853_254_892_001_5).abs() < 1e-14);
        for mu in [0.0, 0.5, 1.0, 2.0] {
            let b = bm_green_basis(mu).unwrap();
            assert!(b.psi_prime(0.0).abs() < 1e-10, "mu={mu}");
            let a = airy(mu * mu).unwrap();
            assert!((b.phi(0.0) - PI * a.ai).abs() < 1e-13 * b.phi(0.0));
            assert!(b.phi(2.0) < b.phi(1.0) && b.psi(2.0) > b.psi(1.0));
            for i in 0..40 {
                let x = 0.25 * i as f64;
                assert!((b.wronskian(x) - 1.0).abs() < 1e-8, "mu={mu} x={x}");
                assert!(b.phi_prime(x) < 0.0 && b.phi(x) > 0.0);
                if x > 0.0 {
                    assert!(b.psi_prime(x) > 0.0);
                }
            }
        }
    }

    #[test]
    fn green_symmetry_and_positivity() {
        let b = bm_green_basis(0.7).unwrap();
        for i in 0..20 {
            for j in 0..20 {
                let (x, y) = (0.3 * i as f64, 0.37 * j as f64);
                let g = b.green(x, y);
                assert!(g > 0.0 && g.is_finite());
                assert_eq!(g, b.green(y, x));
            }
            let y = 0.4 * i as f64;
            assert!((b.green(0.0, y) - b.psi(0.0) * b.phi(y)).abs() <= 1e-15 * b.green(0.0, y));
        }
    }

    #[test]
    fn expected_killing_time_reference() {
        for &(mu, x, e) in &[
            (0.0, 0.0, 2.575_798_633_708_138_2),
            (1.0, 1.0, 4.088_496_334_865_522),
            (0.5, 2.0, 1.708_438_912_790_916_6),
            (0.0, 3.0, 0.741_631_159_625_898_4),
        ] {
            let got = bm_expected_killing_time(mu, x).unwrap();
            assert!((got - e).abs() < 1e-9, "mu={mu} x={x}: {got}");
        }
        for mu in [0.0, 1.0] {
            let e0 = bm_expected_killing_time(mu, 0.0).unwrap();
            for x in [0.5, 1.0, 3.0] {
                assert!(bm_expected_killing_time(mu, x).unwrap() <= e0);
            }
        }
    }

    #[test]
    fn kac_first_moment_formula() {
        // ∫G(x,y)m(y)dy by fixed composite Gauss panels, independent of the adaptive route.
        for &(mu, x) in &[(0.0, 0.0), (1.0, 1.0), (0.5, 2.5)] {
            let b = bm_green_basis(mu).unwrap();
            let f = |y: f64| b.green(x, y) * b.speed_density(y);
            let mut kac = 0.0;
            let h = x / 40.0;
            for k in 0..40 {
                kac += gauss10(&f, k as f64 * h, (k + 1) as f64 * h);
            }
            for k in 0..600 {
                kac += gauss10(&f, x + 0.05 * k as f64, x + 0.05 * (k + 1) as f64);
            }
            let e = expected_killing_time(&b, x).unwrap();
            assert!((kac - e).abs() < 1e-9 * e, "mu={mu} x={x}: {kac} vs {e}");
        }
    }

    #[test]
    fn killing_position_identities() {
        for mu in [0.0, 0.5, 1.0, 2.0] {
            let b = bm_green_basis(mu).unwrap();
            let e0 = expected_killing_time(&b, 0.0).unwrap();
            for x in [0.0, 1.0, 3.0] {
                let mass = killing_mass(&b, x, &|_| 1.0).unwrap();
                assert!((mass - 1.0).abs() < 1e-8, "mu={mu} x={x}: {mass}");
                let mean = killing_mass(&b, x, &|y| y).unwrap();
                let ex = expected_killing_time(&b, x).unwrap();
                let identity = x + b.phi(x) * b.psi(0.0) - mu * ex;
                assert!((mean - identity).abs() < 1e-7, "mu={mu} x={x}: {mean} vs {identity}");
                assert!(mean <= x + b.phi(0.0) * b.psi(0.0) + mu * e0 + 1e-9);
            }
        }
    }

    #[test]
    fn invariant_density_properties() {
        for mu in [0.0, 1.0, 2.5] {
            let d = BmInvariantDensity::new(mu).unwrap();
            let total = integrate_semiinfinite(&|z| d.density(z), Decay::Exp).unwrap();
            assert!((total - 1.0).abs() < 1e-9);
            let mut prev = d.density(0.0);
            for i in 1..100 {
                let z = 0.03 + 0.08 * i as f64;
                let f = d.density(z);
                assert!(f < prev);
                prev = f;
                let (f1, f2) = five_point(&|z| d.density(z), z, 3e-3);
                assert!((f2 + 2.0 * mu * f1 - z * f).abs() < 1e-6, "mu={mu} z={z}");
            }
        }
    }

    #[test]
    fn invariant_expectations() {
        let (ey, eeta) = bm_inv_expectations(0.0).unwrap();
        let a = airy(0.0).unwrap();
        assert!((eeta - 6.0 * a.ai).abs() < 1e-10);
        assert!((ey + 3.0 * a.ai_prime).abs() < 1e-10);
        for mu in [0.0, 0.5, 1.0, 2.0, 6.0] {
            let (ey, eeta) = bm_inv_expectations(mu).unwrap();
            assert!((ey / eeta - bm_speed(0.5, mu)).abs() < 1e-9, "mu={mu}");
        }
    }

    #[test]
    fn stationary_mean_of_expected_killing_time() {
        let mu = 1.0;
        let b = bm_green_basis(mu).unwrap();
        let d = BmInvariantDensity::new(mu).unwrap();
        let (_, eeta) = d.expectations().unwrap();
        let mut acc = 0.0;
        for k in 0..160 {
            let (lo, hi) = (0.05 * k as f64, 0.05 * (k + 1) as f64);
            acc += gauss10(&|z| d.density(z) * expected_killing_time(&b, z).unwrap(), lo, hi);
        }
        assert!((acc - eeta).abs() < 1e-7, "{acc} vs {eeta}");
    }
}

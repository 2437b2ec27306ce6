use std::f64::consts::PI;

use super::gamma::gamma_fn;
use crate::error::{Error, Result};
use crate::quad::integrate;

/// Ai, Ai', Bi, Bi' at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AiryQuad {
    pub ai: f64,
    pub ai_prime: f64,
    pub bi: f64,
    pub bi_prime: f64,
}

impl AiryQuad {
    pub fn wronskian(&self) -> f64 {
        self.ai * self.bi_prime - self.ai_prime * self.bi
    }
}

pub const AIRY_MIN: f64 = -5.0;
pub const AIRY_MAX: f64 = 50.0;

const MACLAURIN_AI_MAX: f64 = 2.0;
const MACLAURIN_BI_MAX: f64 = 8.0;

// Ai(0) and -Ai'(0).
fn airy_constants() -> (f64, f64) {
    let c1 = 3f64.powf(-2.0 / 3.0) / gamma_fn(2.0 / 3.0).expect("finite");
    let c2 = 3f64.powf(-1.0 / 3.0) / gamma_fn(1.0 / 3.0).expect("finite");
    (c1, c2)
}

/// The two Maclaurin series f, g of the Airy equation and their derivatives.
fn maclaurin_fg(x: f64) -> (f64, f64, f64, f64) {
    let x3 = x * x * x;
    let (mut f, mut fp, mut g, mut gp) = (1.0, 0.0, x, 1.0);
    let (mut tf, mut tfp, mut tg, mut tgp) = (1.0, 0.5 * x * x, x, 1.0);
    fp += tfp;
    for k in 1..200 {
        let kf = k as f64;
        tf *= x3 / ((3.0 * kf - 1.0) * (3.0 * kf));
        tg *= x3 / ((3.0 * kf) * (3.0 * kf + 1.0));
        tfp *= x3 / ((3.0 * kf) * (3.0 * kf + 2.0));
        tgp *= x3 / ((3.0 * kf - 2.0) * (3.0 * kf));
        f += tf;
        g += tg;
        fp += tfp;
        gp += tgp;
        let tiny = 1e-17;
        if tf.abs() <= tiny * f.abs()
            && tg.abs() <= tiny * g.abs().max(1e-300)
            && tfp.abs() <= tiny * fp.abs().max(1e-300)
            && tgp.abs() <= tiny * gp.abs()
        {
            break;
        }
    }
    (f, fp, g, gp)
}

fn maclaurin(x: f64) -> AiryQuad {
    let (c1, c2) = airy_constants();
    let (f, fp, g, gp) = maclaurin_fg(x);
    let s3 = 3f64.sqrt();
    AiryQuad {
        ai: c1 * f - c2 * g,
        ai_prime: c1 * fp - c2 * gp,
        bi: s3 * (c1 * f + c2 * g),
        bi_prime: s3 * (c1 * fp + c2 * gp),
    }
}

fn zeta(x: f64) -> f64 {
    2.0 / 3.0 * x * x.sqrt()
}

/// Asymptotic series Σ c_k / ζ^k for the decaying (sign = -1) or growing
/// (sign = +1) branch; returns (value series, derivative series).
fn asymptotic_sums(z: f64, sign: f64) -> (f64, f64) {
    let (mut su, mut sv) = (1.0, 1.0);
    let mut u = 1.0;
    let mut zk = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..40 {
        let kf = k as f64;
        u *= (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf);
        let v = -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u;
        zk *= sign / z;
        let tu = u * zk;
        let tv = v * zk;
        if tu.abs().max(tv.abs()) > last {
            break;
        }
        last = tu.abs().max(tv.abs());
        su += tu;
        sv += tv;
        if last < 1e-17 {
            break;
        }
    }
    (su, sv)
}

/// Ai·e^ζ and Ai'·e^ζ on 2 < x ≤ 8 from the integral representation of K_ν.
fn ai_scaled_integral(x: f64) -> (f64, f64) {
    let z = zeta(x);
    let two_z = 2.0 * z;
    // With t = s^6/(2ζ) the integrands are smooth and vanish quickly past s ≈ 2.3.
    let i13 = |s: f64| {
        let s6 = s.powi(6);
        6.0 * s.powi(4) * (-s6).exp() * (1.0 + s6 / two_z).powf(-1.0 / 6.0)
    };
    let i23 = |s: f64| {
        let s6 = s.powi(6);
        6.0 * s6 * (-s6).exp() * (1.0 + s6 / two_z).powf(1.0 / 6.0)
    };
    let upper = 2.6;
    let a = integrate(&i13, 0.0, upper, 0.0, 1e-13).expect("smooth integrand").value;
    let b = integrate(&i23, 0.0, upper, 0.0, 1e-13).expect("smooth integrand").value;
    let pref = PI.sqrt() / two_z.sqrt();
    let k13 = pref / gamma_fn(5.0 / 6.0).expect("finite") * a;
    let k23 = pref / gamma_fn(7.0 / 6.0).expect("finite") * b;
    ((x / 3.0).sqrt() / PI * k13, -x / (PI * 3f64.sqrt()) * k23)
}

/// Ai·e^ζ, Ai'·e^ζ for x > 8.
fn ai_scaled_asymptotic(x: f64) -> (f64, f64) {
    let z = zeta(x);
    let (su, sv) = asymptotic_sums(z, -1.0);
    let q = x.powf(0.25);
    let c = 1.0 / (2.0 * PI.sqrt());
    (c / q * su, -c * q * sv)
}

/// Bi·e^-ζ, Bi'·e^-ζ for x > 8.
fn bi_scaled_asymptotic(x: f64) -> (f64, f64) {
    let z = zeta(x);
    let (su, sv) = asymptotic_sums(z, 1.0);
    let q = x.powf(0.25);
    let c = 1.0 / PI.sqrt();
    (c / q * su, c * q * sv)
}

/// Exponentially scaled Airy functions for x ≥ 0:
/// (Ai·e^ζ, Ai'·e^ζ, Bi·e^-ζ, Bi'·e^-ζ) with ζ = 2x^{3/2}/3.
///
/// Defined for every finite x ≥ 0, so callers can form ratios such as
/// Ai'/Ai or Ai(x)/Ai(y) far beyond the range where Ai underflows.
pub fn airy_scaled(x: f64) -> Result<AiryQuad> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain { func: "airy_scaled", arg: x });
    }
    let z = zeta(x);
    let (ai, ai_prime) = if x <= MACLAURIN_AI_MAX {
        let m = maclaurin(x);
        let e = z.exp();
        (m.ai * e, m.ai_prime * e)
    } else if x <= MACLAURIN_BI_MAX {
        ai_scaled_integral(x)
    } else {
        ai_scaled_asymptotic(x)
    };
    let (bi, bi_prime) = if x <= MACLAURIN_BI_MAX {
        let m = maclaurin(x);
        let e = (-z).exp();
        (m.bi * e, m.bi_prime * e)
    } else {
        bi_scaled_asymptotic(x)
    };
    Ok(AiryQuad { ai, ai_prime, bi, bi_prime })
}

/// Ai, Ai', Bi, Bi' for x ∈ [-5, 50].
pub fn airy(x: f64) -> Result<AiryQuad> {
    if !(AIRY_MIN..=AIRY_MAX).contains(&x) {
        return Err(Error::Domain { func: "airy", arg: x });
    }
    if x < 0.0 {
        return Ok(maclaurin(x));
    }
    let s = airy_scaled(x)?;
    let z = zeta(x);
    let (em, ep) = ((-z).exp(), z.exp());
    Ok(AiryQuad {
        ai: s.ai * em,
        ai_prime: s.ai_prime * em,
        bi: s.bi * ep,
        bi_prime: s.bi_prime * ep,
    })
}

/// Ai'(x)/Ai(x) for x ≥ -2, including arguments where Ai underflows.
pub fn airy_ai_log_derivative(x: f64) -> Result<f64> {
    if x < 0.0 {
        if x < -2.0 {
            return Err(Error::Domain { func: "airy_ai_log_derivative", arg: x });
        }
        let m = maclaurin(x);
        return Ok(m.ai_prime / m.ai);
    }
    let s = airy_scaled(x)?;
    Ok(s.ai_prime / s.ai)
}

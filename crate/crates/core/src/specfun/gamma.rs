use std::f64::consts::PI;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// sin(πx) with the argument reduced exactly before scaling by π, so that
/// integers give exact zeros and large |x| does not lose digits.
pub fn sin_pi(x: f64) -> f64 {
    let mut r = x % 2.0;
    if r > 1.0 {
        r -= 2.0;
    } else if r <= -1.0 {
        r += 2.0;
    }
    if r > 0.5 {
        (PI * (1.0 - r)).sin()
    } else if r < -0.5 {
        -(PI * (1.0 + r)).sin()
    } else {
        (PI * r).sin()
    }
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}

fn lanczos_sum(z: f64) -> f64 {
    let mut s = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        s += c / (z + i as f64);
    }
    s
}

/// Gamma function for real arguments.
///
/// Lanczos approximation for x ≥ 0.5 and the reflection formula below it.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::Domain { func: "gamma_fn", arg: x });
    }
    if is_nonpositive_integer(x) {
        return Err(Error::Pole { func: "gamma_fn", arg: x });
    }
    if x > 171.6 {
        return Err(Error::Overflow { func: "gamma_fn", arg: x });
    }
    if x < 0.5 {
        let s = sin_pi(x);
        let g = gamma_fn(1.0 - x)?;
        return Ok(PI / (s * g));
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    // Split the power so that t^(z+1/2) does not overflow before e^-t tames it.
    let half = t.powf(0.5 * (z + 0.5));
    Ok((2.0 * PI).sqrt() * half * (half * (-t).exp()) * lanczos_sum(z))
}

/// ln|Γ(x)| for x > 0.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain { func: "ln_gamma", arg: x });
    }
    if x < 0.5 {
        let s = sin_pi(x);
        return Ok((PI / s).ln() - ln_gamma(1.0 - x)?);
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    Ok(0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + lanczos_sum(z).ln())
}

/// 1/Γ(x), which is entire; returns exactly 0 at the poles of Γ.
pub fn rgamma(x: f64) -> Result<f64> {
    if is_nonpositive_integer(x) {
        return Ok(0.0);
    }
    Ok(1.0 / gamma_fn(x)?)
}

/// Pochhammer symbol (a)_n by direct product.
pub fn pochhammer(a: f64, n: u32) -> f64 {
    (0..n).fold(1.0, |acc, k| acc * (a + k as f64))
}

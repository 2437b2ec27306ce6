use super::gamma::{gamma_fn, ln_gamma, pochhammer, rgamma};
use crate::error::{Error, Result};
use crate::quad::{integrate_semiinfinite, Decay};

/// Arguments of the confluent hypergeometric functions M(a, b, x), U(a, b, x).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HypergeomArgs {
    pub a: f64,
    pub b: f64,
    pub x: f64,
}

impl HypergeomArgs {
    pub fn new(a: f64, b: f64, x: f64) -> Self {
        HypergeomArgs { a, b, x }
    }
}

const INT_TOL: f64 = 1e-12;
const SERIES_MAX_TERMS: usize = 20_000;
const ASYMPTOTIC_MIN_X: f64 = 30.0;

/// Returns n ≥ 0 when a is within INT_TOL of -n.
fn nonpositive_integer(a: f64) -> Option<u32> {
    let r = a.round();
    if r <= 0.0 && (a - r).abs() < INT_TOL && r > -1e6 {
        Some((-r) as u32)
    } else {
        None
    }
}

fn is_integer(b: f64) -> bool {
    (b - b.round()).abs() < INT_TOL
}

/// Terminating series for M(−n, b, x); also returns the largest term so
/// callers can detect cancellation.
fn kummer_polynomial(n: u32, b: f64, x: f64) -> (f64, f64) {
    let a = -(n as f64);
    let mut term: f64 = 1.0;
    let mut sum = 1.0;
    let mut largest: f64 = 1.0;
    for k in 0..n {
        let kf = k as f64;
        term *= (a + kf) * x / ((b + kf) * (kf + 1.0));
        sum += term;
        largest = largest.max(term.abs());
    }
    (sum, largest)
}

fn kummer_series(a: f64, b: f64, x: f64) -> Result<f64> {
    let mut term = 1.0;
    let mut sum = 1.0;
    let past_sign_changes = (-a).max(0.0);
    for n in 0..SERIES_MAX_TERMS {
        let nf = n as f64;
        term *= (a + nf) * x / ((b + nf) * (nf + 1.0));
        sum += term;
        if !sum.is_finite() {
            return Err(Error::Overflow { func: "kummer_m", arg: x });
        }
        if nf > past_sign_changes && nf + 1.0 > x && term.abs() <= 1e-17 * sum.abs() {
            return Ok(sum);
        }
    }
    Err(Error::Overflow { func: "kummer_m", arg: x })
}

/// Leading large-x expansion Γ(b)/Γ(a)·e^x·x^{a−b}·Σ (b−a)_s(1−a)_s/(s! x^s).
///
/// Returns None when the divergent sum cannot reach full precision or the
/// neglected (−x)^{−a} branch is not negligible.
fn kummer_asymptotic(a: f64, b: f64, x: f64) -> Option<Result<f64>> {
    if x - (b - 2.0 * a).max(0.0) * x.ln() < 40.0 {
        return None;
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut converged = false;
    for s in 0..200 {
        let sf = s as f64;
        let next = term * (b - a + sf) * (1.0 - a + sf) / ((sf + 1.0) * x);
        if next.abs() > term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            converged = true;
            break;
        }
    }
    if !converged {
        return None;
    }
    let ga = match gamma_fn(a) {
        Ok(g) => g,
        Err(e) => return Some(Err(e)),
    };
    let gb = match gamma_fn(b) {
        Ok(g) => g,
        Err(e) => return Some(Err(e)),
    };
    let log_mag = x + (a - b) * x.ln() + (gb / ga).abs().ln() + sum.abs().ln();
    if log_mag > 709.0 {
        return Some(Err(Error::Overflow { func: "kummer_m", arg: x }));
    }
    Some(Ok(gb / ga * (x + (a - b) * x.ln()).exp() * sum))
}

/// Kummer's function M(a, b, x) for x ≥ 0.
pub fn kummer_m(args: HypergeomArgs) -> Result<f64> {
    let HypergeomArgs { a, b, x } = args;
    if !(x >= 0.0) || !x.is_finite() || a.is_nan() || b.is_nan() {
        return Err(Error::Domain { func: "kummer_m", arg: x });
    }
    if nonpositive_integer(b).is_some() {
        return Err(Error::Pole { func: "kummer_m", arg: b });
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if let Some(n) = nonpositive_integer(a) {
        return Ok(kummer_polynomial(n, b, x).0);
    }
    if x > ASYMPTOTIC_MIN_X {
        if let Some(v) = kummer_asymptotic(a, b, x) {
            return v;
        }
    }
    kummer_series(a, b, x)
}

/// U(−n, b, x) = (−1)^n (b)_n M(−n, b, x), or None when the alternating
/// sum loses more than four digits (large n with large x); the recurrence
/// route is accurate there.
fn u_polynomial(n: u32, b: f64, x: f64) -> Option<f64> {
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let (sum, largest) = kummer_polynomial(n, b, x);
    if x >= 1.0 && largest > 1e4 * sum.abs() {
        return None;
    }
    Some(sign * pochhammer(b, n) * sum)
}

/// U(a, b, x) for a ≥ 1, x > 0 from the Laplace-type integral
/// U = x^{−a}/Γ(a) ∫_0^∞ e^{−u} u^{a−1} (1 + u/x)^{b−a−1} du, with u = s².
fn u_integral(a: f64, b: f64, x: f64) -> Result<f64> {
    let lg = ln_gamma(a)?;
    let c = b - a - 1.0;
    let f = |s: f64| {
        if s == 0.0 {
            return 0.0;
        }
        let u = s * s;
        2.0 * s * ((a - 1.0) * u.ln() - u - lg + c * (u / x).ln_1p()).exp()
    };
    let i = integrate_semiinfinite(&f, Decay::Gauss)?;
    Ok(i * (-a * x.ln()).exp())
}

/// U via its definition as a combination of two Kummer functions (small x).
fn u_from_kummer(a: f64, b: f64, x: f64) -> Result<f64> {
    let t1 = gamma_fn(1.0 - b)? * rgamma(a - b + 1.0)?;
    let t2 = gamma_fn(b - 1.0)? * rgamma(a)?;
    let m1 = if t1 != 0.0 { kummer_m(HypergeomArgs::new(a, b, x))? } else { 0.0 };
    let m2 = if t2 != 0.0 { kummer_m(HypergeomArgs::new(a - b + 1.0, 2.0 - b, x))? } else { 0.0 };
    Ok(t1 * m1 + t2 * x.powf(1.0 - b) * m2)
}

/// U for x ≥ 1: integral representation at the two smallest orders ≥ 1
/// congruent to a, then the three-term recurrence downwards in a, which is
/// the stable direction for U.
fn u_large_x(a: f64, b: f64, x: f64) -> Result<f64> {
    if a >= 1.0 {
        return u_integral(a, b, x);
    }
    let steps = (1.0 - a).ceil();
    let top = a + steps; // in [1, 2)
    let mut u_hi = u_integral(top + 1.0, b, x)?;
    let mut u_mid = u_integral(top, b, x)?;
    let mut cur = top;
    for _ in 0..steps as usize {
        let u_lo = (2.0 * cur + x - b) * u_mid - cur * (cur - b + 1.0) * u_hi;
        u_hi = u_mid;
        u_mid = u_lo;
        cur -= 1.0;
    }
    if !u_mid.is_finite() {
        return Err(Error::Overflow { func: "tricomi_u", arg: x });
    }
    Ok(u_mid)
}

/// Tricomi's function U(a, b, x) for non-integer b and x ≥ 0.
pub fn tricomi_u(args: HypergeomArgs) -> Result<f64> {
    let HypergeomArgs { a, b, x } = args;
    if is_integer(b) {
        return Err(Error::IntegerB { func: "tricomi_u", b });
    }
    if !(x >= 0.0) || !x.is_finite() || a.is_nan() {
        return Err(Error::Domain { func: "tricomi_u", arg: x });
    }
    if let Some(n) = nonpositive_integer(a) {
        if let Some(v) = u_polynomial(n, b, x) {
            return Ok(v);
        }
        return u_large_x(a.round(), b, x);
    }
    // Kummer transformation U(a,b,x) = x^{1−b} U(a−b+1, 2−b, x) puts the
    // polynomial case on the other parameter too.
    if let Some(n) = nonpositive_integer(a - b + 1.0) {
        if x == 0.0 {
            return if b < 1.0 { Ok(0.0) } else { Err(Error::Domain { func: "tricomi_u", arg: x }) };
        }
        if let Some(v) = u_polynomial(n, 2.0 - b, x) {
            return Ok(x.powf(1.0 - b) * v);
        }
        return u_large_x(a, b, x);
    }
    if x == 0.0 {
        if b < 1.0 {
            return Ok(gamma_fn(1.0 - b)? * rgamma(a - b + 1.0)?);
        }
        return Err(Error::Domain { func: "tricomi_u", arg: x });
    }
    if x < 1.0 {
        u_from_kummer(a, b, x)
    } else {
        u_large_x(a, b, x)
    }
}

/// dU/dx = −a·U(a+1, b+1, x).
pub fn tricomi_u_prime(args: HypergeomArgs) -> Result<f64> {
    let HypergeomArgs { a, b, x } = args;
    if is_integer(b) {
        return Err(Error::IntegerB { func: "tricomi_u_prime", b });
    }
    if a == 0.0 || nonpositive_integer(a) == Some(0) {
        return Ok(0.0);
    }
    Ok(-a * tricomi_u(HypergeomArgs::new(a + 1.0, b + 1.0, x))?)
}

/// dM/dx = (a/b)·M(a+1, b+1, x).
pub fn kummer_m_prime(args: HypergeomArgs) -> Result<f64> {
    let HypergeomArgs { a, b, x } = args;
    if a == 0.0 {
        return Ok(0.0);
    }
    Ok(a / b * kummer_m(HypergeomArgs::new(a + 1.0, b + 1.0, x))?)
}

use std::f64::consts::PI;

/// Error function. Beyond |x| = 6 the result is ±1 to double precision.
pub fn erf_fn(x: f64) -> f64 {
    if x < 0.0 {
        return -erf_fn(-x);
    }
    if x > 6.0 {
        return 1.0;
    }
    // e^{-x²} Σ 2^n x^{2n+1} / (1·3···(2n+1)): all terms positive, no cancellation.
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut n = 0.0;
    while term > 1e-17 * sum {
        n += 1.0;
        term *= 2.0 * x2 / (2.0 * n + 1.0);
        sum += term;
    }
    2.0 / PI.sqrt() * (-x2).exp() * sum
}

/// Standard normal distribution function.
pub fn normal_cdf(z: f64) -> f64 {
    let e = erf_fn(z.abs() / std::f64::consts::SQRT_2);
    if z >= 0.0 {
        0.5 * (1.0 + e)
    } else {
        0.5 * (1.0 - e)
    }
}

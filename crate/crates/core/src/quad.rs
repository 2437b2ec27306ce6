//! Adaptive Gauss–Kronrod quadrature on finite and semi-infinite intervals.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_2,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_73,
    0.054_755_896_574_351_996,
    0.075_039_674_810_919_95,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_85,
    0.134_709_217_311_473_33,
    0.142_775_938_577_060_08,
    0.147_739_104_901_338_5,
    0.149_445_554_002_916_9,
];
// Gauss weights for the nodes XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_35,
    0.295_524_224_714_752_87,
];

const MAX_INTERVALS: usize = 2000;

/// Decay behaviour of an integrand at +∞, used to pick the panel growth.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decay {
    Exp,
    Gauss,
}

#[derive(Clone, Copy, Debug)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// One application of the 21-point Kronrod rule; returns (value, error).
pub fn kronrod21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[10] * fc;
    let mut g = 0.0;
    let mut resabs = WGK[10] * fc.abs();
    for j in 0..10 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        k += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            g += WG[j / 2] * (f1 + f2);
        }
    }
    let value = k * h;
    let err = ((k - g) * h).abs();
    let floor = 50.0 * f64::EPSILON * resabs * h.abs();
    (value, err.max(floor))
}

/// Plain 10-point Gauss–Legendre rule on [a, b].
pub fn gauss10<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut s = 0.0;
    for j in 0..5 {
        let dx = h * XGK[2 * j + 1];
        s += WG[j] * (f(c - dx) + f(c + dx));
    }
    s * h
}

/// Globally adaptive Gauss–Kronrod integration over [a, b].
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<QuadResult> {
    if a == b {
        return Ok(QuadResult { value: 0.0, error: 0.0 });
    }
    let (v, e) = kronrod21(f, a, b);
    if !v.is_finite() {
        return Err(Error::Quadrature { estimate: v, error: e });
    }
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value: v, error: e });
    let mut total = v;
    let mut total_err = e;
    while total_err > abs_tol.max(rel_tol * total.abs()) {
        if heap.len() >= MAX_INTERVALS {
            return Err(Error::Quadrature { estimate: total, error: total_err });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval can no longer be split; accept what we have.
            heap.push(worst);
            break;
        }
        let (v1, e1) = kronrod21(f, worst.a, mid);
        let (v2, e2) = kronrod21(f, mid, worst.b);
        if !(v1.is_finite() && v2.is_finite()) {
            return Err(Error::Quadrature { estimate: total, error: f64::INFINITY });
        }
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Segment { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: worst.b, value: v2, error: e2 });
        // Re-sum occasionally to stop drift in the running totals.
        if heap.len() % 64 == 0 {
            total = heap.iter().map(|s| s.value).sum();
            total_err = heap.iter().map(|s| s.error).sum();
        }
    }
    let value: f64 = heap.iter().map(|s| s.value).sum();
    let error: f64 = heap.iter().map(|s| s.error).sum();
    Ok(QuadResult { value, error })
}

const PANEL_BUDGET: usize = 400;

/// ∫_a^∞ f, summing adaptive panels until their contributions become negligible.
///
/// Panels have unit width for Gaussian decay and double in width for
/// exponential decay; a geometric tail estimate is added after the last panel.
pub fn integrate_from<F: Fn(f64) -> f64>(f: &F, a: f64, decay: Decay) -> Result<f64> {
    let mut lo = a;
    let mut width: f64 = 1.0;
    let mut total = 0.0;
    let mut scale: f64 = 0.0;
    let mut prev = f64::INFINITY;
    for k in 0..PANEL_BUDGET {
        let hi = lo + width;
        let abs_tol = 1e-15 * scale;
        let p = integrate(f, lo, hi, abs_tol, 1e-13)?.value;
        total += p;
        scale += p.abs();
        let small = p.abs() <= 1e-17 * scale || scale == 0.0 && hi - a > 64.0;
        if k >= 2 && small && p.abs() <= prev {
            if decay == Decay::Exp && prev.is_finite() && prev > 0.0 {
                let r = p.abs() / prev;
                if r < 1.0 {
                    total += p * r / (1.0 - r);
                }
            }
            return Ok(total);
        }
        prev = p.abs();
        lo = hi;
        if decay == Decay::Exp {
            width *= 2.0;
        }
    }
    Err(Error::Quadrature { estimate: total, error: prev })
}

/// ∫_0^∞ f with the given decay hint.
pub fn integrate_semiinfinite<F: Fn(f64) -> f64>(f: &F, decay: Decay) -> Result<f64> {
    integrate_from(f, 0.0, decay)
}

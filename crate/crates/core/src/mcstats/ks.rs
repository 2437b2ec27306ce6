use serde::{Deserialize, Serialize};

use crate::quad::gauss10;
use crate::specfun::normal_cdf;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KsReport {
    pub statistic: f64,
    pub n: usize,
    pub p_value: f64,
}

/// P[K > λ] for the Kolmogorov distribution.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 1.0 {
        1.0 - theta_form(lambda)
    } else {
        alternating_tail(lambda)
    }
}

/// P[K ≤ λ]. Uses the theta-function form below λ = 1 and the alternating
/// series above; both converge in a handful of terms there.
pub fn kolmogorov_cdf(lambda: f64) -> f64 {
    if lambda < 1.0 {
        theta_form(lambda)
    } else {
        1.0 - alternating_tail(lambda)
    }
}

fn theta_form(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 0.0;
    }
    let c = std::f64::consts::PI * std::f64::consts::PI / (8.0 * lambda * lambda);
    let mut s = 0.0;
    for k in 1..=20 {
        let j = (2 * k - 1) as f64;
        let t = (-j * j * c).exp();
        s += t;
        if t < 1e-17 * s {
            break;
        }
    }
    (2.0 * std::f64::consts::PI).sqrt() / lambda * s
}

fn alternating_tail(lambda: f64) -> f64 {
    let mut s = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let t = (-2.0 * kf * kf * lambda * lambda).exp();
        s += if k % 2 == 1 { t } else { -t };
        if t < 1e-300 || t < 1e-17 * s {
            break;
        }
    }
    2.0 * s
}

fn p_value(d: f64, n_eff: f64) -> f64 {
    kolmogorov_survival(d * n_eff.sqrt()).clamp(0.0, 1.0)
}

/// One-sample KS test against a continuous CDF.
pub fn ks_test(samples: &[f64], cdf: impl Fn(f64) -> f64) -> KsReport {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    KsReport { statistic: d, n: xs.len(), p_value: p_value(d, n) }
}

/// One-sample KS test against the distribution on [0, ∞) with the given
/// density; the CDF is accumulated by quadrature between sorted samples.
pub fn ks_test_density(samples: &[f64], density: &dyn Fn(f64) -> f64) -> KsReport {
    const PANEL: f64 = 0.05;
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let (mut cdf, mut prev, mut d) = (0.0, 0.0f64, 0.0f64);
    for (i, &x) in xs.iter().enumerate() {
        let mut a = prev;
        while a < x {
            let b = (a + PANEL).min(x);
            cdf += gauss10(&|y| density(y), a, b);
            a = b;
        }
        prev = prev.max(x);
        d = d.max(cdf - i as f64 / n).max((i + 1) as f64 / n - cdf);
    }
    KsReport { statistic: d, n: xs.len(), p_value: p_value(d, n) }
}

/// KS test against the standard normal.
pub fn normal_ks(samples: &[f64]) -> KsReport {
    ks_test(samples, normal_cdf)
}

/// Two-sample KS test; `n` in the report is the effective size nm/(n+m).
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> KsReport {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let n_eff = na * nb / (na + nb);
    KsReport { statistic: d, n: n_eff.round() as usize, p_value: p_value(d, n_eff) }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_survival(lambda: f64) -> f64 {
        let mut s = 0.0;
        for k in 1..=2000 {
            let kf = k as f64;
            let t = (-2.0 * kf * kf * lambda * lambda).exp();
            s += if k % 2 == 1 { t } else { -t };
        }
        2.0 * s
    }

    #[test]
    fn kolmogorov_matches_series() {
        let mut l = 0.3;
        while l <= 2.5 {
            assert!((kolmogorov_survival(l) - reference_survival(l)).abs() < 1e-6, "{l}");
            l += 0.01;
        }
        // Known quantiles: P[K > 1.3581] = 0.05, P[K > 1.6276] = 0.01.
        assert!((kolmogorov_survival(1.3581) - 0.05).abs() < 1e-4);
        assert!((kolmogorov_survival(1.6276) - 0.01).abs() < 1e-4);
        assert!((1.0 - theta_form(1.0) - alternating_tail(1.0)).abs() < 1e-14);
    }

    #[test]
    fn exact_grid_statistic() {
        let xs: Vec<f64> = (0..10).map(|i| (i as f64 + 0.5) / 10.0).collect();
        let r = ks_test(&xs, |x| x.clamp(0.0, 1.0));
        assert!((r.statistic - 0.05).abs() < 1e-15);
        assert!(r.p_value > 0.99);
    }

    #[test]
    fn density_matches_cdf_version() {
        let xs: Vec<f64> = (1..500).map(|i| -(i as f64 / 500.0).ln()).collect();
        let a = ks_test_density(&xs, &|y| (-y).exp());
        let b = ks_test(&xs, |y| 1.0 - (-y).exp());
        assert!((a.statistic - b.statistic).abs() < 1e-12);
    }

    #[test]
    fn two_sample() {
        let a: Vec<f64> = (0..100).map(|i| i as f64).collect();
        assert_eq!(ks_two_sample(&a, &a).statistic, 0.0);
        let b: Vec<f64> = (0..100).map(|i| i as f64 + 1000.0).collect();
        assert_eq!(ks_two_sample(&a, &b).statistic, 1.0);
    }
}

//! Replica orchestration and the statistics that turn simulation output into
//! verdicts: estimates with standard errors, Kolmogorov-Smirnov tests, and
//! the regenerative variance estimate.

mod ks;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, Purpose};

pub use ks::{kolmogorov_cdf, kolmogorov_survival, ks_test, ks_test_density, ks_two_sample, normal_ks, KsReport};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
    pub ci95: (f64, f64),
}

impl Estimate {
    pub fn new(mean: f64, stderr: f64, n: usize) -> Self {
        Estimate { mean, stderr, n, ci95: (mean - 1.96 * stderr, mean + 1.96 * stderr) }
    }

    /// Sample mean with i.i.d. standard error sd/√n.
    pub fn from_samples(xs: &[f64]) -> Result<Self> {
        if xs.is_empty() {
            return Err(Error::InvalidParams("no samples".into()));
        }
        let (mean, var) = mean_var(xs);
        Ok(Self::new(mean, (var / xs.len() as f64).sqrt(), xs.len()))
    }
}

/// Mean and unbiased variance (0 for a single value).
pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.iter().all(|&x| x == xs[0]) {
        return (xs[0], 0.0);
    }
    let mean = xs.iter().sum::<f64>() / n;
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, ss / (n - 1.0))
}

/// Ratio estimate Σnum/Σden with a batch-means standard error over
/// `batches` contiguous batches.
pub fn batch_means_ratio(num: &[f64], den: &[f64], batches: usize) -> Result<Estimate> {
    if num.len() != den.len() || batches < 2 || num.len() < batches {
        return Err(Error::InvalidParams(format!(
            "batch means needs equal lengths and at least {batches} samples"
        )));
    }
    let n = num.len();
    let ratio = num.iter().sum::<f64>() / den.iter().sum::<f64>();
    let per = n / batches;
    let ratios: Vec<f64> = (0..batches)
        .map(|b| {
            let lo = b * per;
            let hi = if b + 1 == batches { n } else { lo + per };
            num[lo..hi].iter().sum::<f64>() / den[lo..hi].iter().sum::<f64>()
        })
        .collect();
    let (_, var) = mean_var(&ratios);
    Ok(Estimate::new(ratio, (var / batches as f64).sqrt(), n))
}

/// Runs `task(seed, index)` for index 0..n on `workers` threads. Replica i
/// gets the seed derived from (root, i); output order is replica order.
pub fn run_replicas<T, F>(task: F, n: usize, root: u64, workers: usize) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, usize) -> Result<T> + Sync,
{
    if n == 0 {
        return Err(Error::InvalidParams("need at least one replica".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidParams(format!("thread pool: {e}")))?;
    let results: Vec<Result<T>> = pool.install(|| {
        (0..n)
            .into_par_iter()
            .map(|i| task(replica_seed(root, i), i))
            .collect()
    });
    results
        .into_iter()
        .enumerate()
        .map(|(i, r)| r.map_err(|e| Error::Replica { index: i, source: Box::new(e) }))
        .collect()
}

pub fn replica_seed(root: u64, index: usize) -> u64 {
    derive_seed(root, index as u64, Purpose::Replica)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LlnVerdict {
    pub estimate: Estimate,
    pub tolerance: f64,
    pub pass: bool,
}

/// Passes iff |mean − v| ≤ 3·stderr + allowance.
pub fn lln_verdict(endpoints: &[f64], v: f64, allowance: f64) -> Result<LlnVerdict> {
    let estimate = Estimate::from_samples(endpoints)?;
    let tolerance = 3.0 * estimate.stderr + allowance;
    Ok(LlnVerdict { estimate, tolerance, pass: (estimate.mean - v).abs() <= tolerance })
}

/// KS test of (X_T − T·v)/sd against N(0,1), sd being the sample standard
/// deviation of X_T − T·v.
pub fn clt_verdict(endpoints: &[f64], v: f64, horizon: f64) -> Result<KsReport> {
    if endpoints.len() < 500 {
        return Err(Error::InvalidParams(format!("CLT check needs >= 500 endpoints, got {}", endpoints.len())));
    }
    let centred: Vec<f64> = endpoints.iter().map(|x| x - horizon * v).collect();
    let (_, var) = mean_var(&centred);
    if !(var > 0.0) {
        return Err(Error::Degenerate("endpoints have zero spread".into()));
    }
    let sd = var.sqrt();
    let z: Vec<f64> = centred.iter().map(|c| c / sd).collect();
    Ok(normal_ks(&z))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegenSigma {
    /// Mean regeneration cycle length.
    pub r: f64,
    /// Mean displacement per cycle.
    pub m: f64,
    pub beta2: f64,
    pub sigma: f64,
}

/// Plug-in r, m, β² = Var(dx − dt·m/r) and σ = β/√r from cycle increments.
pub fn regen_sigma(increments: &[(f64, f64)]) -> Result<RegenSigma> {
    if increments.len() < 100 {
        return Err(Error::InvalidParams(format!("need >= 100 increments, got {}", increments.len())));
    }
    let first = increments[0].0;
    if increments.iter().all(|&(dt, _)| dt == first) {
        return Err(Error::Degenerate("all cycle lengths are equal".into()));
    }
    let n = increments.len() as f64;
    let r = increments.iter().map(|p| p.0).sum::<f64>() / n;
    let m = increments.iter().map(|p| p.1).sum::<f64>() / n;
    let resid: Vec<f64> = increments.iter().map(|&(dt, dx)| dx - dt * m / r).collect();
    let (_, beta2) = mean_var(&resid);
    Ok(RegenSigma { r, m, beta2, sigma: (beta2 / r).sqrt() })
}

/// How a verdict's estimate is compared with its reference.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// |estimate − reference| ≤ tolerance.
    Within,
    /// estimate ≥ reference − tolerance.
    AtLeast,
    /// estimate ≤ reference + tolerance.
    AtMost,
}

/// A serialisable accept/reject record. `pass` is always the result of
/// `comparison` applied to the numeric fields, so a saved verdict can be
/// re-evaluated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub test: String,
    pub params: serde_json::Value,
    pub estimate: f64,
    pub reference: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub pass: bool,
}

impl Verdict {
    pub fn new(
        test: impl Into<String>,
        params: serde_json::Value,
        estimate: f64,
        reference: f64,
        tolerance: f64,
        comparison: Comparison,
    ) -> Self {
        let mut v = Verdict { test: test.into(), params, estimate, reference, tolerance, comparison, pass: false };
        v.pass = v.evaluate();
        v
    }

    pub fn evaluate(&self) -> bool {
        match self.comparison {
            Comparison::Within => (self.estimate - self.reference).abs() <= self.tolerance,
            Comparison::AtLeast => self.estimate >= self.reference - self.tolerance,
            Comparison::AtMost => self.estimate <= self.reference + self.tolerance,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn estimate_interval() {
        let e = Estimate::from_samples(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(e.mean, 2.5);
        assert!((e.stderr - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
        assert!((e.ci95.1 - e.mean - 1.96 * e.stderr).abs() < 1e-15);
        assert!(Estimate::from_samples(&[]).is_err());
    }

    #[test]
    fn lln_verdict_cases() {
        let v = 0.1;
        let flat = vec![v; 50];
        let out = lln_verdict(&flat, v, 0.0).unwrap();
        assert!(out.pass && out.estimate.stderr == 0.0);
        let mut rng = crate::rng::stream(1, Purpose::Test);
        let noisy: Vec<f64> = (0..200).map(|_| v + 0.01 * rng.sample::<f64, _>(StandardNormal)).collect();
        assert!(lln_verdict(&noisy, v, 0.0).unwrap().pass);
        assert!(!lln_verdict(&noisy, v + 0.2, 0.02).unwrap().pass);
    }

    #[test]
    fn clt_null_and_power() {
        let mut pvals = Vec::new();
        for trial in 0..50 {
            let mut rng = crate::rng::stream(trial, Purpose::Test);
            let x: Vec<f64> = (0..2000).map(|_| 3.0 + 2.0 * rng.sample::<f64, _>(StandardNormal)).collect();
            pvals.push(clt_verdict(&x, 1.5, 2.0).unwrap().p_value);
        }
        pvals.sort_by(f64::total_cmp);
        let median = 0.5 * (pvals[24] + pvals[25]);
        assert!(median > 0.3 && median < 0.9, "{median}");

        let mut rng = crate::rng::stream(99, Purpose::Test);
        let e: Vec<f64> = (0..2000).map(|_| rng.sample::<f64, _>(rand_distr::Exp1)).collect();
        assert!(clt_verdict(&e, 1.0, 1.0).unwrap().p_value < 0.01);
    }

    #[test]
    fn regen_sigma_deterministic_ratio() {
        let inc: Vec<(f64, f64)> = (1..=200).map(|i| (i as f64 * 0.1, 0.3 * i as f64 * 0.1)).collect();
        let s = regen_sigma(&inc).unwrap();
        assert!(s.beta2.abs() < 1e-25 && s.sigma < 1e-12);
        assert!((s.m / s.r - 0.3).abs() < 1e-14);
        let flat: Vec<(f64, f64)> = (0..200).map(|i| (1.0, i as f64)).collect();
        assert!(matches!(regen_sigma(&flat), Err(Error::Degenerate(_))));
    }

    #[test]
    fn replicas_ordered_and_worker_independent() {
        let task = |seed: u64, i: usize| -> Result<(u64, usize)> { Ok((seed, i)) };
        let one = run_replicas(task, 64, 5, 1).unwrap();
        let many = run_replicas(task, 64, 5, 8).unwrap();
        assert_eq!(one, many);
        assert_eq!(one[0].0, replica_seed(5, 0));
        assert!(one.iter().enumerate().all(|(i, r)| r.1 == i));
    }

    #[test]
    fn replica_errors_carry_index() {
        let task = |_: u64, i: usize| -> Result<usize> {
            if i == 7 || i == 9 {
                Err(Error::Degenerate("boom".into()))
            } else {
                Ok(i)
            }
        };
        match run_replicas(task, 16, 0, 4) {
            Err(Error::Replica { index, .. }) => assert_eq!(index, 7),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn verdict_round_trip() {
        let v = Verdict::new("x", serde_json::json!({"mu": 1.0}), 0.3, 0.25, 0.1, Comparison::Within);
        assert!(v.pass);
        let back: Verdict = serde_json::from_str(&serde_json::to_string(&v).unwrap()).unwrap();
        assert_eq!(back, v);
        assert_eq!(back.evaluate(), back.pass);
        assert!(!Verdict::new("p", serde_json::Value::Null, 0.001, 0.01, 0.0, Comparison::AtLeast).pass);
        assert!(Verdict::new("d", serde_json::Value::Null, 0.015, 0.02, 0.0, Comparison::AtMost).pass);
    }

    #[test]
    fn batch_means() {
        let num = vec![2.0; 1000];
        let den = vec![1.0; 1000];
        let e = batch_means_ratio(&num, &den, 20).unwrap();
        assert_eq!(e.mean, 2.0);
        assert_eq!(e.stderr, 0.0);
    }
}

//! Law-level checks of the path simulators and the jump-chain sampler
//! against closed-form quantities.

use crate::closedform::{bm_expected_killing_time, bm_green_basis, ou_expected_killing_time, GreenBasis};
use crate::jumpchain::{
    extract_regenerations, invariant_density, run_chain, run_chain_with, ChainModel, KernelBasis, KillingKernel,
};
use crate::mcstats::{ks_test, ks_test_density, mean_var, regen_sigma, run_replicas, Estimate};
use crate::pathsim::{simulate_killed_reflected, simulate_ratchet, simulate_ratchet_summary};
use crate::rng::{stream, Purpose};
use crate::{RatchetParams, SimConfig};

fn within(e: &Estimate, target: f64, allowance: f64) -> bool {
    (e.mean - target).abs() <= 3.0 * e.stderr + allowance
}

#[test]
fn reset_position_is_uniform_on_the_gap() {
    for params in [RatchetParams::bm(0.5, 1.0).unwrap(), RatchetParams::ou(0.5, 1.0).unwrap()] {
        let mut fractions = Vec::new();
        let mut seed = 0;
        while fractions.len() < 2000 {
            let path = simulate_ratchet(&params, &SimConfig::new(1e-3, 100.0, 0.0, seed).unwrap()).unwrap();
            path.check_invariants().unwrap();
            fractions.extend(path.jumps.iter().map(|j| (j.r_after - j.r_before) / (j.x - j.r_before)));
            seed += 1;
        }
        let ks = ks_test(&fractions, |u| u.clamp(0.0, 1.0));
        assert!(ks.p_value >= 0.01, "{:?}: {ks:?}", params.model);
    }
}

#[test]
fn killing_time_and_position_match_green_function() {
    let params = RatchetParams::bm(0.5, 0.0).unwrap();
    let out = run_replicas(
        |seed, _| simulate_killed_reflected(&params, &SimConfig::new(1e-3, 200.0, 0.0, seed)?),
        4000,
        11,
        2,
    )
    .unwrap();
    assert!(out.iter().all(|o| !o.censored));
    let tau: Vec<f64> = out.iter().map(|o| o.tau).collect();
    let e = Estimate::from_samples(&tau).unwrap();
    assert!(within(&e, bm_expected_killing_time(0.0, 0.0).unwrap(), 0.0), "{e:?}");

    let kernel = KillingKernel::new(&KernelBasis::Bm(bm_green_basis(0.0).unwrap())).unwrap();
    let z: Vec<f64> = out.iter().map(|o| o.z).collect();
    let ks = ks_test(&z, |y| kernel.cdf(0.0, y).unwrap());
    assert!(ks.p_value >= 0.01, "{ks:?}");
}

#[test]
fn killed_ou_mean_time() {
    let params = RatchetParams::ou(0.5, 1.0).unwrap();
    let tau: Vec<f64> = run_replicas(
        |seed, _| Ok(simulate_killed_reflected(&params, &SimConfig::new(1e-3, 200.0, 0.0, seed)?)?.tau),
        4000,
        12,
        2,
    )
    .unwrap();
    let e = Estimate::from_samples(&tau).unwrap();
    assert!(within(&e, ou_expected_killing_time(0.5, 1.0, 0.0).unwrap(), 0.0), "{e:?}");
}

#[test]
fn sampled_killing_position_moments() {
    let (mu, x) = (1.0, 1.0);
    let basis = bm_green_basis(mu).unwrap();
    let kernel = KillingKernel::new(&KernelBasis::Bm(basis.clone())).unwrap();
    let mut rng = stream(5, Purpose::Test);
    let z: Vec<f64> = (0..100_000).map(|_| kernel.sample(x, &mut rng).unwrap()).collect();
    assert!(z.iter().all(|&v| v >= 0.0));
    let e = Estimate::from_samples(&z).unwrap();
    let identity = x + basis.phi(x) * basis.psi(0.0) - mu * bm_expected_killing_time(mu, x).unwrap();
    assert!(within(&e, identity, 0.0), "{e:?} vs {identity}");

    // Exponential moment of order 1/2 < μ: finite, and the two halves agree.
    let m: Vec<f64> = z.iter().map(|v| (0.5 * v).exp()).collect();
    let (a, b) = m.split_at(m.len() / 2);
    let (ea, eb) = (Estimate::from_samples(a).unwrap(), Estimate::from_samples(b).unwrap());
    assert!(ea.mean.is_finite() && (ea.mean - eb.mean).abs() <= 4.0 * (ea.stderr.hypot(eb.stderr)));
}

#[test]
fn chain_marginal_converges() {
    let params = RatchetParams::bm(0.5, 1.0).unwrap();
    let model = ChainModel::new(&params).unwrap();
    let density = invariant_density(&params).unwrap();
    let ks = |n: usize| {
        let run = run_chain_with(&model, n, 1000, 21).unwrap();
        let y: Vec<f64> = run.samples.iter().map(|s| s.y).collect();
        ks_test_density(&y, &*density).statistic
    };
    let (short, long) = (ks(5_000), ks(20_000));
    assert!(long < short, "{short} -> {long}");
}

#[test]
fn chain_and_regeneration_speeds_agree() {
    for params in [RatchetParams::bm(0.5, 0.0).unwrap(), RatchetParams::ou(0.5, 1.0).unwrap()] {
        let chain = run_chain(&params, 50_000, 1000, 8).unwrap().speed().unwrap();
        let runs = run_replicas(
            |seed, _| simulate_ratchet_summary(&params, &SimConfig::new(1e-3, 200.0, 0.0, seed)?),
            100,
            8,
            2,
        )
        .unwrap();
        let inc: Vec<(f64, f64)> = runs.iter().flat_map(|r| r.regenerations.iter().copied()).collect();
        let regen = regen_sigma(&inc).unwrap();
        // Ratio-estimator standard error by the delta method.
        let v = regen.m / regen.r;
        let se = (regen.beta2 / inc.len() as f64).sqrt() / regen.r;
        let band = 3.0 * chain.stderr.hypot(se) + 0.02;
        assert!((chain.mean - v).abs() <= band, "{:?}: chain {} regen {v}", params.model, chain.mean);
    }
}

#[test]
fn regeneration_increments_have_stable_variance() {
    let params = RatchetParams::bm(0.5, 1.0).unwrap();
    let v = params.speed().unwrap();
    let spread = |n: usize| {
        let runs = run_replicas(
            |seed, _| Ok(extract_regenerations(&simulate_ratchet(&params, &SimConfig::new(1e-3, 100.0, 0.0, seed)?)?)),
            n,
            3,
            2,
        )
        .unwrap();
        let resid: Vec<f64> = runs.iter().flatten().map(|&(dt, dx)| dx - dt * v).collect();
        assert!(runs.iter().flatten().all(|&(dt, _)| dt > 0.0));
        mean_var(&resid).1
    };
    let (a, b) = (spread(20), spread(40));
    assert!(a.is_finite() && b.is_finite());
    assert!((a / b - 1.0).abs() < 0.3, "{a} vs {b}");
}

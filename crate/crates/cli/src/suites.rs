use ratchetlab_core::closedform::{bm_green_basis, canonicalize_bm, killing_mass, ou_green_basis};
use ratchetlab_core::jumpchain::{invariant_density, run_chain};
use ratchetlab_core::mcstats::{
    clt_verdict, ks_test_density, ks_two_sample, lln_verdict, mean_var, regen_sigma, run_replicas, Estimate,
};
use ratchetlab_core::pathsim::{simulate_coupling, simulate_ratchet_summary};
use ratchetlab_core::quad::{integrate_semiinfinite, Decay};
use ratchetlab_core::specfun::{airy, erf_fn, kummer_m, tricomi_u, HypergeomArgs};
use ratchetlab_core::{Comparison, Model, RatchetParams, SimConfig, Verdict};
use serde_json::{json, Value};

use crate::args::{Suite, VerifyArgs};
use crate::settings::Settings;
use crate::CliError;

const BIAS_ALLOWANCE: f64 = 0.02;
const COUPLING_ALPHA: f64 = 0.3;
const TAIL_TIMES: [f64; 3] = [0.5, 1.0, 2.0];

pub fn run(a: &VerifyArgs, s: &Settings) -> Result<Vec<Verdict>, CliError> {
    if a.suite == Suite::Specfun {
        return specfun().map_err(CliError::from);
    }
    let params = RatchetParams::new(a.model.into(), a.gamma.unwrap_or(s.gamma), a.mu)?;
    let (min_n, default_n) = match a.suite {
        Suite::Speed | Suite::Invariant => (1000, s.chain_steps),
        Suite::Clt => (500, 2000),
        Suite::Couple => (100, 10_000),
        Suite::Specfun => unreachable!(),
    };
    let n = a.n.unwrap_or(default_n);
    if n < min_n {
        return Err(CliError::Usage(format!("this suite needs --n >= {min_n}")));
    }
    let dt = a.dt.unwrap_or(s.dt);
    let horizon = a.t.unwrap_or(s.horizon);
    SimConfig::new(dt, horizon, 0.0, 0)?;
    let tag = json!({
        "model": params.model.as_str(), "gamma": params.gamma, "mu": params.mu, "n": n, "seed": s.seed,
    });
    let with = |extra: Value| -> Value {
        let mut v = tag.clone();
        if let (Some(m), Value::Object(e)) = (v.as_object_mut(), extra) {
            m.extend(e);
        }
        v
    };
    let out = match a.suite {
        Suite::Speed => speed(&params, n, s, &tag)?,
        Suite::Clt => clt(&params, n, dt, horizon, s, &with)?,
        Suite::Invariant => invariant(&params, n, s, &tag)?,
        Suite::Couple => couple(&params, n, dt, horizon, s, &with)?,
        Suite::Specfun => unreachable!(),
    };
    Ok(out)
}

fn speed(params: &RatchetParams, n: usize, s: &Settings, tag: &Value) -> Result<Vec<Verdict>, CliError> {
    let est = run_chain(params, n, ratchetlab_core::jumpchain::DEFAULT_BURN_IN, s.seed)?.speed()?;
    let v = params.speed()?;
    Ok(vec![Verdict::new("chain_speed", tag.clone(), est.mean, v, 3.0 * est.stderr, Comparison::Within)])
}

fn clt(
    params: &RatchetParams,
    n: usize,
    dt: f64,
    horizon: f64,
    s: &Settings,
    with: &dyn Fn(Value) -> Value,
) -> Result<Vec<Verdict>, CliError> {
    let v = params.speed()?;
    let runs = run_replicas(
        |seed, _| simulate_ratchet_summary(params, &SimConfig::new(dt, horizon, 0.0, seed)?),
        n,
        s.seed,
        s.workers,
    )?;
    let t_end = runs[0].horizon;
    let rates: Vec<f64> = runs.iter().map(|r| r.x_end / r.horizon).collect();
    let ends: Vec<f64> = runs.iter().map(|r| r.x_end).collect();
    let lln = lln_verdict(&rates, v, BIAS_ALLOWANCE)?;
    let ks = clt_verdict(&ends, v, t_end)?;
    let increments: Vec<(f64, f64)> = runs.iter().flat_map(|r| r.regenerations.iter().copied()).collect();
    let regen = regen_sigma(&increments)?;
    let scaled: Vec<f64> = ends.iter().map(|x| (x - t_end * v) / t_end.sqrt()).collect();
    let (_, var) = mean_var(&scaled);
    let p = with(json!({"t": t_end, "dt": dt}));
    Ok(vec![
        Verdict::new("path_lln", p.clone(), lln.estimate.mean, v, lln.tolerance, Comparison::Within),
        Verdict::new("clt_ks_p_value", p.clone(), ks.p_value, 0.01, 0.0, Comparison::AtLeast),
        Verdict::new(
            "regen_sigma_over_empirical_sd",
            with(json!({"t": t_end, "dt": dt, "sigma_regen": regen.sigma, "sd_empirical": var.sqrt()})),
            regen.sigma / var.sqrt(),
            1.0,
            0.15,
            Comparison::Within,
        ),
    ])
}

fn invariant(params: &RatchetParams, n: usize, s: &Settings, tag: &Value) -> Result<Vec<Verdict>, CliError> {
    let run = run_chain(params, n, ratchetlab_core::jumpchain::DEFAULT_BURN_IN, s.seed)?;
    let ys: Vec<f64> = run.samples.iter().map(|x| x.y).collect();
    let ws: Vec<f64> = run.samples.iter().map(|x| x.w).collect();
    let density = invariant_density(params)?;
    let ks = ks_test_density(&ys, &*density);
    let two = ks_two_sample(&ys, &ws);
    let mass_error = killing_mass_error(params)?;
    Ok(vec![
        Verdict::new("invariant_ks_distance", tag.clone(), ks.statistic, 0.02, 0.0, Comparison::AtMost),
        Verdict::new("w_y_two_sample_ks_distance", tag.clone(), two.statistic, 0.02, 0.0, Comparison::AtMost),
        Verdict::new("killing_mass_error", tag.clone(), mass_error, 0.0, 1e-7, Comparison::AtMost),
    ])
}

/// Largest |∫ killing density − 1| over a few start points.
fn killing_mass_error(params: &RatchetParams) -> Result<f64, CliError> {
    let mut worst: f64 = 0.0;
    for x in [0.0, 0.5, 1.0, 2.0] {
        let mass = match params.model {
            Model::Bm => {
                let b = bm_green_basis(canonicalize_bm(params.gamma, params.mu)?.mu_canonical)?;
                killing_mass(&b, x, &|_| 1.0)?
            }
            Model::Ou => killing_mass(&ou_green_basis(params.gamma, params.mu)?, x, &|_| 1.0)?,
        };
        worst = worst.max((mass - 1.0).abs());
    }
    Ok(worst)
}

fn couple(
    params: &RatchetParams,
    n: usize,
    dt: f64,
    horizon: f64,
    s: &Settings,
    with: &dyn Fn(Value) -> Value,
) -> Result<Vec<Verdict>, CliError> {
    let (x_hi, x_lo) = (1.0, 0.0);
    let times = run_replicas(
        |seed, _| simulate_coupling(params, x_hi, x_lo, &SimConfig::new(dt, horizon, 0.0, seed)?),
        n,
        s.seed,
        s.workers,
    )?;
    let mu = params.mu;
    match params.model {
        Model::Bm => {
            let disc = mu * mu - 2.0 * COUPLING_ALPHA;
            if !(disc > 0.0) {
                return Err(CliError::Usage(format!(
                    "the exponential-moment bound needs mu^2 > 2*{COUPLING_ALPHA}, got mu = {mu}"
                )));
            }
            let bound = (x_hi * (mu - disc.sqrt())).exp();
            let e: Vec<f64> = times.iter().map(|o| (COUPLING_ALPHA * o.time).exp()).collect();
            let est = Estimate::from_samples(&e)?;
            let censored = times.iter().filter(|o| o.censored).count();
            let p = with(json!({"x": x_hi, "alpha": COUPLING_ALPHA, "censored": censored}));
            Ok(vec![Verdict::new("coupling_exp_moment", p, est.mean, bound, 3.0 * est.stderr, Comparison::AtMost)])
        }
        Model::Ou => {
            let mut out = Vec::new();
            for t in TAIL_TIMES {
                let tail = times.iter().filter(|o| o.time > t).count() as f64 / n as f64;
                let se = (tail * (1.0 - tail) / n as f64).sqrt();
                let growth = (2.0 * mu * t).exp() - 1.0;
                let stated = erf_fn(x_hi / (2.0 * growth).sqrt());
                let unit_variance = erf_fn(x_hi * mu.sqrt() / growth.sqrt());
                let p = with(json!({"x": x_hi, "t": t}));
                out.push(Verdict::new("coupling_tail_erf_bound", p.clone(), tail, stated, 3.0 * se, Comparison::AtMost));
                out.push(Verdict::new(
                    "coupling_tail_unit_variance_hitting_bound",
                    p,
                    tail,
                    unit_variance,
                    3.0 * se,
                    Comparison::AtMost,
                ));
            }
            Ok(out)
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn u(a: f64, b: f64, x: f64) -> ratchetlab_core::Result<f64> {
    tricomi_u(HypergeomArgs::new(a, b, x))
}

fn m(a: f64, b: f64, x: f64) -> ratchetlab_core::Result<f64> {
    kummer_m(HypergeomArgs::new(a, b, x))
}

/// Special-function identities.
pub fn specfun() -> ratchetlab_core::Result<Vec<Verdict>> {
    let none = Value::Null;
    let mut out = Vec::new();

    let mut w: f64 = 0.0;
    for k in 0..=50 {
        let x = -5.0 + 0.5 * k as f64;
        w = w.max((airy(x)?.wronskian() - std::f64::consts::FRAC_1_PI).abs());
    }
    out.push(Verdict::new("airy_wronskian", json!({"x": [-5.0, 20.0]}), w, 0.0, 1e-10, Comparison::AtMost));

    let integral = integrate_semiinfinite(&|x| airy(x).map(|q| q.ai).unwrap_or(f64::NAN), Decay::Exp)?;
    out.push(Verdict::new("airy_ai_integral", none.clone(), integral, 1.0 / 3.0, 1e-8, Comparison::Within));

    let triples = [(0.3, 0.7, 0.5), (1.2, 0.4, 2.0), (-0.6, 0.5, 3.0), (2.5, 1.5, 10.0), (0.25, 0.5, 40.0)];
    let mut t: f64 = 0.0;
    for &(a, b, x) in &triples {
        t = t.max(rel(u(a, b, x)?, x.powf(1.0 - b) * u(a - b + 1.0, 2.0 - b, x)?));
    }
    out.push(Verdict::new("kummer_transformation", none.clone(), t, 0.0, 1e-9, Comparison::AtMost));

    let mut r: f64 = 0.0;
    for &(a, b, x) in &triples {
        let terms = [(b - a) * m(a - 1.0, b, x)?, (2.0 * a - b + x) * m(a, b, x)?, -a * m(a + 1.0, b, x)?];
        let scale = terms.iter().fold(0.0f64, |s, t| s.max(t.abs()));
        r = r.max(terms.iter().sum::<f64>().abs() / scale);
        let terms = [u(a - 1.0, b, x)?, (b - 2.0 * a - x) * u(a, b, x)?, a * (a - b + 1.0) * u(a + 1.0, b, x)?];
        let scale = terms.iter().fold(0.0f64, |s, t| s.max(t.abs()));
        r = r.max(terms.iter().sum::<f64>().abs() / scale);
    }
    out.push(Verdict::new("kummer_recurrence", none.clone(), r, 0.0, 1e-9, Comparison::AtMost));

    let mut e: f64 = 0.0;
    for x in [0.01, 0.5, 1.0, 3.0, 25.0, 200.0] {
        e = e.max(rel(u(0.5, 1.5, x)?, x.powf(-0.5)));
        for b in [0.5, 1.5, 2.7] {
            e = e.max((u(0.0, b, x)? - 1.0).abs());
        }
    }
    out.push(Verdict::new("u_closed_forms", none.clone(), e, 0.0, 1e-10, Comparison::AtMost));

    let mut g: f64 = 0.0;
    for &(a, b) in &[(0.7, 0.5), (0.5, 0.5), (1.0, 0.5), (-0.25, 0.5), (0.3, 1.7)] {
        g = g.max((u(a, b, 200.0)? * 200f64.powf(a) - 1.0).abs());
    }
    out.push(Verdict::new("u_large_x_limit", json!({"x": 200.0}), g, 0.0, 0.01, Comparison::AtMost));
    Ok(out)
}

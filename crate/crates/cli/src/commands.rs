use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use ratchetlab_core::closedform::{bm_speed, ou_speed};
use ratchetlab_core::mcstats::run_replicas;
use ratchetlab_core::pathsim::{simulate_coupling, simulate_ratchet};
use ratchetlab_core::{RatchetParams, SimConfig};
use serde::Serialize;

use crate::args::{CoupleArgs, Format, SimulateArgs, SpeedArgs, TableArgs, VerifyArgs};
use crate::settings::Settings;
use crate::{suites, CliError};

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// `v` rounded to `digits` significant digits, in plain decimal notation.
pub fn significant(v: f64, digits: usize) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let magnitude = v.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - magnitude).max(0) as usize;
    format!("{v:.decimals$}")
}

#[derive(Serialize)]
struct SpeedRecord {
    model: String,
    gamma: f64,
    mu: f64,
    speed: f64,
}

pub fn speed(a: &SpeedArgs, s: &Settings) -> Result<(), CliError> {
    let params = RatchetParams::new(a.model.into(), a.gamma.unwrap_or(s.gamma), a.mu)?;
    let v = params.speed()?;
    match a.format {
        Format::Text => println!("{}", significant(v, 12)),
        Format::Json => {
            let rec = SpeedRecord { model: params.model.to_string(), gamma: params.gamma, mu: params.mu, speed: v };
            println!("{}", serde_json::to_string(&rec).map_err(|e| CliError::Runtime(e.to_string()))?);
        }
    }
    Ok(())
}

pub fn table(a: &TableArgs, s: &Settings) -> Result<(), CliError> {
    let gamma = a.gamma.unwrap_or(s.gamma);
    if a.steps < 2 {
        return Err(CliError::Usage("--steps must be at least 2".into()));
    }
    if !(a.mu_min >= 0.0 && a.mu_max > a.mu_min && a.mu_max.is_finite()) {
        return Err(CliError::Usage("need 0 <= mu-min < mu-max".into()));
    }
    RatchetParams::bm(gamma, a.mu_min)?;
    let mut rows = Vec::with_capacity(a.steps);
    let last = (a.steps - 1) as f64;
    for i in 0..a.steps {
        let mu = (a.mu_min * (last - i as f64) + a.mu_max * i as f64) / last;
        let v_bm = bm_speed(gamma, mu);
        let v_ou = if mu > 0.0 { ou_speed(gamma, mu)?.to_string() } else { String::new() };
        rows.push(format!("{mu},{v_bm},{v_ou}"));
    }
    let mut w = output(a.out.as_deref())?;
    writeln!(w, "mu,v_bm,v_ou")?;
    for r in rows {
        writeln!(w, "{r}")?;
    }
    w.flush()?;
    Ok(())
}

fn sim_config(t: Option<f64>, dt: Option<f64>, x0: f64, seed: u64, s: &Settings) -> Result<SimConfig, CliError> {
    Ok(SimConfig::new(dt.unwrap_or(s.dt), t.unwrap_or(s.horizon), x0, seed)?)
}

pub fn simulate(a: &SimulateArgs, s: &Settings) -> Result<(), CliError> {
    let params = RatchetParams::new(a.model.into(), a.gamma.unwrap_or(s.gamma), a.mu)?;
    let config = sim_config(a.t, a.dt, a.x0, s.seed, s)?;
    let path = simulate_ratchet(&params, &config)?;
    if a.validate {
        path.check_invariants().map_err(|e| CliError::Runtime(format!("path invariant violated: {e}")))?;
    }
    let mut w = output(a.out.as_deref())?;
    path.write_csv(&mut w)?;
    w.flush()?;
    if let Some(p) = &a.jumps {
        let mut w = output(Some(p))?;
        path.write_jumps_csv(&mut w)?;
        w.flush()?;
    }
    Ok(())
}

pub fn couple(a: &CoupleArgs, s: &Settings) -> Result<(), CliError> {
    let params = RatchetParams::new(a.model.into(), a.gamma.unwrap_or(s.gamma), a.mu)?;
    let base = sim_config(a.t, a.dt, 0.0, s.seed, s)?;
    if a.n == 0 {
        return Err(CliError::Usage("--n must be positive".into()));
    }
    let outcomes = run_replicas(
        |seed, _| simulate_coupling(&params, a.x_hi, a.x_lo, &SimConfig { seed, ..base }),
        a.n,
        s.seed,
        s.workers,
    )?;
    let mut w = output(a.out.as_deref())?;
    writeln!(w, "k,time,censored")?;
    for (k, o) in outcomes.iter().enumerate() {
        writeln!(w, "{k},{},{}", o.time, o.censored)?;
    }
    w.flush()?;
    Ok(())
}

pub fn verify(a: &VerifyArgs, s: &Settings) -> Result<(), CliError> {
    let verdicts = suites::run(a, s)?;
    let mut text = String::new();
    for v in &verdicts {
        text.push_str(&serde_json::to_string(v).map_err(|e| CliError::Runtime(e.to_string()))?);
        text.push('\n');
    }
    print!("{text}");
    if let Some(p) = &a.out {
        std::fs::write(p, &text).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", p.display())))?;
    }
    if verdicts.iter().all(|v| v.pass) {
        Ok(())
    } else {
        Err(CliError::Failed)
    }
}

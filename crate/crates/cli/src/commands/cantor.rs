//! `cantor`: exact generations of K_m, thickness and the claimed bound.

use cubic_lab::cantor::{build_km, thickness, KmConstruction};
use cubic_lab::rational::{to_f64, RationalRepr};
use cubic_lab::{Interval, Rational};
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{usage, Invocation, Outcome};
use crate::config::NoKeys;
use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Params {
    pub m: usize,
    pub generation: usize,
}

impl Default for Params {
    fn default() -> Self {
        Params { m: 6, generation: 3 }
    }
}

#[derive(Serialize)]
struct Row<'a> {
    generation: usize,
    left_num: String,
    left_den: String,
    right_num: String,
    right_den: String,
    left: f64,
    right: f64,
    config_hash: &'a str,
}

const HEADER: &[&str] =
    &["generation", "left_num", "left_den", "right_num", "right_den", "left", "right", "config_hash"];

fn repr(iv: &Interval<Rational>) -> Interval<RationalRepr> {
    Interval { lo: RationalRepr::from(&iv.lo), hi: RationalRepr::from(&iv.hi) }
}

pub fn run(inv: Invocation, flags: toml::Table) -> Result<Outcome, CliError> {
    let (p, t, g, pending) = inv.resolve("cantor", flags, (Params::default(), NoKeys {}, NoKeys {}), None)?;
    if p.m < 6 || p.m % 2 != 0 {
        return Err(usage(format!("m must be even and at least 6, got {}", p.m)));
    }
    if p.generation == 0 {
        return Err(usage("generation must be at least 1"));
    }
    let construction = KmConstruction::new(p.m).map_err(CliError::other)?;
    let mut run = pending.open(&p, &t, &g)?;
    let hash = run.hash.clone();

    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for gen in 1..=p.generation {
        let k = build_km(p.m, gen).map_err(CliError::other)?;
        for iv in &k.intervals {
            rows.push(Row {
                generation: gen,
                left_num: iv.lo.numer().to_string(),
                left_den: iv.lo.denom().to_string(),
                right_num: iv.hi.numer().to_string(),
                right_den: iv.hi.denom().to_string(),
                left: to_f64(&iv.lo),
                right: to_f64(&iv.hi),
                config_hash: &hash,
            });
        }
        reports.push(thickness(&k).map_err(CliError::other)?);
    }
    run.write_csv("intervals.csv", HEADER, &rows)?;

    // Thickness of a finite stage is non-increasing in the generation, so
    // the deepest stage computed is the estimate for K_m.
    let last = reports.last().expect("at least one generation");
    let bound = construction.claimed_thickness_bound();
    let holds = last.thickness >= bound;
    let report = json!({
        "m": p.m,
        "generation": p.generation,
        "thickness": RationalRepr::from(&last.thickness),
        "thickness_by_generation": reports.iter().map(|r| RationalRepr::from(&r.thickness)).collect::<Vec<_>>(),
        "witness_gap": repr(&last.witness_gap),
        "witness_bridge": repr(&last.witness_bridge),
        "claimed_bound": RationalRepr::from(&bound),
        "bound_holds": holds,
        "central_gap": RationalRepr::from(&construction.central_gap()),
        "ambient": repr(&construction.ambient),
    });
    run.write_json("thickness.json", &report)?;

    println!(
        "K_{} generation {}: thickness {} (~{:.6}), claimed bound {} (~{:.6})",
        p.m,
        p.generation,
        last.thickness,
        to_f64(&last.thickness),
        bound,
        to_f64(&bound)
    );
    let message = format!("thickness {} is below the claimed bound {} = (3^m - 45)/22", last.thickness, bound);
    run.finish(holds, json!({ "thickness": last.thickness.to_string(), "bound_holds": holds }))?;
    Ok(Outcome { passed: holds, message })
}

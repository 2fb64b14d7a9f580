//! `tangency`: scans the renormalized family along `(mu_bar, nu_bar + t)`
//! and classifies the tangencies it crosses.

use cubic_lab::planar::{Classification, RenormTangency, TangencyEvent, TangencySide};
use cubic_lab::renorm::{residual_norm, ModelParams};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{usage, Invocation, Outcome};
use crate::CliError;

/// Coupling above which the limit-based predictions are only approximate.
const COUPLING_LIMIT: f64 = 0.05;
/// Gap slope of the upper tangency predicted by the limit family.
const UPPER_SLOPE: f64 = 0.9;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Params {
    pub mu_bar: f64,
    pub nu_bar: f64,
    pub n: u32,
    pub t_min: f64,
    pub t_max: f64,
    /// Scan points in [t_min, t_max]; 0 gives an empty scan.
    pub t_steps: usize,
    pub lambda: f64,
    pub sigma: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Default for Params {
    fn default() -> Self {
        let m = ModelParams::default();
        Params {
            mu_bar: 3.0,
            nu_bar: 0.0,
            n: 5,
            t_min: -0.05,
            t_max: 0.05,
            t_steps: 41,
            lambda: m.lambda,
            sigma: m.sigma,
            a: m.a,
            b: m.b,
            c: m.c,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Tolerances {
    /// Bisection width for the tangency parameter.
    pub bisection: f64,
    /// Parameter step of the slope estimate.
    pub classify_dt: f64,
    /// Base tolerance of the upper slope, widened by the measured residual.
    pub slope: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { bisection: 1e-10, classify_dt: 1e-3, slope: 0.1 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Grids {
    /// Fibers across each detection window.
    pub fibers: usize,
}

impl Default for Grids {
    fn default() -> Self {
        Grids { fibers: 401 }
    }
}

#[derive(Serialize)]
struct ScanRow<'a> {
    side: &'static str,
    t: f64,
    nu_bar: f64,
    gap: Option<f64>,
    status: String,
    config_hash: &'a str,
}

#[derive(Serialize)]
struct EventRow<'a> {
    side: &'static str,
    t: f64,
    nu_bar: f64,
    x: Option<f64>,
    y: Option<f64>,
    min_gap: f64,
    gap_slope: f64,
    slope_coarse: f64,
    slope_fine: f64,
    richardson_consistent: bool,
    classification: Classification,
    config_hash: &'a str,
}

const SCAN_HEADER: &[&str] = &["side", "t", "nu_bar", "gap", "status", "config_hash"];
const EVENT_HEADER: &[&str] = &[
    "side",
    "t",
    "nu_bar",
    "x",
    "y",
    "min_gap",
    "gap_slope",
    "slope_coarse",
    "slope_fine",
    "richardson_consistent",
    "classification",
    "config_hash",
];

fn name(side: TangencySide) -> &'static str {
    match side {
        TangencySide::Upper => "upper",
        TangencySide::Lower => "lower",
    }
}

fn t_grid(p: &Params) -> Vec<f64> {
    let steps = p.t_steps;
    match steps {
        _ if steps == 0 || p.t_min > p.t_max => Vec::new(),
        1 => vec![p.t_min],
        _ => (0..steps).map(|i| p.t_min + (p.t_max - p.t_min) * i as f64 / (steps - 1) as f64).collect(),
    }
}

pub fn run(inv: Invocation, flags: toml::Table) -> Result<Outcome, CliError> {
    let (p, tol, g, pending) =
        inv.resolve("tangency", flags, (Params::default(), Tolerances::default(), Grids::default()), None)?;
    let params = ModelParams { lambda: p.lambda, sigma: p.sigma, a: p.a, b: p.b, c: p.c, ..ModelParams::default() };
    params.validate().map_err(|e| usage(e.to_string()))?;
    if p.n == 0 {
        return Err(usage("n must be at least 1"));
    }
    if ![p.mu_bar, p.nu_bar, p.t_min, p.t_max].iter().all(|v| v.is_finite()) {
        return Err(usage("parameters must be finite"));
    }
    if g.fibers < 3 {
        return Err(usage("at least 3 fibers are needed"));
    }
    let mut run = pending.open(&p, &tol, &g)?;
    let hash = run.hash.clone();

    let mut warnings = Vec::new();
    let coupling = params.coupling(p.n).abs();
    if coupling > COUPLING_LIMIT {
        let w = format!(
            "coupling (lambda sigma)^n = {coupling:.4} exceeds {COUPLING_LIMIT}; limit-based tolerances are widened by the residual"
        );
        eprintln!("warning: {w}");
        warnings.push(w);
    }

    let ts = t_grid(&p);
    let mut rt = RenormTangency::new(params, p.n);
    rt.fibers = g.fibers;
    let sides = [TangencySide::Upper, TangencySide::Lower];
    let jobs: Vec<(TangencySide, f64)> = sides.iter().flat_map(|&s| ts.iter().map(move |&t| (s, t))).collect();
    let gaps: Vec<Result<f64, String>> =
        jobs.par_iter().map(|&(s, t)| rt.gap(p.mu_bar, p.nu_bar + t, s).map_err(|e| e.to_string())).collect();
    let scan: Vec<ScanRow> = jobs
        .iter()
        .zip(&gaps)
        .map(|(&(s, t), r)| ScanRow {
            side: name(s),
            t,
            nu_bar: p.nu_bar + t,
            gap: r.as_ref().ok().copied(),
            status: r.as_ref().err().cloned().unwrap_or_else(|| "ok".into()),
            config_hash: &hash,
        })
        .collect();
    run.write_csv("scan.csv", SCAN_HEADER, &scan)?;

    // Brackets between consecutive resolved samples where the gap changes sign.
    let mut brackets = Vec::new();
    for (k, &side) in sides.iter().enumerate() {
        let rows = &gaps[k * ts.len()..(k + 1) * ts.len()];
        for i in 1..ts.len() {
            if let (Ok(g0), Ok(g1)) = (&rows[i - 1], &rows[i]) {
                if (*g0 < 0.0) != (*g1 < 0.0) || *g0 == 0.0 {
                    brackets.push((side, ts[i - 1], ts[i]));
                }
            }
        }
    }
    let events: Vec<Result<(TangencySide, f64, TangencyEvent), String>> = brackets
        .par_iter()
        .map(|&(side, t0, t1)| {
            let nu0 = rt
                .tangency_parameter(p.mu_bar, side, (p.nu_bar + t0, p.nu_bar + t1), tol.bisection)
                .map_err(|e| e.to_string())?;
            let ev = rt.classify(p.mu_bar, nu0, side, tol.classify_dt).map_err(|e| e.to_string())?;
            Ok((side, nu0 - p.nu_bar, ev))
        })
        .collect();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for e in &events {
        match e {
            Ok((side, t, ev)) => rows.push(EventRow {
                side: name(*side),
                t: *t,
                nu_bar: ev.parameter,
                x: ev.location.map(|l| l.x),
                y: ev.location.map(|l| l.y),
                min_gap: ev.min_gap,
                gap_slope: ev.gap_slope,
                slope_coarse: ev.slope_coarse,
                slope_fine: ev.slope_fine,
                richardson_consistent: ev.richardson_consistent,
                classification: ev.classification,
                config_hash: &hash,
            }),
            Err(msg) => failures.push(msg.clone()),
        }
    }
    run.write_csv("events.csv", EVENT_HEADER, &rows)?;

    let residual = if ts.is_empty() {
        0.0
    } else {
        let r = residual_norm(&params, p.n).map_err(CliError::other)?;
        r.sup_h1.max(r.sup_h2)
    };
    let slope_tol = tol.slope + residual;
    let upper: Vec<&EventRow> = rows.iter().filter(|r| r.side == "upper").collect();
    let lower: Vec<&EventRow> = rows.iter().filter(|r| r.side == "lower").collect();
    let mut problems = failures.clone();
    // A locus is in range when the scan saw its gap change sign.
    let in_range = |s: TangencySide| brackets.iter().any(|b| b.0 == s);
    if in_range(TangencySide::Upper) {
        let ok = upper.len() == 1
            && upper[0].classification == Classification::ContactMaking
            && (upper[0].gap_slope - UPPER_SLOPE).abs() <= slope_tol;
        if !ok {
            problems.push(format!(
                "expected one contact-making upper event with slope {UPPER_SLOPE} +- {slope_tol:.4}, got {:?}",
                upper.iter().map(|r| (r.classification, r.gap_slope)).collect::<Vec<_>>()
            ));
        }
    }
    if in_range(TangencySide::Lower) {
        let ok = lower.len() == 1 && lower[0].classification == Classification::ContactBreaking;
        if !ok {
            problems.push(format!(
                "expected one contact-breaking lower event, got {:?}",
                lower.iter().map(|r| r.classification).collect::<Vec<_>>()
            ));
        }
    }
    let passed = problems.is_empty();
    let summary = json!({
        "mu_bar": p.mu_bar,
        "n": p.n,
        "coupling": coupling,
        "residual": residual,
        "upper_slope_tolerance": slope_tol,
        "scan_points": ts.len(),
        "events": rows.len(),
        "upper_in_range": in_range(TangencySide::Upper),
        "lower_in_range": in_range(TangencySide::Lower),
        "warnings": warnings,
        "problems": problems,
        "passed": passed,
    });
    run.write_json("summary.json", &summary)?;

    for r in &rows {
        println!(
            "{} tangency at t = {:.6} (nu_bar = {:.6}): {:?}, gap slope {:.4}",
            r.side, r.t, r.nu_bar, r.classification, r.gap_slope
        );
    }
    if rows.is_empty() {
        println!("no tangency in the scanned range ({} points)", ts.len());
    }
    let message = problems.join("; ");
    run.finish(passed, summary)?;
    Ok(Outcome { passed, message })
}

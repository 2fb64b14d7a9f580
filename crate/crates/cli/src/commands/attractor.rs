//! `attractor`: orbit sample, fixed points and top Lyapunov exponent of the
//! cubic Henon-like map `(x, y) -> (b y, -y^3 + a y + x)`.

use cubic_lab::planar::{iterate, lyapunov, CubicHenon, OrbitEnd, PlanarError, PlanarMap, Point};
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{usage, Invocation, Outcome};
use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Params {
    pub a: f64,
    pub b: f64,
    /// Steps of the Lyapunov run.
    pub steps: usize,
    pub x0: f64,
    pub y0: f64,
}

impl Default for Params {
    fn default() -> Self {
        Params { a: 2.8, b: 0.1, steps: 1_000_000, x0: 0.1, y0: 0.9 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Tolerances {
    /// Orbits leaving this radius are flagged as unbounded.
    pub bailout: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { bailout: 10.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Grids {
    /// Orbit points written to the sample CSV.
    pub samples: usize,
    /// Transient steps dropped before sampling and before averaging.
    pub discard: usize,
}

impl Default for Grids {
    fn default() -> Self {
        Grids { samples: 20_000, discard: 1000 }
    }
}

#[derive(Serialize)]
struct SampleRow<'a> {
    step: usize,
    x: f64,
    y: f64,
    config_hash: &'a str,
}

#[derive(Serialize)]
struct FixedRow<'a> {
    x: f64,
    y: f64,
    lambda1_re: f64,
    lambda1_im: f64,
    lambda2_re: f64,
    lambda2_im: f64,
    kind: &'static str,
    config_hash: &'a str,
}

fn kind(m1: f64, m2: f64) -> &'static str {
    match (m1 > 1.0, m2 > 1.0) {
        (true, false) => "saddle",
        (false, false) => "sink",
        (true, true) => "source",
        (false, true) => unreachable!("moduli are sorted"),
    }
}

pub fn run(inv: Invocation, flags: toml::Table) -> Result<Outcome, CliError> {
    let (p, t, g, pending) =
        inv.resolve("attractor", flags, (Params::default(), Tolerances::default(), Grids::default()), None)?;
    if !(p.a.is_finite() && p.b.is_finite() && p.x0.is_finite() && p.y0.is_finite()) {
        return Err(usage("parameters must be finite"));
    }
    if p.b == 0.0 {
        return Err(usage("b must be nonzero: the inverse map divides by b"));
    }
    if p.steps < 10_000 {
        return Err(usage("the Lyapunov run needs at least 10^4 steps"));
    }
    let mut run = pending.open(&p, &t, &g)?;
    let hash = run.hash.clone();
    let map = CubicHenon { a: p.a, b: p.b };
    let start = Point::new(p.x0, p.y0);

    let fixed: Vec<FixedRow> = map
        .fixed_points()
        .into_iter()
        .map(|pt| {
            let mut ev: Vec<_> = map.jacobian(pt).complex_eigenvalues().iter().copied().collect();
            ev.sort_by(|u, v| v.norm().total_cmp(&u.norm()).then(v.re.total_cmp(&u.re)));
            FixedRow {
                x: pt.x,
                y: pt.y,
                lambda1_re: ev[0].re,
                lambda1_im: ev[0].im,
                lambda2_re: ev[1].re,
                lambda2_im: ev[1].im,
                kind: kind(ev[0].norm(), ev[1].norm()),
                config_hash: &hash,
            }
        })
        .collect();
    let header = ["x", "y", "lambda1_re", "lambda1_im", "lambda2_re", "lambda2_im", "kind", "config_hash"];
    run.write_csv("fixed_points.csv", &header, &fixed)?;
    let saddles = fixed.iter().filter(|f| f.kind == "saddle").count();

    let orbit = iterate(&map, start, g.discard + g.samples, t.bailout);
    // An unbounded orbit is written in full, transient included.
    let skip = if orbit.end == OrbitEnd::Completed { g.discard } else { 0 };
    let samples: Vec<SampleRow> = orbit
        .points
        .iter()
        .enumerate()
        .skip(skip)
        .map(|(i, q)| SampleRow { step: i + 1, x: q.x, y: q.y, config_hash: &hash })
        .collect();
    run.write_csv("attractor.csv", &["step", "x", "y", "config_hash"], &samples)?;

    let (estimate, escaped_at) = match lyapunov(&map, start, p.steps, g.discard, t.bailout) {
        Ok(l) => (Some(l), None),
        Err(PlanarError::Escaped { steps }) => (None, Some(steps)),
        Err(e) => return Err(CliError::other(e)),
    };
    let sample_escape = match orbit.end {
        OrbitEnd::Completed => None,
        OrbitEnd::Escaped { step } | OrbitEnd::NonFinite { step } => Some(step),
    };
    let bounded = escaped_at.is_none() && sample_escape.is_none();
    let report = json!({
        "map": map.name(),
        "a": p.a,
        "b": p.b,
        "start": [p.x0, p.y0],
        "exponent": estimate.map(|l| l.exponent),
        "last_quarter": estimate.map(|l| l.last_quarter),
        "drift": estimate.map(|l| l.drift),
        "steps": p.steps,
        "bounded": bounded,
        "lyapunov_escape_step": escaped_at,
        "sample_escape_step": sample_escape,
        "fixed_points": fixed.len(),
        "saddle_fixed_points": saddles,
    });
    run.write_json("lyapunov.json", &report)?;

    match estimate {
        Some(l) => println!(
            "a = {}, b = {}: {} fixed points ({saddles} saddles), top Lyapunov exponent {:.4} (drift {:.1e})",
            p.a,
            p.b,
            fixed.len(),
            l.exponent,
            l.drift
        ),
        None => println!("a = {}, b = {}: orbit left radius {}", p.a, p.b, t.bailout),
    }
    let step = escaped_at.or(sample_escape).unwrap_or(0);
    let message = format!("orbit from ({}, {}) is unbounded: left radius {} at step {step}", p.x0, p.y0, t.bailout);
    run.finish(bounded, json!({ "exponent": estimate.map(|l| l.exponent), "bounded": bounded, "saddles": saddles }))?;
    Ok(Outcome { passed: bounded, message })
}

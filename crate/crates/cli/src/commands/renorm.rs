//! `renorm`: residual of the renormalized map over a range of n.

use cubic_lab::renorm::{decay_fit, residual_norm_with, ModelParams, Perturbation, SIGMA_BAR};
use cubic_lab::Rect;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{usage, Invocation, Outcome};
use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Params {
    pub lambda: f64,
    pub sigma: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// `quartic` or `none`.
    pub perturbation: String,
    pub epsilon: f64,
    pub n_min: u32,
    pub n_max: u32,
}

impl Default for Params {
    fn default() -> Self {
        let m = ModelParams::default();
        Params {
            lambda: m.lambda,
            sigma: m.sigma,
            a: m.a,
            b: m.b,
            c: m.c,
            perturbation: "quartic".into(),
            epsilon: 0.1,
            n_min: 4,
            n_max: 14,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Tolerances {
    /// Allowed distance of the fitted slope from `ln xi`.
    pub slope: f64,
    /// Relative error of the closed-form residual without perturbation.
    pub closed_form: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { slope: 0.05, closed_form: 1e-10 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Grids {
    /// Points per axis on [-2, 2]^2.
    pub space: usize,
    /// Points per axis of the (mu_bar, nu_bar) lattice.
    pub parameter: usize,
}

impl Default for Grids {
    fn default() -> Self {
        Grids { space: 41, parameter: 5 }
    }
}

#[derive(Serialize)]
struct Row<'a> {
    n: u32,
    mu_bar: f64,
    nu_bar: f64,
    sup_h1: f64,
    sup_h2: f64,
    ratio: Option<f64>,
    closed_form: f64,
    config_hash: &'a str,
}

const HEADER: &[&str] = &["n", "mu_bar", "nu_bar", "sup_H1", "sup_H2", "ratio", "closed_form", "config_hash"];

pub fn model(p: &Params) -> Result<ModelParams, CliError> {
    let perturbation = match p.perturbation.as_str() {
        "none" => Perturbation::None,
        "quartic" => Perturbation::Quartic { epsilon: p.epsilon },
        other => return Err(usage(format!("perturbation must be `quartic` or `none`, got `{other}`"))),
    };
    let m = ModelParams { lambda: p.lambda, sigma: p.sigma, a: p.a, b: p.b, c: p.c, perturbation };
    m.validate().map_err(|e| usage(e.to_string()))?;
    Ok(m)
}

pub fn run(inv: Invocation, flags: toml::Table) -> Result<Outcome, CliError> {
    let (p, t, g, pending) =
        inv.resolve("renorm", flags, (Params::default(), Tolerances::default(), Grids::default()), None)?;
    let params = model(&p)?;
    if p.n_min == 0 {
        return Err(usage("n must be at least 1"));
    }
    if p.n_max <= p.n_min {
        return Err(usage("the decay fit needs n_max > n_min"));
    }
    if g.space < 2 || g.parameter < 2 {
        return Err(usage("grids need at least 2 points per axis"));
    }
    let mut run = pending.open(&p, &t, &g)?;
    let hash = run.hash.clone();

    let norms = (p.n_min..=p.n_max)
        .map(|n| residual_norm_with(&params, n, Rect::square(2.0), g.space, g.parameter))
        .collect::<Result<Vec<_>, _>>()
        .map_err(CliError::other)?;
    let closed = |n: u32| 2.0 * (params.a * params.c).abs() * (params.lambda * params.sigma).powi(n as i32);
    let rows: Vec<Row> = norms
        .iter()
        .enumerate()
        .map(|(i, r)| Row {
            n: r.n,
            mu_bar: r.mu_bar,
            nu_bar: r.nu_bar,
            sup_h1: r.sup_h1,
            sup_h2: r.sup_h2,
            ratio: (i > 0).then(|| r.sup_h2 / norms[i - 1].sup_h2),
            closed_form: closed(r.n),
            config_hash: &hash,
        })
        .collect();
    run.write_csv("residuals.csv", HEADER, &rows)?;

    let fit = decay_fit(norms.clone(), &params).map_err(CliError::other)?;
    let closed_error = norms.iter().map(|r| (r.sup_h2 / closed(r.n) - 1.0).abs()).fold(0.0, f64::max);
    // Without a perturbation the residual is exactly 2|ac|(lambda sigma)^n,
    // which decays faster than xi^n; the closed form is what is certified.
    let (certified, criterion) = match params.perturbation {
        Perturbation::None => (
            closed_error <= t.closed_form,
            format!("sup H2 equals 2|ac|(lambda sigma)^n to relative {:e}", t.closed_form),
        ),
        Perturbation::Quartic { .. } => (
            (fit.slope - fit.predicted).abs() <= t.slope,
            format!("log-residual slope within {} of ln xi", t.slope),
        ),
    };
    let report = json!({
        "slope": fit.slope,
        "intercept": fit.intercept,
        "predicted_slope": fit.predicted,
        "xi": params.xi(),
        "ln_lambda_sigma": (params.lambda * params.sigma).ln(),
        "closed_form_max_relative_error": closed_error,
        "parameter_box": SIGMA_BAR,
        "certified": certified,
        "criterion": criterion,
    });
    run.write_json("decay.json", &report)?;

    println!(
        "n = {}..{}: slope {:.4}, ln xi = {:.4}, closed-form relative error {:.2e}",
        p.n_min, p.n_max, fit.slope, fit.predicted, closed_error
    );
    let message = format!("rate not certified: {criterion} (slope {:.4})", fit.slope);
    run.finish(certified, json!({ "slope": fit.slope, "certified": certified }))?;
    Ok(Outcome { passed: certified, message })
}

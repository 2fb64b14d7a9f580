use std::io;

use rayon::prelude::*;
use serde::Serialize;

use super::{ModelParams, RenormError, RenormalizedMap};
use crate::planar::Point;
use crate::{Interval, Rect};

/// Parameter domain `[0, 4] x [-1, 1]` of `(mu_bar, nu_bar)`.
pub const SIGMA_BAR: Rect = Rect {
    x: Interval { lo: 0.0, hi: 4.0 },
    y: Interval { lo: -1.0, hi: 1.0 },
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualNorm {
    pub n: u32,
    pub sup_h1: f64,
    pub sup_h2: f64,
    /// Parameters at which `sup_h2` is attained.
    pub mu_bar: f64,
    pub nu_bar: f64,
}

/// Sup of `|H1_bar|` and `|H2_bar|` over a `grid x grid` lattice of `bx`
/// and a `param_grid x param_grid` lattice of `SIGMA_BAR`.
pub fn residual_norm_with(
    params: &ModelParams,
    n: u32,
    bx: Rect,
    grid: usize,
    param_grid: usize,
) -> Result<ResidualNorm, RenormError> {
    params.validate()?;
    let xs = bx.x.grid(grid);
    let ys = bx.y.grid(grid);
    let mus = SIGMA_BAR.x.grid(param_grid);
    let nus = SIGMA_BAR.y.grid(param_grid);
    let samples: Vec<(f64, f64)> = mus.iter().flat_map(|&m| nus.iter().map(move |&v| (m, v))).collect();
    let per_param: Vec<Result<(f64, f64, f64, f64), RenormError>> = samples
        .par_iter()
        .map(|&(mu_bar, nu_bar)| {
            let map = RenormalizedMap::new(*params, n, mu_bar, nu_bar)?;
            let (mut s1, mut s2) = (0.0f64, 0.0f64);
            for &x in &xs {
                for &y in &ys {
                    let (h1, h2) = map.residual(Point::new(x, y))?;
                    s1 = s1.max(h1.abs());
                    s2 = s2.max(h2.abs());
                }
            }
            Ok((mu_bar, nu_bar, s1, s2))
        })
        .collect();
    let mut out = ResidualNorm { n, sup_h1: 0.0, sup_h2: -1.0, mu_bar: 0.0, nu_bar: 0.0 };
    for r in per_param {
        let (mu_bar, nu_bar, s1, s2) = r?;
        out.sup_h1 = out.sup_h1.max(s1);
        if s2 > out.sup_h2 {
            out.sup_h2 = s2;
            out.mu_bar = mu_bar;
            out.nu_bar = nu_bar;
        }
    }
    Ok(out)
}

/// Residual sup on `[-2, 2]^2` with a 41-point grid per axis and a 5 x 5
/// parameter lattice.
pub fn residual_norm(params: &ModelParams, n: u32) -> Result<ResidualNorm, RenormError> {
    residual_norm_with(params, n, Rect::square(2.0), 41, 5)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFit {
    /// Least-squares slope of `ln sup_h2` against `n`.
    pub slope: f64,
    pub intercept: f64,
    /// `ln max(sigma^{-1/2}, lambda sigma)`, the predicted slope.
    pub predicted: f64,
    pub norms: Vec<ResidualNorm>,
}

/// Fits the exponential decay rate of the residual over `ns`.
pub fn decay_fit(norms: Vec<ResidualNorm>, params: &ModelParams) -> Result<DecayFit, RenormError> {
    let pts: Vec<(f64, f64)> = norms
        .iter()
        .filter(|r| r.sup_h2 > 0.0)
        .map(|r| (r.n as f64, r.sup_h2.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(RenormError::DegenerateFit);
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Ok(DecayFit { slope, intercept: my - slope * mx, predicted: params.xi().ln(), norms })
}

/// One CSV row per `n`; `ratio` is `sup_h2(n) / sup_h2(previous n)`.
#[derive(Debug, Clone, Serialize)]
pub struct ResidualRow {
    pub n: u32,
    pub mu_bar: f64,
    pub nu_bar: f64,
    #[serde(rename = "sup_H1")]
    pub sup_h1: f64,
    #[serde(rename = "sup_H2")]
    pub sup_h2: f64,
    pub ratio: Option<f64>,
}

pub fn write_residual_csv<W: io::Write>(norms: &[ResidualNorm], out: W) -> Result<(), RenormError> {
    let mut w = csv::Writer::from_writer(out);
    let mut prev: Option<f64> = None;
    for r in norms {
        let row = ResidualRow {
            n: r.n,
            mu_bar: r.mu_bar,
            nu_bar: r.nu_bar,
            sup_h1: r.sup_h1,
            sup_h2: r.sup_h2,
            ratio: prev.map(|p| r.sup_h2 / p),
        };
        w.serialize(row).map_err(|e| RenormError::Csv(e.to_string()))?;
        prev = Some(r.sup_h2);
    }
    w.flush().map_err(|e| RenormError::Csv(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::renorm::Perturbation;

    #[test]
    fn unperturbed_residual_is_exact_coupling_law() {
        let p = ModelParams::default();
        for n in [4u32, 8, 12] {
            let r = residual_norm(&p, n).unwrap();
            let want = 2.0 * 0.4f64.powi(n as i32);
            assert!(((r.sup_h2 - want) / want).abs() < 1e-10, "n={n} got {}", r.sup_h2);
            assert!(r.sup_h1 < 1e-14);
        }
    }

    #[test]
    fn zero_coupling_gives_zero_residual() {
        let p = ModelParams { c: 0.0, ..ModelParams::default() };
        let r = residual_norm_with(&p, 6, Rect::square(2.0), 9, 3).unwrap();
        assert!(r.sup_h2 < 1e-13, "{r:?}");
    }

    #[test]
    fn csv_has_expected_columns() {
        let p = ModelParams::default().with_perturbation(Perturbation::Quartic { epsilon: 0.1 });
        let norms: Vec<_> = (4..=5).map(|n| residual_norm_with(&p, n, Rect::square(2.0), 5, 2).unwrap()).collect();
        let mut buf = Vec::new();
        write_residual_csv(&norms, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("n,mu_bar,nu_bar,sup_H1,sup_H2,ratio"));
        assert!(lines.next().unwrap().ends_with(','));
        assert_eq!(lines.count(), 1);
    }
}

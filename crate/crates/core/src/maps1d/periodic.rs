use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use super::{MapError, MapFamily1D, PiecewiseAffineMap};
use crate::rational::{to_f64, Rational, RationalRepr};
use crate::Interval;

const POLISH_WIDTH: f64 = 1e-14;
const MAX_BISECTIONS: usize = 200;
const MAX_CELLS: f64 = 5.0e7;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodicOrbit1D {
    /// Orbit in dynamical order, starting from its smallest point.
    pub points: Vec<f64>,
    pub period: usize,
    /// Product of derivatives along the orbit.
    pub multiplier: f64,
    /// Exact orbit, available for piecewise-affine maps.
    pub exact: Option<Vec<RationalRepr>>,
}

impl PeriodicOrbit1D {
    pub fn exact_points(&self) -> Option<Vec<Rational>> {
        self.exact
            .as_ref()
            .map(|v| v.iter().map(|r| r.parse().expect("stored repr is valid")).collect())
    }
}

/// A sign-change bracket whose polished root failed the closure test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnresolvedBracket {
    pub lo: f64,
    pub hi: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct PeriodicSearch {
    pub orbits: Vec<PeriodicOrbit1D>,
    pub unresolved: Vec<UnresolvedBracket>,
}

/// All orbits of minimal period `period` meeting `domain`, with the default
/// subdivision density `4 * 3^period` cells per unit length.
pub fn find_periodic(
    map: &MapFamily1D,
    period: usize,
    domain: Interval<f64>,
    tol: f64,
) -> Result<PeriodicSearch, MapError> {
    let density = 4.0 * 3f64.powi(period as i32);
    find_periodic_with_density(map, period, domain, tol, density)
}

pub fn find_periodic_with_density(
    map: &MapFamily1D,
    period: usize,
    domain: Interval<f64>,
    tol: f64,
    cells_per_unit: f64,
) -> Result<PeriodicSearch, MapError> {
    if period == 0 {
        return Err(MapError::InvalidSearch("period must be at least 1".into()));
    }
    if !(tol > 0.0) || !(cells_per_unit > 0.0) {
        return Err(MapError::InvalidSearch("tolerance and density must be positive".into()));
    }
    let len = domain.hi - domain.lo;
    if !(len >= 0.0) || !len.is_finite() {
        return Err(MapError::InvalidSearch("domain must be a finite interval".into()));
    }
    let cells_f = (len * cells_per_unit).ceil().max(1.0);
    if cells_f > MAX_CELLS {
        return Err(MapError::InvalidSearch(format!("{cells_f} cells exceeds the limit")));
    }
    let cells = cells_f as usize;

    let g = |y: f64| map.iterate(y, period).ok().map(|z| z - y);
    let grid: Vec<f64> = (0..=cells)
        .map(|i| if i == cells { domain.hi } else { domain.lo + len * i as f64 / cells as f64 })
        .collect();
    let values: Vec<Option<f64>> = grid.par_iter().map(|&y| g(y)).collect();

    // Candidate roots: exact zeros on the grid and sign changes across cells.
    let candidates: Vec<(f64, f64)> = (0..=cells)
        .into_par_iter()
        .filter_map(|i| {
            let vi = values[i]?;
            if vi == 0.0 {
                return Some((grid[i], grid[i]));
            }
            if i == cells {
                return None;
            }
            let vj = values[i + 1]?;
            (vj != 0.0 && (vi < 0.0) != (vj < 0.0)).then(|| (grid[i], grid[i + 1]))
        })
        .collect();

    let polished: Vec<(f64, f64, f64)> =
        candidates.par_iter().map(|&(a, b)| polish(&g, a, b)).map(|(a, b)| (a, b, 0.5 * (a + b))).collect();

    let mut unresolved = Vec::new();
    let mut roots = Vec::new();
    for &(a, b, y) in &polished {
        let residual = g(y).map(f64::abs).unwrap_or(f64::INFINITY);
        let slope = orbit_derivative(map, y, period).unwrap_or(f64::INFINITY);
        if residual <= tol * slope.abs().max(1.0) {
            roots.push(y);
        } else {
            unresolved.push(UnresolvedBracket { lo: a, hi: b, residual });
        }
    }

    let mut orbits: Vec<PeriodicOrbit1D> = Vec::new();
    for &y in &roots {
        if minimal_period(map, y, period, tol) != period {
            continue;
        }
        let Some(orbit) = build_orbit(map, y, period, &roots) else { continue };
        let dup = orbits.iter().any(|o| same_point(o.points[0], orbit.points[0]));
        if !dup {
            orbits.push(orbit);
        }
    }
    orbits.sort_by(|a, b| a.points[0].total_cmp(&b.points[0]));

    if let MapFamily1D::PiecewiseAffine(pa) = map {
        for orbit in &mut orbits {
            orbit.exact = exact_orbit(pa, &orbit.points).map(|v| v.iter().map(RationalRepr::from).collect());
            if let Some(ex) = &orbit.exact {
                orbit.points = ex.iter().map(|r| r.approx).collect();
            }
        }
    }
    Ok(PeriodicSearch { orbits, unresolved })
}

fn same_point(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(1.0)
}

fn polish(g: &impl Fn(f64) -> Option<f64>, mut a: f64, mut b: f64) -> (f64, f64) {
    if a == b {
        return (a, b);
    }
    let Some(mut ga) = g(a) else { return (a, b) };
    for _ in 0..MAX_BISECTIONS {
        if b - a <= POLISH_WIDTH {
            break;
        }
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let Some(gm) = g(m) else { break };
        if gm == 0.0 {
            return (m, m);
        }
        if (gm < 0.0) == (ga < 0.0) {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    (a, b)
}

fn orbit_derivative(map: &MapFamily1D, y: f64, period: usize) -> Result<f64, MapError> {
    let mut x = y;
    let mut d = 1.0;
    for _ in 0..period {
        d *= map.derivative(x)?;
        x = map.eval(x)?;
    }
    Ok(d)
}

fn minimal_period(map: &MapFamily1D, y: f64, period: usize, tol: f64) -> usize {
    for k in (1..period).filter(|k| period.is_multiple_of(*k)) {
        let closes = match (map.iterate(y, k), orbit_derivative(map, y, k)) {
            (Ok(z), Ok(d)) => (z - y).abs() <= tol * d.abs().max(1.0),
            _ => false,
        };
        if closes {
            return k;
        }
    }
    period
}

/// Orbit through `y`, snapping each iterate to a nearby polished root when
/// one exists so that rounding growth along the orbit stays bounded.
fn build_orbit(map: &MapFamily1D, y: f64, period: usize, roots: &[f64]) -> Option<PeriodicOrbit1D> {
    let mut points = Vec::with_capacity(period);
    let mut x = y;
    let mut multiplier = 1.0;
    for _ in 0..period {
        points.push(x);
        multiplier *= map.derivative(x).ok()?;
        let next = map.eval(x).ok()?;
        x = roots
            .iter()
            .copied()
            .filter(|r| (r - next).abs() < 1e-8)
            .min_by(|a, b| (a - next).abs().total_cmp(&(b - next).abs()))
            .unwrap_or(next);
    }
    let start = points
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    points.rotate_left(start);
    Some(PeriodicOrbit1D { points, period, multiplier, exact: None })
}

/// Exact periodic orbit of a piecewise-affine map: solve the fixed point of
/// the affine composition along the floating orbit's itinerary and accept it
/// only if exact iteration closes.
fn exact_orbit(map: &PiecewiseAffineMap, points: &[f64]) -> Option<Vec<Rational>> {
    let itinerary: Option<Vec<usize>> = points.iter().map(|&x| map.branch_index_f64(x)).collect();
    let itinerary = itinerary?;
    let (a, b) = map.compose(&itinerary);
    if a == Rational::one() {
        return None;
    }
    let x0 = b / (Rational::one() - a);
    let mut orbit = Vec::with_capacity(points.len());
    let mut x = x0.clone();
    for &approx in points {
        if (to_f64(&x) - approx).abs() > 1e-6 {
            return None;
        }
        orbit.push(x.clone());
        x = map.eval_exact(&x).ok()?;
    }
    if x != x0 || orbit.iter().skip(1).any(|p| (p - &x0).is_zero()) {
        return None;
    }
    Some(orbit)
}

/// Exact rational fixed point of an affine branch chain, if the chain is not
/// the identity.
pub fn affine_fixed_point(map: &PiecewiseAffineMap, itinerary: &[usize]) -> Option<Rational> {
    let (a, b) = map.compose(itinerary);
    (a != Rational::one()).then(|| b / (Rational::one() - a))
}

use nalgebra::Matrix2;
use serde::Serialize;

use super::{Iterated, PlanarError, PlanarMap, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumKind {
    Saddle,
    Source,
    Sink,
    /// Complex pair or an eigenvalue on the unit circle.
    NonHyperbolic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SaddlePoint {
    pub location: Point,
    pub period: usize,
    /// Real eigenvalues of the period-composed Jacobian, largest modulus
    /// first; `None` for a complex pair.
    pub eigenvalues: Option<[f64; 2]>,
    /// Unit eigenvectors matching `eigenvalues`.
    pub eigenvectors: Option<[Point; 2]>,
    pub kind: SpectrumKind,
    /// `|f^period(location) - location|`.
    pub residual: f64,
}

impl SaddlePoint {
    pub fn unstable_eigenvalue(&self) -> Option<f64> {
        self.eigenvalues.map(|e| e[0])
    }

    pub fn stable_eigenvalue(&self) -> Option<f64> {
        self.eigenvalues.map(|e| e[1])
    }
}

/// Unit eigenvector of `m` for the real eigenvalue `l`.
fn eigenvector(m: &Matrix2<f64>, l: f64) -> Point {
    let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let v1 = Point::new(b, l - a);
    let v2 = Point::new(l - d, c);
    let v = if v1.norm() >= v2.norm() { v1 } else { v2 };
    if v.norm() == 0.0 {
        // m = l I: every direction is an eigenvector.
        return Point::new(1.0, 0.0);
    }
    v.normalize()
}

/// Real spectrum of a 2x2 matrix, largest modulus first.
pub(crate) fn real_spectrum(m: &Matrix2<f64>) -> Option<[f64; 2]> {
    let tr = m.trace();
    let det = m.determinant();
    let disc = tr * tr - 4.0 * det;
    if disc < 0.0 {
        return None;
    }
    let s = disc.sqrt();
    // Stable quadratic formula.
    let l1 = if tr >= 0.0 { 0.5 * (tr + s) } else { 0.5 * (tr - s) };
    let l2 = if l1 != 0.0 { det / l1 } else { 0.0 };
    Some(if l1.abs() >= l2.abs() { [l1, l2] } else { [l2, l1] })
}

pub(crate) fn classify(eigs: Option<[f64; 2]>) -> SpectrumKind {
    match eigs {
        None => SpectrumKind::NonHyperbolic,
        Some([l1, l2]) => {
            let (m1, m2) = (l1.abs(), l2.abs());
            if m1 == 1.0 || m2 == 1.0 {
                SpectrumKind::NonHyperbolic
            } else if m1 > 1.0 && m2 < 1.0 {
                SpectrumKind::Saddle
            } else if m2 > 1.0 {
                SpectrumKind::Source
            } else {
                SpectrumKind::Sink
            }
        }
    }
}

/// Newton's method on `f^period - id` from `seed` with at most 100 steps.
pub fn find_saddle<M: PlanarMap>(map: &M, period: usize, seed: Point, tol: f64) -> Result<SaddlePoint, PlanarError> {
    find_saddle_with(map, period, seed, tol, 100)
}

pub fn find_saddle_with<M: PlanarMap>(
    map: &M,
    period: usize,
    seed: Point,
    tol: f64,
    max_iter: usize,
) -> Result<SaddlePoint, PlanarError> {
    if period == 0 {
        return Err(PlanarError::Invalid("period must be at least 1".into()));
    }
    let fk = Iterated { map, times: period };
    let mut p = seed;
    for _ in 0..max_iter {
        let g = fk.forward(p) - p;
        let jg = fk.jacobian(p) - Matrix2::identity();
        let step = jg.lu().solve(&(-g)).ok_or(PlanarError::SingularJacobian { x: p.x, y: p.y })?;
        p += step;
        if !(p.x.is_finite() && p.y.is_finite()) {
            break;
        }
        if step.norm() <= tol * p.norm().max(1.0) {
            let residual = (fk.forward(p) - p).norm();
            let jac = fk.jacobian(p);
            let eigenvalues = real_spectrum(&jac);
            let eigenvectors = eigenvalues.map(|[l1, l2]| [eigenvector(&jac, l1), eigenvector(&jac, l2)]);
            return Ok(SaddlePoint {
                location: p,
                period,
                eigenvalues,
                eigenvectors,
                kind: classify(eigenvalues),
                residual,
            });
        }
    }
    Err(PlanarError::NewtonDiverged { iterations: max_iter, x: p.x, y: p.y })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planar::CubicHenon;
    use approx::assert_relative_eq;

    #[test]
    fn origin_of_cubic_henon() {
        let f = CubicHenon::attractor();
        let s = find_saddle(&f, 1, Point::new(0.01, -0.02), 1e-13).unwrap();
        assert!(s.location.norm() < 1e-14);
        let [l1, l2] = s.eigenvalues.unwrap();
        // Roots of l^2 - 2.8 l - 0.1.
        let r = (2.8f64 * 2.8 + 0.4).sqrt();
        assert_relative_eq!(l1, 0.5 * (2.8 + r), epsilon = 1e-12);
        assert_relative_eq!(l2, 0.5 * (2.8 - r), epsilon = 1e-12);
        assert_eq!(s.kind, SpectrumKind::Saddle);
        let jac = f.jacobian(s.location);
        let [v1, _] = s.eigenvectors.unwrap();
        assert!((jac * v1 - l1 * v1).norm() < 1e-12);
    }

    #[test]
    fn outer_fixed_point() {
        let f = CubicHenon::attractor();
        let s = find_saddle(&f, 1, Point::new(0.14, 1.38), 1e-13).unwrap();
        assert_relative_eq!(s.location.y, 1.9f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(s.location.x, 0.1 * 1.9f64.sqrt(), epsilon = 1e-12);
        assert_eq!(s.kind, SpectrumKind::Saddle);
    }

    #[test]
    fn sink_is_reported_not_rejected() {
        let f = CubicHenon { a: 0.5, b: 0.1 };
        let s = find_saddle(&f, 1, Point::new(0.01, 0.01), 1e-13).unwrap();
        assert_eq!(s.kind, SpectrumKind::Sink);
    }
}

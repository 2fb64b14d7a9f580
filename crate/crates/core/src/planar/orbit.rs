use serde::Serialize;

use super::{PlanarError, PlanarMap, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OrbitEnd {
    Completed,
    Escaped { step: usize },
    NonFinite { step: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Orbit {
    /// Successive images, starting with the first image of `start`.
    pub points: Vec<Point>,
    pub end: OrbitEnd,
}

/// `steps` successive images of `start`, truncated when the norm exceeds
/// `bailout` or a coordinate stops being finite.
pub fn iterate<M: PlanarMap + ?Sized>(map: &M, start: Point, steps: usize, bailout: f64) -> Orbit {
    let mut points = Vec::with_capacity(steps);
    let mut p = start;
    for step in 1..=steps {
        p = map.forward(p);
        if !(p.x.is_finite() && p.y.is_finite()) {
            return Orbit { points, end: OrbitEnd::NonFinite { step } };
        }
        points.push(p);
        if p.norm() > bailout {
            return Orbit { points, end: OrbitEnd::Escaped { step } };
        }
    }
    Orbit { points, end: OrbitEnd::Completed }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LyapunovEstimate {
    pub exponent: f64,
    /// Estimate from the last quarter of the run alone.
    pub last_quarter: f64,
    /// `|exponent - last_quarter|`, a convergence diagnostic.
    pub drift: f64,
    pub steps: usize,
}

/// Top Lyapunov exponent: mean log growth of a renormalized tangent vector.
/// The first `discard` steps move both the point and the vector onto the
/// attractor and its dominant direction without being averaged.
pub fn lyapunov<M: PlanarMap + ?Sized>(
    map: &M,
    start: Point,
    steps: usize,
    discard: usize,
    bailout: f64,
) -> Result<LyapunovEstimate, PlanarError> {
    if steps < 10_000 {
        return Err(PlanarError::Invalid("Lyapunov estimates need at least 10^4 steps".into()));
    }
    let mut p = start;
    let mut v = Point::new(1.0, 1.0).normalize();
    let advance = |p: &mut Point, v: &mut Point, k: usize| -> Result<f64, PlanarError> {
        let w = map.jacobian(*p) * *v;
        *p = map.forward(*p);
        let norm = w.norm();
        if !(p.x.is_finite() && p.y.is_finite()) || p.norm() > bailout || !(norm > 0.0 && norm.is_finite()) {
            return Err(PlanarError::Escaped { steps: k + 1 });
        }
        *v = w / norm;
        Ok(norm.ln())
    };
    for k in 0..discard {
        advance(&mut p, &mut v, k)?;
    }
    let quarter_start = steps - steps / 4;
    let (mut total, mut last) = (0.0, 0.0);
    for k in 0..steps {
        let l = advance(&mut p, &mut v, discard + k)?;
        total += l;
        if k >= quarter_start {
            last += l;
        }
    }
    let exponent = total / steps as f64;
    let last_quarter = last / (steps - quarter_start) as f64;
    Ok(LyapunovEstimate { exponent, last_quarter, drift: (exponent - last_quarter).abs(), steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planar::LinearSaddle;
    use crate::renorm::LimitEndomorphism;

    #[test]
    fn linear_orbit() {
        let m = LinearSaddle { lambda: 0.2, sigma: 2.0 };
        let o = iterate(&m, Point::new(1.0, 0.0), 3, 1e6);
        assert_eq!(o.end, OrbitEnd::Completed);
        let xs: Vec<f64> = o.points.iter().map(|p| p.x).collect();
        assert!((xs[0] - 0.2).abs() < 1e-16 && (xs[1] - 0.04).abs() < 1e-16 && (xs[2] - 0.008).abs() < 1e-16);
    }

    #[test]
    fn escape_is_flagged() {
        let m = LinearSaddle { lambda: 0.2, sigma: 2.0 };
        let o = iterate(&m, Point::new(0.0, 1.0), 100, 1e3);
        assert_eq!(o.end, OrbitEnd::Escaped { step: 10 });
    }

    #[test]
    fn limit_two_cycle() {
        let m = LimitEndomorphism::new(3.0, 0.0);
        let o = iterate(&m, Point::new(2.0, -2.0), 4, 1e6);
        assert_eq!(o.points[0], Point::new(-2.0, 2.0));
        assert_eq!(o.points[1], Point::new(2.0, -2.0));
        assert_eq!(o.points[3], Point::new(2.0, -2.0));
    }

    #[test]
    fn linear_lyapunov_is_log_sigma() {
        let m = LinearSaddle { lambda: 0.2, sigma: 2.0 };
        let e = lyapunov(&m, Point::new(0.0, 0.0), 10_000, 100, 1e300).unwrap();
        assert!((e.exponent - 2f64.ln()).abs() < 1e-9, "{e:?}");
        assert!(lyapunov(&m, Point::zeros(), 10, 0, 1e300).is_err());
    }
}

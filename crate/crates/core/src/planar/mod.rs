//! Planar dynamics: orbits, saddles, Lyapunov exponents, invariant
//! manifolds and tangency detection.

mod families;
mod manifold;
mod orbit;
mod saddle;
mod tangency;

use nalgebra::{Matrix2, Vector2};

pub use families::{CubicHenon, LinearSaddle};
pub use manifold::{grow_manifold, ManifoldCurve, ManifoldKind, ManifoldOptions};
pub use orbit::{iterate, lyapunov, LyapunovEstimate, Orbit, OrbitEnd};
pub use saddle::{find_saddle, find_saddle_with, SaddlePoint, SpectrumKind};
pub use tangency::{
    classify_tangency, critical_value, decoupled_upper_gap, detect_tangencies, detect_tangencies_on, f_bar_slope,
    fiber_gaps, limit_upper_gap, two_cycle_ordinate, velocity_derivatives, Classification, Extremum, FBarSlope,
    FiberDirection, GapSample, RenormTangency, TangencyCandidate, TangencyEvent, TangencyScan, TangencySide,
    VelocityTable, SLOPE_NOISE_FLOOR,
};

pub type Point = Vector2<f64>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PlanarError {
    #[error("{0} has no inverse")]
    NoInverse(String),
    #[error("Newton iteration did not converge after {iterations} steps; last iterate ({x}, {y})")]
    NewtonDiverged { iterations: usize, x: f64, y: f64 },
    #[error("singular Jacobian at ({x}, {y})")]
    SingularJacobian { x: f64, y: f64 },
    #[error("orbit escaped after {steps} steps")]
    Escaped { steps: usize },
    #[error("point is not a saddle (eigenvalue moduli {0}, {1})")]
    NotSaddle(f64, f64),
    #[error("window rejected: {0}")]
    WindowRejected(String),
    #[error("invalid request: {0}")]
    Invalid(String),
    #[error("tangency locus lost: {0}")]
    LocusLost(String),
}

/// A planar map with optional inverse and Jacobian.
pub trait PlanarMap: Send + Sync {
    fn name(&self) -> String;

    /// Named parameter values, used for manifests.
    fn params(&self) -> Vec<(String, f64)> {
        Vec::new()
    }

    fn forward(&self, p: Point) -> Point;

    fn inverse(&self, _p: Point) -> Option<Point> {
        None
    }

    fn has_inverse(&self) -> bool {
        false
    }

    /// Analytic Jacobian when available, central differences otherwise.
    fn jacobian(&self, p: Point) -> Matrix2<f64> {
        finite_difference_jacobian(|q| self.forward(q), p, 1e-6)
    }
}

impl<M: PlanarMap + ?Sized> PlanarMap for &M {
    fn name(&self) -> String {
        (**self).name()
    }
    fn params(&self) -> Vec<(String, f64)> {
        (**self).params()
    }
    fn forward(&self, p: Point) -> Point {
        (**self).forward(p)
    }
    fn inverse(&self, p: Point) -> Option<Point> {
        (**self).inverse(p)
    }
    fn has_inverse(&self) -> bool {
        (**self).has_inverse()
    }
    fn jacobian(&self, p: Point) -> Matrix2<f64> {
        (**self).jacobian(p)
    }
}

/// Central-difference Jacobian with step `h` (scaled by the coordinate).
pub fn finite_difference_jacobian(f: impl Fn(Point) -> Point, p: Point, h: f64) -> Matrix2<f64> {
    let mut j = Matrix2::zeros();
    for k in 0..2 {
        let step = h * p[k].abs().max(1.0);
        let mut plus = p;
        let mut minus = p;
        plus[k] += step;
        minus[k] -= step;
        let col = (f(plus) - f(minus)) / (2.0 * step);
        j.set_column(k, &col);
    }
    j
}

/// The `k`-fold composition of a map, as a map.
pub struct Iterated<M> {
    pub map: M,
    pub times: usize,
}

impl<M: PlanarMap> PlanarMap for Iterated<M> {
    fn name(&self) -> String {
        format!("{}^{}", self.map.name(), self.times)
    }
    fn params(&self) -> Vec<(String, f64)> {
        self.map.params()
    }
    fn forward(&self, p: Point) -> Point {
        (0..self.times).fold(p, |q, _| self.map.forward(q))
    }
    fn inverse(&self, p: Point) -> Option<Point> {
        (0..self.times).try_fold(p, |q, _| self.map.inverse(q))
    }
    fn has_inverse(&self) -> bool {
        self.map.has_inverse()
    }
    fn jacobian(&self, p: Point) -> Matrix2<f64> {
        let mut q = p;
        let mut j = Matrix2::identity();
        for _ in 0..self.times {
            j = self.map.jacobian(q) * j;
            q = self.map.forward(q);
        }
        j
    }
}

/// Swaps forward and inverse of an invertible map.
pub struct Inverted<M> {
    pub map: M,
}

impl<M: PlanarMap> PlanarMap for Inverted<M> {
    fn name(&self) -> String {
        format!("{}^-1", self.map.name())
    }
    fn params(&self) -> Vec<(String, f64)> {
        self.map.params()
    }
    fn forward(&self, p: Point) -> Point {
        self.map.inverse(p).unwrap_or_else(|| Point::new(f64::NAN, f64::NAN))
    }
    fn inverse(&self, p: Point) -> Option<Point> {
        Some(self.map.forward(p))
    }
    fn has_inverse(&self) -> bool {
        true
    }
    fn jacobian(&self, p: Point) -> Matrix2<f64> {
        let q = self.forward(p);
        self.map
            .jacobian(q)
            .try_inverse()
            .unwrap_or_else(|| Matrix2::from_element(f64::NAN))
    }
}

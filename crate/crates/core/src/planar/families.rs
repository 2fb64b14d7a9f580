use nalgebra::Matrix2;

use super::{PlanarMap, Point};

/// `(x, y) -> (lambda x, sigma y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearSaddle {
    pub lambda: f64,
    pub sigma: f64,
}

impl PlanarMap for LinearSaddle {
    fn name(&self) -> String {
        "linear saddle".into()
    }
    fn params(&self) -> Vec<(String, f64)> {
        vec![("lambda".into(), self.lambda), ("sigma".into(), self.sigma)]
    }
    fn forward(&self, p: Point) -> Point {
        Point::new(self.lambda * p.x, self.sigma * p.y)
    }
    fn inverse(&self, p: Point) -> Option<Point> {
        Some(Point::new(p.x / self.lambda, p.y / self.sigma))
    }
    fn has_inverse(&self) -> bool {
        true
    }
    fn jacobian(&self, _p: Point) -> Matrix2<f64> {
        Matrix2::new(self.lambda, 0.0, 0.0, self.sigma)
    }
}

/// Cubic Hénon-like map `(x, y) -> (b y, -y^3 + a y + x)` with constant
/// Jacobian determinant `-b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicHenon {
    pub a: f64,
    pub b: f64,
}

impl CubicHenon {
    /// The strange-attractor parameters `(a, b) = (2.8, 0.1)`.
    pub fn attractor() -> Self {
        CubicHenon { a: 2.8, b: 0.1 }
    }

    /// Fixed points: the origin and, when `a + b > 1`, the pair
    /// `±(b s, s)` with `s^2 = a + b - 1`.
    pub fn fixed_points(&self) -> Vec<Point> {
        let mut pts = vec![Point::zeros()];
        let s2 = self.a + self.b - 1.0;
        if s2 > 0.0 {
            let s = s2.sqrt();
            pts.insert(0, Point::new(-self.b * s, -s));
            pts.push(Point::new(self.b * s, s));
        }
        pts
    }

    /// Coefficients `(p, q)` of the characteristic polynomial
    /// `l^2 + p l + q` of the Jacobian at `pt`.
    pub fn characteristic(&self, pt: Point) -> (f64, f64) {
        let tr = self.a - 3.0 * pt.y * pt.y;
        (-tr, -self.b)
    }
}

impl PlanarMap for CubicHenon {
    fn name(&self) -> String {
        "cubic Henon".into()
    }
    fn params(&self) -> Vec<(String, f64)> {
        vec![("a".into(), self.a), ("b".into(), self.b)]
    }
    fn forward(&self, p: Point) -> Point {
        Point::new(self.b * p.y, -p.y * p.y * p.y + self.a * p.y + p.x)
    }
    fn inverse(&self, p: Point) -> Option<Point> {
        let y = p.x / self.b;
        Some(Point::new(p.y + y * y * y - self.a * y, y))
    }
    fn has_inverse(&self) -> bool {
        self.b != 0.0
    }
    fn jacobian(&self, p: Point) -> Matrix2<f64> {
        Matrix2::new(0.0, self.b, 1.0, self.a - 3.0 * p.y * p.y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cubic_henon_fixed_points() {
        let f = CubicHenon::attractor();
        let pts = f.fixed_points();
        assert_eq!(pts.len(), 3);
        let s = 1.9f64.sqrt();
        assert_relative_eq!(pts[2].y, s, epsilon = 1e-15);
        assert_relative_eq!(pts[2].x, 0.1 * s, epsilon = 1e-15);
        for p in pts {
            assert!((f.forward(p) - p).norm() < 1e-14);
        }
        assert_eq!(f.characteristic(Point::zeros()), (-2.8, -0.1));
        let (p, q) = f.characteristic(Point::new(0.1 * s, s));
        assert_relative_eq!(p, 2.9, epsilon = 1e-14);
        assert_eq!(q, -0.1);
    }

    #[test]
    fn cubic_henon_inverse_and_determinant() {
        let f = CubicHenon::attractor();
        let p = Point::new(0.13, -0.7);
        assert!((f.inverse(f.forward(p)).unwrap() - p).norm() < 1e-14);
        assert_relative_eq!(f.jacobian(p).determinant(), -0.1, epsilon = 1e-15);
    }
}

use nalgebra::Matrix2;
use serde::Serialize;

use super::WangYoungError;
use crate::planar::{PlanarMap, Point};
use crate::renorm::{conjugate_to_standard, ConjugatedMap, ModelParams, RenormalizedMap};

/// Choice of the perturbation `(u, v)` in
/// `T(x, y) = (beta u, -y^3 + mu_bar y + x + beta v)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TSelector {
    /// `(u, v) = (y, 0)`: the cubic Hénon-like family `(beta y, -y^3 + mu y + x)`.
    Fig02,
    /// `u = v = 0`: the limit endomorphism.
    Zero,
    /// The renormalized model at `beta = xi^n` and `nu_bar = s xi^n`, put in
    /// standard form. Only defined at that `beta`.
    Renormalized { params: ModelParams, n: u32, s: f64 },
}

#[derive(Debug, Clone)]
pub struct TFamily {
    pub selector: TSelector,
    pub mu_bar: f64,
    pub beta: f64,
    renormalized: Option<ConjugatedMap<RenormalizedMap>>,
}

pub fn make_t_family(selector: TSelector, mu_bar: f64, beta: f64) -> Result<TFamily, WangYoungError> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(WangYoungError::Invalid(format!("beta = {beta} outside [0, 1]")));
    }
    let renormalized = match selector {
        TSelector::Renormalized { params, n, s } => {
            if !(1.0..=2.0).contains(&s) {
                return Err(WangYoungError::Invalid(format!("s = {s} outside [1, 2]")));
            }
            let xi_n = params.xi().powi(n as i32);
            if (beta - xi_n).abs() > 1e-12 * xi_n {
                return Err(WangYoungError::Invalid(format!("renormalized family needs beta = xi^n = {xi_n}")));
            }
            let nu_bar = s * xi_n;
            let map = RenormalizedMap::new(params, n, mu_bar, nu_bar).map_err(|e| WangYoungError::Invalid(e.to_string()))?;
            Some(conjugate_to_standard(map, mu_bar, nu_bar))
        }
        _ => None,
    };
    Ok(TFamily { selector, mu_bar, beta, renormalized })
}

impl TFamily {
    pub fn fig02(mu_bar: f64, beta: f64) -> Result<Self, WangYoungError> {
        make_t_family(TSelector::Fig02, mu_bar, beta)
    }

    pub fn renormalized(params: ModelParams, n: u32, s: f64, mu_bar: f64) -> Result<Self, WangYoungError> {
        make_t_family(TSelector::Renormalized { params, n, s }, mu_bar, params.xi().powi(n as i32))
    }

    fn core(&self, p: Point) -> f64 {
        -p.y * p.y * p.y + self.mu_bar * p.y + p.x
    }

    /// `(u, v)` at `p`.
    pub fn perturbation(&self, p: Point) -> (f64, f64) {
        match self.selector {
            TSelector::Fig02 => (p.y, 0.0),
            TSelector::Zero => (0.0, 0.0),
            TSelector::Renormalized { .. } => {
                let img = self.forward(p);
                (img.x / self.beta, (img.y - self.core(p)) / self.beta)
            }
        }
    }
}

impl PlanarMap for TFamily {
    fn name(&self) -> String {
        match self.selector {
            TSelector::Fig02 => "T (u = y, v = 0)".into(),
            TSelector::Zero => "T (u = v = 0)".into(),
            TSelector::Renormalized { n, s, .. } => format!("T (renormalized, n = {n}, s = {s})"),
        }
    }
    fn params(&self) -> Vec<(String, f64)> {
        let mut v = vec![("mu_bar".into(), self.mu_bar), ("beta".into(), self.beta)];
        if let TSelector::Renormalized { n, s, .. } = self.selector {
            v.push(("n".into(), n as f64));
            v.push(("s".into(), s));
        }
        v
    }
    fn forward(&self, p: Point) -> Point {
        match (&self.renormalized, self.selector) {
            (Some(m), _) => m.forward(p),
            (None, TSelector::Fig02) => Point::new(self.beta * p.y, self.core(p)),
            _ => Point::new(0.0, self.core(p)),
        }
    }
    fn inverse(&self, p: Point) -> Option<Point> {
        match (&self.renormalized, self.selector) {
            (Some(m), _) => m.inverse(p),
            (None, TSelector::Fig02) if self.beta != 0.0 => {
                let y = p.x / self.beta;
                Some(Point::new(p.y + y * y * y - self.mu_bar * y, y))
            }
            _ => None,
        }
    }
    fn has_inverse(&self) -> bool {
        match self.selector {
            TSelector::Fig02 => self.beta != 0.0,
            TSelector::Zero => false,
            TSelector::Renormalized { .. } => self.renormalized.as_ref().is_some_and(|m| m.has_inverse()),
        }
    }
    fn jacobian(&self, p: Point) -> Matrix2<f64> {
        let dy = self.mu_bar - 3.0 * p.y * p.y;
        match self.selector {
            TSelector::Fig02 => Matrix2::new(0.0, self.beta, 1.0, dy),
            TSelector::Zero => Matrix2::new(0.0, 0.0, 1.0, dy),
            TSelector::Renormalized { .. } => crate::planar::finite_difference_jacobian(|q| self.forward(q), p, 1e-6),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planar::CubicHenon;

    #[test]
    fn fig02_instance_is_the_cubic_henon_map() {
        let t = TFamily::fig02(2.8, 0.1).unwrap();
        let h = CubicHenon::attractor();
        for &(x, y) in &[(0.1, 0.2), (-0.3, 1.4), (0.05, -1.1)] {
            let p = Point::new(x, y);
            assert_eq!(t.forward(p), h.forward(p));
            let back = t.inverse(t.forward(p)).unwrap();
            assert!((back - p).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_beta_limit() {
        let t = make_t_family(TSelector::Fig02, 2.9, 0.0).unwrap();
        let img = t.forward(Point::new(0.3, 1.2));
        assert_eq!(img.x, 0.0);
        assert!((img.y - (-1.728 + 2.9 * 1.2 + 0.3)).abs() < 1e-12);
        assert!(!t.has_inverse());
    }

    #[test]
    fn renormalized_instance_requires_matching_beta() {
        let params = ModelParams::default();
        assert!(make_t_family(TSelector::Renormalized { params, n: 6, s: 1.5 }, 2.9, 0.3).is_err());
        assert!(make_t_family(TSelector::Renormalized { params, n: 6, s: 2.5 }, 2.9, params.xi().powi(6)).is_err());
        assert!(TFamily::renormalized(params, 6, 1.5, 2.9).is_ok());
    }
}

use num_traits::Num;
use serde::{Deserialize, Serialize};

use super::{MapError, NMap};

/// `F(y) = -y^3 + mu_bar * y + nu_bar`, generic over the scalar so the same
/// type serves floating and exact-rational evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubicMap1D<T> {
    pub mu_bar: T,
    pub nu_bar: T,
}

impl<T: Num + Clone> CubicMap1D<T> {
    pub fn new(mu_bar: T, nu_bar: T) -> Self {
        CubicMap1D { mu_bar, nu_bar }
    }

    pub fn eval(&self, y: &T) -> T {
        let y3 = y.clone() * y.clone() * y.clone();
        T::zero() - y3 + self.mu_bar.clone() * y.clone() + self.nu_bar.clone()
    }

    /// Derivative of the given order; orders above 3 are identically zero.
    pub fn derivative(&self, y: &T, order: u8) -> T {
        let three = T::one() + T::one() + T::one();
        match order {
            0 => self.eval(y),
            1 => self.mu_bar.clone() - three * y.clone() * y.clone(),
            2 => T::zero() - (three.clone() + three) * y.clone(),
            3 => T::zero() - (three.clone() + three),
            _ => T::zero(),
        }
    }
}

impl CubicMap1D<f64> {
    pub fn derivative_f64(&self, y: f64, order: u8) -> f64 {
        self.derivative(&y, order)
    }
}

/// `order`-th derivative of `F` at `y`; `order` must be at most 3.
pub fn cubic_eval<T: Num + Clone>(map: &CubicMap1D<T>, y: &T, order: u8) -> T {
    debug_assert!(order <= 3, "cubic_eval supports orders 0..=3");
    map.derivative(y, order)
}

/// Critical pair `(-sqrt(mu_bar/3), sqrt(mu_bar/3))`.
pub fn critical_points(map: &CubicMap1D<f64>) -> Result<(f64, f64), MapError> {
    if map.mu_bar <= 0.0 || map.mu_bar.is_nan() {
        return Err(MapError::NoRealCriticalPoints { mu_bar: map.mu_bar });
    }
    let c = (map.mu_bar / 3.0).sqrt();
    Ok((-c, c))
}

/// Schwarzian derivative `F'''/F' - (3/2)(F''/F')^2` from the derivatives.
pub fn schwarzian(map: &CubicMap1D<f64>, y: f64) -> Result<f64, MapError> {
    let d1 = map.derivative(&y, 1);
    if d1 == 0.0 {
        return Err(MapError::SingularSchwarzian { y });
    }
    let d2 = map.derivative(&y, 2);
    let d3 = map.derivative(&y, 3);
    let r = d2 / d1;
    Ok(d3 / d1 - 1.5 * r * r)
}

/// Closed form `-6 (6y^2 + mu_bar) / (-3y^2 + mu_bar)^2`. Negative wherever
/// it is defined, for every real `mu_bar` and `y`.
pub fn schwarzian_closed_form(mu_bar: f64, y: f64) -> Result<f64, MapError> {
    let d1 = mu_bar - 3.0 * y * y;
    if d1 == 0.0 {
        return Err(MapError::SingularSchwarzian { y });
    }
    Ok(-6.0 * (6.0 * y * y + mu_bar) / (d1 * d1))
}

/// `h(x) = 2 sin(pi x / 3)`.
pub fn conjugacy_h(x: f64) -> f64 {
    2.0 * (std::f64::consts::PI * x / 3.0).sin()
}

pub fn conjugacy_h_derivative(x: f64) -> f64 {
    let k = std::f64::consts::PI / 3.0;
    2.0 * k * (k * x).cos()
}

/// `|h(S(x)) - F_{3,0}(h(x))|`.
pub fn conjugacy_defect(x: f64) -> Result<f64, MapError> {
    let s = NMap::new().eval(x)?;
    let f = CubicMap1D::new(3.0, 0.0);
    Ok((conjugacy_h(s) - f.eval(&conjugacy_h(x))).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, q};
    use approx::assert_relative_eq;

    #[test]
    fn cubic_examples() {
        let f = CubicMap1D::new(3.0, 0.0);
        assert_eq!(cubic_eval(&f, &2.0, 0), -2.0);
        assert_eq!(cubic_eval(&f, &0.0, 0), 0.0);
        let r2 = 2f64.sqrt();
        assert_relative_eq!(cubic_eval(&f, &r2, 0), r2, epsilon = 1e-15);
    }

    #[test]
    fn exact_mode_matches_formula() {
        let f = CubicMap1D::new(q(27, 4), q(-1, 3));
        let y = q(5, 7);
        let expected = -(y.clone() * y.clone() * y.clone()) + q(27, 4) * y.clone() - q(1, 3);
        assert_eq!(f.eval(&y), expected);
        assert_eq!(f.derivative(&y, 1), q(27, 4) - int(3) * y.clone() * y.clone());
        assert_eq!(f.derivative(&y, 3), int(-6));
    }

    #[test]
    fn critical_point_examples() {
        assert_eq!(critical_points(&CubicMap1D::new(3.0, 0.0)).unwrap(), (-1.0, 1.0));
        assert_eq!(critical_points(&CubicMap1D::new(6.75, 0.0)).unwrap(), (-1.5, 1.5));
        let f = CubicMap1D::new(2.9588, 0.0);
        let (_, c) = critical_points(&f).unwrap();
        assert_relative_eq!(c, 0.993_111, epsilon = 1e-5);
        assert!(f.derivative(&c, 1).abs() < 1e-14);
        assert!(matches!(
            critical_points(&CubicMap1D::new(0.0, 1.0)),
            Err(MapError::NoRealCriticalPoints { .. })
        ));
    }

    #[test]
    fn schwarzian_examples() {
        let f = CubicMap1D::new(3.0, 0.0);
        // F' = 3, F'' = 0 and F''' = -6 at the origin.
        assert_relative_eq!(schwarzian(&f, 0.0).unwrap(), -2.0, epsilon = 1e-15);
        // F' = -9, F'' = -12 and F''' = -6 at y = 2: 2/3 - (3/2)(16/9) = -2.
        assert_relative_eq!(schwarzian(&f, 2.0).unwrap(), -2.0, epsilon = 1e-15);
        assert_relative_eq!(schwarzian_closed_form(3.0, 0.0).unwrap(), -2.0, epsilon = 1e-15);
        assert_relative_eq!(schwarzian_closed_form(3.0, 2.0).unwrap(), -2.0, epsilon = 1e-15);
        assert!(matches!(schwarzian(&f, 1.0), Err(MapError::SingularSchwarzian { .. })));
        assert!(schwarzian_closed_form(3.0, -1.0).is_err());
    }

    #[test]
    fn conjugacy_examples() {
        for x in [0.5, 0.0, 1.0] {
            assert!(conjugacy_defect(x).unwrap() < 1e-14, "x = {x}");
        }
        assert!(conjugacy_defect(1.6).is_err());
    }
}

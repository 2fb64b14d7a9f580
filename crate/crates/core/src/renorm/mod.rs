//! Renormalization of a model saddle family near a cubic tangency.
//!
//! The model family is linear near the saddle, `(x, y) -> (lambda x, sigma y)`,
//! and its transition map near the tangency is
//! `(1 + a(y-1) + H1, -b(y-1)^3 + mu(y-1) + nu + c x + H2)`.
//! After the coordinate change `Phi_n` and reparametrization `Theta_n`, the
//! return map `Phi_n^-1 o N o L^n o Phi_n` converges to the cubic
//! endomorphism `(x, y) -> (y, -y^3 + mu_bar y + nu_bar)`.

mod maps;
mod residual;

use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

pub use maps::{conjugate_to_standard, standard_form, standard_form_inverse, ConjugatedMap, LimitEndomorphism, RenormalizedMap};
pub use residual::{
    decay_fit, residual_norm, residual_norm_with, write_residual_csv, DecayFit, ResidualNorm, ResidualRow,
    SIGMA_BAR,
};

use crate::planar::Point;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RenormError {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),
    #[error("n must be at least {min}, got {n}")]
    InvalidN { n: u32, min: u32 },
    #[error("point left the linearization box at linear step {step}: ({x}, {y})")]
    EscapedBox { step: u32, x: f64, y: f64 },
    #[error("the transition map is not invertible when c = 0")]
    NotInvertible,
    #[error("fit needs at least two positive residuals")]
    DegenerateFit,
    #[error("csv output failed: {0}")]
    Csv(String),
}

/// Higher-order terms of the transition map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Perturbation {
    /// `H1 = H2 = 0`.
    #[default]
    None,
    /// `H1 = 0`, `H2 = epsilon (y-1)^4`.
    Quartic { epsilon: f64 },
}

impl Perturbation {
    /// Coefficients of `H2` as a polynomial in `t = y - 1`.
    pub fn h2_coefficients(&self) -> [f64; 5] {
        match *self {
            Perturbation::None => [0.0; 5],
            Perturbation::Quartic { epsilon } => [0.0, 0.0, 0.0, 0.0, epsilon],
        }
    }

    /// `d^k H2 / dt^k` at `t = 0` for `k = 0..=3`; all must vanish for the
    /// tangency to stay cubic.
    pub fn h2_jet_at_tangency(&self) -> [f64; 4] {
        let c = self.h2_coefficients();
        [c[0], c[1], 2.0 * c[2], 6.0 * c[3]]
    }
}

/// Parameters of the model saddle family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub lambda: f64,
    pub sigma: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    #[serde(default)]
    pub perturbation: Perturbation,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams { lambda: 0.2, sigma: 2.0, a: 1.0, b: 1.0, c: 1.0, perturbation: Perturbation::None }
    }
}

impl ModelParams {
    pub fn with_perturbation(mut self, perturbation: Perturbation) -> Self {
        self.perturbation = perturbation;
        self
    }

    /// Checks `0 < lambda < 1 < sigma`, `lambda sigma < 1`, `a != 0`, `b > 0`
    /// and that `H2` has a vanishing 3-jet at the tangency.
    pub fn validate(&self) -> Result<(), RenormError> {
        let bad = |m: &str| Err(RenormError::InvalidParams(m.into()));
        let finite = [self.lambda, self.sigma, self.a, self.b, self.c].iter().all(|v| v.is_finite());
        if !finite {
            return bad("parameters must be finite");
        }
        if !(0.0 < self.lambda && self.lambda < 1.0 && 1.0 < self.sigma) {
            return bad("need 0 < lambda < 1 < sigma");
        }
        if self.lambda * self.sigma >= 1.0 {
            return bad("need lambda * sigma < 1");
        }
        if self.a == 0.0 {
            return bad("need a != 0");
        }
        if self.b <= 0.0 {
            return bad("need b > 0");
        }
        if self.perturbation.h2_jet_at_tangency().iter().any(|&d| d != 0.0) {
            return bad("H2 must vanish to third order at the tangency");
        }
        Ok(())
    }

    pub fn g(&self) -> f64 {
        self.b.sqrt()
    }

    /// `max(sigma^{-1/2}, lambda sigma)`.
    pub fn xi(&self) -> f64 {
        self.sigma.powf(-0.5).max(self.lambda * self.sigma)
    }

    /// `a c (lambda sigma)^n`, the coupling of the renormalized map.
    pub fn coupling(&self, n: u32) -> f64 {
        self.a * self.c * (self.lambda * self.sigma).powi(n as i32)
    }
}

fn sigma_pow_half(p: &ModelParams, n: u32) -> f64 {
    p.sigma.sqrt().powi(n as i32)
}

/// `Phi_n(x_bar, y_bar) = (1 + a g^-1 sigma^{-n/2} x_bar, sigma^-n + g^-1 sigma^{-3n/2} y_bar)`.
pub fn phi_n(p: &ModelParams, n: u32, pt: Point) -> Point {
    let g = p.g();
    let sh = sigma_pow_half(p, n);
    let sn = p.sigma.powi(n as i32);
    Point::new(1.0 + p.a / g / sh * pt.x, 1.0 / sn + pt.y / (g * sn * sh))
}

pub fn phi_n_inverse(p: &ModelParams, n: u32, pt: Point) -> Point {
    let g = p.g();
    let sh = sigma_pow_half(p, n);
    let sn = p.sigma.powi(n as i32);
    Point::new((pt.x - 1.0) * g * sh / p.a, (pt.y - 1.0 / sn) * g * sn * sh)
}

/// `Theta_n(mu_bar, nu_bar) = (sigma^-n mu_bar, g^-1 sigma^{-3n/2} nu_bar - c lambda^n + sigma^-n)`.
pub fn theta_n(p: &ModelParams, n: u32, mu_bar: f64, nu_bar: f64) -> (f64, f64) {
    let g = p.g();
    let sh = sigma_pow_half(p, n);
    let sn = p.sigma.powi(n as i32);
    let mu = mu_bar / sn;
    let nu = nu_bar / (g * sn * sh) - p.c * p.lambda.powi(n as i32) + 1.0 / sn;
    (mu, nu)
}

/// `(mu_bar, nu_bar) = (sigma^n mu, g sigma^{n/2} (sigma^n nu + c (lambda sigma)^n - 1))`.
pub fn theta_n_inverse(p: &ModelParams, n: u32, mu: f64, nu: f64) -> (f64, f64) {
    let g = p.g();
    let sh = sigma_pow_half(p, n);
    let sn = p.sigma.powi(n as i32);
    let mu_bar = sn * mu;
    let nu_bar = g * sh * (sn * nu + p.c * (p.lambda * p.sigma).powi(n as i32) - 1.0);
    (mu_bar, nu_bar)
}

/// [`theta_n`] in double-double arithmetic. The `nu_bar` contribution to `nu`
/// is of size `sigma^{-3n/2}` against terms of size `sigma^-n`, so binary64
/// output loses it for large `n`.
pub fn theta_n_dd(p: &ModelParams, n: u32, mu_bar: f64, nu_bar: f64) -> (TwoFloat, TwoFloat) {
    let sigma = TwoFloat::from(p.sigma);
    let g = TwoFloat::from(p.b).sqrt();
    let sh = sigma.sqrt().powi(n as i32);
    let sn = sigma.powi(n as i32);
    let mu = TwoFloat::from(mu_bar) / sn;
    let nu = TwoFloat::from(nu_bar) / (g * sn * sh) - TwoFloat::from(p.c) * TwoFloat::from(p.lambda).powi(n as i32)
        + TwoFloat::from(1.0) / sn;
    (mu, nu)
}

pub fn theta_n_inverse_dd(p: &ModelParams, n: u32, mu: TwoFloat, nu: TwoFloat) -> (f64, f64) {
    let sigma = TwoFloat::from(p.sigma);
    let g = TwoFloat::from(p.b).sqrt();
    let sh = sigma.sqrt().powi(n as i32);
    let sn = sigma.powi(n as i32);
    let ls = (TwoFloat::from(p.lambda) * sigma).powi(n as i32);
    let nu_bar = g * sh * (sn * nu + TwoFloat::from(p.c) * ls - TwoFloat::from(1.0));
    ((sn * mu).into(), nu_bar.into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn default_model_is_valid() {
        let p = ModelParams::default();
        p.validate().unwrap();
        assert_relative_eq!(p.xi(), 0.5f64.sqrt(), epsilon = 1e-15);
        assert!(p.with_perturbation(Perturbation::Quartic { epsilon: 1.0 }).validate().is_ok());
        let bad = ModelParams { lambda: 0.6, ..p };
        assert!(bad.validate().is_err());
        let bad = ModelParams { a: 0.0, ..p };
        assert!(bad.validate().is_err());
        let bad = ModelParams { b: -1.0, ..p };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn quartic_jet_vanishes() {
        assert_eq!(Perturbation::Quartic { epsilon: 0.7 }.h2_jet_at_tangency(), [0.0; 4]);
    }

    #[test]
    fn phi_examples() {
        let p = ModelParams::default();
        let o = phi_n(&p, 7, Point::zeros());
        assert_eq!(o, Point::new(1.0, 2f64.powi(-7)));
        let q = phi_n(&p, 0, Point::new(0.3, -0.4));
        assert_relative_eq!(q.x, 1.3, epsilon = 1e-15);
        assert_relative_eq!(q.y, 0.6, epsilon = 1e-15);
        let r = phi_n(&p, 4, Point::new(2.0, -1.0));
        assert_eq!(r, Point::new(1.5, 0.046875));
        let back = phi_n_inverse(&p, 4, r);
        assert_relative_eq!(back.x, 2.0, epsilon = 1e-14);
        assert_relative_eq!(back.y, -1.0, epsilon = 1e-12);
    }

    #[test]
    fn theta_examples() {
        let p = ModelParams::default();
        let (mu, nu) = theta_n(&p, 5, 0.0, 0.0);
        assert_eq!(mu, 0.0);
        assert_relative_eq!(nu, 2f64.powi(-5) - 0.2f64.powi(5), epsilon = 1e-17);
        let (mu, nu) = theta_n(&p, 3, 3.0, 0.0);
        assert_relative_eq!(mu, 0.375, epsilon = 1e-16);
        assert_relative_eq!(nu, 0.117, epsilon = 1e-15);
        let (mu, nu) = theta_n(&p, 40, 4.0, 1.0);
        assert!(mu.abs() < 1e-11 && nu.abs() < 1e-11);
    }
}

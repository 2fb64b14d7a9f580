//! Hypotheses of the Wang-Young theorem for the odd cubic
//! `F(y) = -y^3 + mu y` and the cubic Hénon-like family `T`.
//!
//! At the Misiurewicz parameter `mu*` the positive critical point `c`
//! follows `c -> F(c) -> -sqrt(mu*) -> 0`, and `0` is fixed.

mod certificate;
mod family;

pub use certificate::{
    certify, misiurewicz_check, nondegeneracy_check, transversality_check, transversality_h, Check,
    MisiurewiczCertificate, NondegeneracyReport, TransversalityReport, WangYoungCertificate,
};
pub use family::{make_t_family, TFamily, TSelector};

use serde::Serialize;

use crate::maps1d::CubicMap1D;
use crate::Interval;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WangYoungError {
    #[error("bracket [{lo}, {hi}] has g values {g_lo}, {g_hi} of equal sign")]
    BracketSign { lo: f64, hi: f64, g_lo: f64, g_hi: f64 },
    #[error("ordering relation violated: {0}")]
    Ordering(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

/// Left end of the parameter bracket, `3 sqrt(3) / 2`.
pub fn mu_lower() -> f64 {
    1.5 * 3f64.sqrt()
}

pub fn odd_cubic(mu: f64) -> CubicMap1D<f64> {
    CubicMap1D::new(mu, 0.0)
}

/// Positive critical point `sqrt(mu / 3)`.
pub fn critical_point(mu: f64) -> f64 {
    (mu / 3.0).sqrt()
}

/// `g(mu) = F^2_mu(c(mu)) + sqrt(mu)`.
pub fn misiurewicz_defect(mu: f64) -> f64 {
    let f = odd_cubic(mu);
    f.eval(&f.eval(&critical_point(mu))) + mu.sqrt()
}

/// Root of [`misiurewicz_defect`] in `(3 sqrt(3)/2, 3)`, bisected to width
/// `tol` after checking the endpoint signs.
pub fn find_mu_star(tol: f64) -> Result<f64, WangYoungError> {
    if !(tol > 0.0) {
        return Err(WangYoungError::Invalid("tolerance must be positive".into()));
    }
    let (mut lo, mut hi) = (mu_lower(), 3.0);
    let (g_lo, g_hi) = (misiurewicz_defect(lo), misiurewicz_defect(hi));
    if !(g_lo > 0.0 && g_hi < 0.0) {
        return Err(WangYoungError::BracketSign { lo, hi, g_lo, g_hi });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if misiurewicz_defect(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The invariant interval `I = [-r, r]` of `F_{mu*}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InvariantInterval {
    pub mu_star: f64,
    pub interval: Interval<f64>,
    pub r: f64,
    /// `F(r') = e` with `r' < -c`.
    pub r_prime: f64,
    /// Repelling fixed point `e = sqrt(mu* - 1)`.
    pub e: f64,
    /// `-r < F(-c) < F(r) < -c < c < F(-r) < F(c) < r`.
    pub chain: [f64; 8],
}

pub const CHAIN_LABELS: [&str; 8] = ["-r", "F(-c)", "F(r)", "-c", "c", "F(-r)", "F(c)", "r"];

fn bisect_decreasing(f: &CubicMap1D<f64>, target: f64, mut lo: f64, mut hi: f64) -> f64 {
    // f is decreasing on [lo, hi] and crosses `target` there.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f.eval(&mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn build_interval(mu_star: f64) -> Result<InvariantInterval, WangYoungError> {
    if !(mu_star > 1.0 && mu_star <= 3.0) {
        return Err(WangYoungError::Invalid(format!("mu* = {mu_star} outside (1, 3]")));
    }
    let f = odd_cubic(mu_star);
    let c = critical_point(mu_star);
    let e = (mu_star - 1.0).sqrt();
    let far = 4.0;
    if !(f.eval(&-far) > e && f.eval(&-c) < e) {
        return Err(WangYoungError::Ordering("F(r') = e has no root on (-4, -c)".into()));
    }
    let r_prime = bisect_decreasing(&f, e, -far, -c);
    let p = f.eval(&c);
    if !(f.eval(&p) > r_prime && f.eval(&far) < r_prime) {
        return Err(WangYoungError::Ordering("F(r) = r' has no root on (F(c), 4)".into()));
    }
    let r = bisect_decreasing(&f, r_prime, p, far);
    let chain = [-r, f.eval(&-c), f.eval(&r), -c, c, f.eval(&-r), p, r];
    for (i, w) in chain.windows(2).enumerate() {
        if !(w[0] < w[1]) {
            return Err(WangYoungError::Ordering(format!(
                "{} = {} is not below {} = {}",
                CHAIN_LABELS[i],
                w[0],
                CHAIN_LABELS[i + 1],
                w[1]
            )));
        }
    }
    Ok(InvariantInterval { mu_star, interval: Interval { lo: -r, hi: r }, r, r_prime, e, chain })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bracket_values() {
        assert!((misiurewicz_defect(3.0) - (3f64.sqrt() - 2.0)).abs() < 1e-15);
        let expected = 3f64.powf(0.75) / 2f64.sqrt();
        assert!((misiurewicz_defect(mu_lower()) - expected).abs() < 1e-12);
    }

    #[test]
    fn mu_star_is_misiurewicz() {
        let mu = find_mu_star(1e-14).unwrap();
        assert!((mu - 2.958621655489772).abs() < 1e-12, "{mu}");
        let f = odd_cubic(mu);
        let f3 = f.eval(&f.eval(&f.eval(&critical_point(mu))));
        assert!(f3.abs() < 1e-9);
        assert!(f.eval(&-mu.sqrt()).abs() < 1e-13);
        assert_eq!(f.eval(&0.0), 0.0);
    }

    #[test]
    fn interval_endpoints() {
        let mu = find_mu_star(1e-14).unwrap();
        let iv = build_interval(mu).unwrap();
        let f = odd_cubic(mu);
        assert!((f.eval(&f.eval(&iv.r)) - iv.e).abs() < 1e-12);
        assert!((f.eval(&iv.e) - iv.e).abs() < 1e-12);
        assert!((iv.r - 1.9818094304567793).abs() < 1e-12);
        assert!((iv.r_prime + 1.9202682291982927).abs() < 1e-12);
        assert_eq!(f.eval(&-iv.r), -f.eval(&iv.r));
    }

    #[test]
    fn bad_parameter_is_rejected() {
        assert!(matches!(build_interval(0.5), Err(WangYoungError::Invalid(_))));
    }
}

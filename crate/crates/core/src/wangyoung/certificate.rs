use std::collections::BTreeMap;

use serde::Serialize;

use super::{build_interval, critical_point, find_mu_star, mu_lower, odd_cubic, InvariantInterval, WangYoungError};
use crate::maps1d::{find_periodic, schwarzian, schwarzian_closed_form, MapFamily1D};

/// Outcome of one named condition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub passed: bool,
    /// The witness quantity the verdict is based on.
    pub value: f64,
    pub requirement: &'static str,
    pub detail: String,
}

impl Check {
    fn new(passed: bool, value: f64, requirement: &'static str, detail: impl Into<String>) -> Self {
        Check { passed, value, requirement, detail: detail.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MisiurewiczCertificate {
    pub mu_star: f64,
    pub interval: InvariantInterval,
    /// `c, F(c), F^2(c), F^3(c)`.
    pub critical_orbit: Vec<f64>,
    pub max_period: usize,
    /// Minimal-period orbit counts, indexed by period.
    pub orbit_counts: BTreeMap<usize, usize>,
    pub checks: BTreeMap<String, Check>,
    pub passed: bool,
}

pub const SCHWARZIAN_SAMPLES: usize = 1000;

/// Multiplier margin demanded of every periodic orbit.
pub const REPELLING_MARGIN: f64 = 1e-6;

pub fn misiurewicz_check(
    mu_star: f64,
    interval: &InvariantInterval,
    max_period: usize,
) -> Result<MisiurewiczCertificate, WangYoungError> {
    if max_period == 0 {
        return Err(WangYoungError::Invalid("max_period must be at least 1".into()));
    }
    let f = odd_cubic(mu_star);
    let c = critical_point(mu_star);
    let (lo, hi) = (interval.interval.lo, interval.interval.hi);
    let mut checks = BTreeMap::new();

    let f2 = f.derivative(&c, 2).abs().min(f.derivative(&-c, 2).abs());
    checks.insert(
        "critical_nondegenerate".into(),
        Check::new(f2 > 0.0, f2, "> 0", "min |F''| over the two critical points"),
    );

    let samples: Vec<f64> = (0..SCHWARZIAN_SAMPLES)
        .map(|i| lo + (hi - lo) * (i as f64 + 0.5) / SCHWARZIAN_SAMPLES as f64)
        .filter(|y| (y.abs() - c).abs() > 1e-9)
        .collect();
    let mut worst = f64::NEG_INFINITY;
    let mut worst_closed = f64::NEG_INFINITY;
    for &y in &samples {
        let s = schwarzian(&f, y).map_err(|e| WangYoungError::Invalid(e.to_string()))?;
        let sc = schwarzian_closed_form(mu_star, y).map_err(|e| WangYoungError::Invalid(e.to_string()))?;
        worst = worst.max(s);
        worst_closed = worst_closed.max(sc);
    }
    checks.insert(
        "negative_schwarzian".into(),
        Check::new(
            worst < 0.0 && worst_closed < 0.0,
            worst,
            "< 0",
            format!("max over {} samples; closed form max {worst_closed}", samples.len()),
        ),
    );

    let image_max = f.eval(&c).max(f.eval(&-hi).abs()).max(f.eval(&hi).abs());
    checks.insert(
        "interval_invariant".into(),
        Check::new(image_max < hi, hi - image_max, "> 0", "r - max(F(c), |F(r)|)"),
    );

    let map = MapFamily1D::cubic(mu_star, 0.0);
    let mut orbit_counts = BTreeMap::new();
    let mut min_mult = f64::INFINITY;
    let mut witness = String::new();
    let mut unresolved = 0;
    for period in 1..=max_period {
        let search = find_periodic(&map, period, interval.interval, 1e-12)
            .map_err(|e| WangYoungError::Invalid(e.to_string()))?;
        unresolved += search.unresolved.len();
        orbit_counts.insert(period, search.orbits.len());
        for orbit in &search.orbits {
            if orbit.multiplier.abs() < min_mult {
                min_mult = orbit.multiplier.abs();
                witness = format!("period {period} orbit through {}", orbit.points[0]);
            }
        }
    }
    checks.insert(
        "periodic_repelling".into(),
        Check::new(
            min_mult >= 1.0 + REPELLING_MARGIN && unresolved == 0,
            min_mult,
            ">= 1 + 1e-6",
            format!("smallest |multiplier| at {witness}; {unresolved} unresolved brackets"),
        ),
    );

    let mut critical_orbit = vec![c];
    for _ in 0..3 {
        let last = *critical_orbit.last().unwrap();
        critical_orbit.push(f.eval(&last));
    }
    let closure = critical_orbit[3].abs();
    // F(-sqrt(mu)) vanishes identically; allow for the rounding of the square root.
    let fixed = f.eval(&0.0) == 0.0 && f.eval(&-mu_star.sqrt()).abs() < 1e-13;
    // Post-critical points: F(c), -sqrt(mu*) and the fixed point 0.
    let post = [critical_orbit[1], -mu_star.sqrt(), 0.0];
    let dist = post.iter().map(|y| (y.abs() - c).abs()).fold(f64::INFINITY, f64::min);
    checks.insert(
        "critical_orbit_finite".into(),
        Check::new(
            closure < 1e-9 && fixed && dist > 0.0,
            dist,
            "> 0",
            format!("distance of the post-critical set to the critical points; |F^3(c)| = {closure:e}"),
        ),
    );

    let passed = checks.values().all(|c| c.passed);
    Ok(MisiurewiczCertificate {
        mu_star,
        interval: *interval,
        critical_orbit,
        max_period,
        orbit_counts,
        checks,
        passed,
    })
}

/// `h(t) = (4 sqrt(3) t^2 + 9) / (2 t sqrt(t) (4 t^2 - 9))`: the closed form
/// of `dp/dmu` with `p = F_t(c(t))` substituted.
pub fn transversality_h(t: f64) -> f64 {
    (4.0 * 3f64.sqrt() * t * t + 9.0) / (2.0 * t * t.sqrt() * (4.0 * t * t - 9.0))
}

fn dp_dmu_closed(mu: f64, p: f64) -> f64 {
    (2.0 * p + 1.0 / mu.sqrt()) / (6.0 * p * p - 2.0 * mu)
}

/// Solution of `F_mu(p) = -sqrt(mu)` near `F_mu(c)`.
fn implicit_p(mu: f64) -> Result<f64, WangYoungError> {
    let f = odd_cubic(mu);
    let target = -mu.sqrt();
    let mut p = f.eval(&critical_point(mu));
    for _ in 0..60 {
        let step = (f.eval(&p) - target) / f.derivative(&p, 1);
        p -= step;
        if step.abs() < 1e-15 {
            return Ok(p);
        }
    }
    Err(WangYoungError::Invalid(format!("implicit solve for p({mu}) did not converge")))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransversalityReport {
    pub mu_star: f64,
    /// `p(mu*) = F_{mu*}(c) = (2 mu*/3) sqrt(mu*/3)`.
    pub p: f64,
    pub dp_dmu: f64,
    /// Central difference of the implicit solution, step `1e-5`.
    pub dp_dmu_fd: f64,
    pub h_at_mu_star: f64,
    /// `h(3 sqrt(3)/2)`, the supremum of `h` on the bracket.
    pub h_at_lower: f64,
    pub h_decreasing: bool,
    /// `d F_mu(c(mu)) / d mu = sqrt(mu/3)`.
    pub dfc_dmu: f64,
    pub dfc_dmu_at_lower: f64,
    /// `0.4 - dp_dmu` and `dfc_dmu - 0.9`.
    pub margin: f64,
    pub upper_margin: f64,
    pub passed: bool,
}

pub fn transversality_check(mu_star: f64) -> Result<TransversalityReport, WangYoungError> {
    let p = 2.0 * mu_star / 3.0 * critical_point(mu_star);
    let dp_dmu = dp_dmu_closed(mu_star, p);
    let step = 1e-5;
    let dp_dmu_fd = (implicit_p(mu_star + step)? - implicit_p(mu_star - step)?) / (2.0 * step);
    let lower = mu_lower();
    let grid: Vec<f64> = (0..=200).map(|i| lower + (3.0 - lower) * i as f64 / 200.0).collect();
    let h_decreasing = grid.windows(2).all(|w| transversality_h(w[1]) < transversality_h(w[0]));
    let h_at_mu_star = transversality_h(mu_star);
    let h_at_lower = transversality_h(lower);
    let dfc_dmu = critical_point(mu_star);
    let margin = 0.4 - dp_dmu;
    let upper_margin = dfc_dmu - 0.9;
    let passed = margin > 0.0
        && upper_margin > 0.0
        && h_decreasing
        && (dp_dmu - h_at_mu_star).abs() < 1e-9
        && (dp_dmu - dp_dmu_fd).abs() < 1e-5
        && h_at_lower < 0.4;
    Ok(TransversalityReport {
        mu_star,
        p,
        dp_dmu,
        dp_dmu_fd,
        h_at_mu_star,
        h_at_lower,
        h_decreasing,
        dfc_dmu,
        dfc_dmu_at_lower: critical_point(lower),
        margin,
        upper_margin,
        passed,
    })
}

/// `dF/dx` of `F(x, y, mu) = -y^3 + mu y + x` sampled by central differences.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NondegeneracyReport {
    pub samples: Vec<(f64, f64)>,
    pub constant: f64,
    pub passed: bool,
}

pub fn nondegeneracy_check(mu_star: f64) -> NondegeneracyReport {
    let f = |x: f64, y: f64| -y * y * y + mu_star * y + x;
    let c = critical_point(mu_star);
    let h = 0.5;
    let samples: Vec<(f64, f64)> =
        [c, -c, 0.3, -1.7].iter().map(|&y| (y, (f(h, y) - f(-h, y)) / (2.0 * h))).collect();
    let passed = samples.iter().all(|&(_, d)| (d - 1.0).abs() < 1e-12);
    NondegeneracyReport { samples, constant: 1.0, passed }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WangYoungCertificate {
    pub misiurewicz: MisiurewiczCertificate,
    pub transversality: TransversalityReport,
    pub nondegeneracy: NondegeneracyReport,
    pub passed: bool,
}

/// Runs the whole chain: parameter search, interval, and the three
/// hypothesis checks.
pub fn certify(tol: f64, max_period: usize) -> Result<WangYoungCertificate, WangYoungError> {
    let mu_star = find_mu_star(tol)?;
    let interval = build_interval(mu_star)?;
    let misiurewicz = misiurewicz_check(mu_star, &interval, max_period)?;
    let transversality = transversality_check(mu_star)?;
    let nondegeneracy = nondegeneracy_check(mu_star);
    let passed = misiurewicz.passed && transversality.passed && nondegeneracy.passed;
    Ok(WangYoungCertificate { misiurewicz, transversality, nondegeneracy, passed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn h_bound_at_bracket_end() {
        assert!((transversality_h(mu_lower()) - 0.36989994924645225).abs() < 1e-12);
        assert!((critical_point(mu_lower()) - 0.9306).abs() < 1e-4);
    }

    #[test]
    fn transversality_holds() {
        let mu = find_mu_star(1e-14).unwrap();
        let t = transversality_check(mu).unwrap();
        assert!(t.passed, "{t:?}");
        assert!((t.dp_dmu - t.dp_dmu_fd).abs() < 1e-5);
    }

    #[test]
    fn nondegeneracy_is_constant() {
        let r = nondegeneracy_check(2.9);
        assert!(r.passed);
        assert_eq!(r.samples.len(), 4);
    }

    #[test]
    fn low_period_certificate() {
        let mu = find_mu_star(1e-14).unwrap();
        let iv = build_interval(mu).unwrap();
        let cert = misiurewicz_check(mu, &iv, 3).unwrap();
        assert!(cert.passed, "{:#?}", cert.checks);
        assert_eq!(cert.orbit_counts[&1], 3);
        let d = cert.checks["critical_orbit_finite"].value;
        assert!((d - (mu.sqrt() - critical_point(mu))).abs() < 1e-12);
    }
}

use rayon::prelude::*;
use serde::Serialize;

use super::{find_saddle, grow_manifold, ManifoldCurve, ManifoldKind, ManifoldOptions, PlanarError, Point};
use crate::maps1d::{critical_points, CubicMap1D};
use crate::renorm::{ModelParams, RenormalizedMap};
use crate::Rect;

/// Direction of the fibers along which gaps are measured.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FiberDirection {
    #[default]
    Vertical,
    Horizontal,
    /// Fibers at this angle (radians) from the x-axis.
    Angle(f64),
}

impl FiberDirection {
    fn angle(&self) -> f64 {
        match *self {
            FiberDirection::Vertical => std::f64::consts::FRAC_PI_2,
            FiberDirection::Horizontal => 0.0,
            FiberDirection::Angle(a) => a,
        }
    }

    /// `(u, w)`: `u` labels the fiber, `w` is the position along it.
    fn fiber_coords(self, p: Point) -> (f64, f64) {
        let t = self.angle();
        let (s, c) = t.sin_cos();
        (p.x * s - p.y * c, p.x * c + p.y * s)
    }

    fn point_at(self, u: f64, w: f64) -> Point {
        let t = self.angle();
        let (s, c) = t.sin_cos();
        Point::new(u * s + w * c, -u * c + w * s)
    }
}

/// Signed gap on one fiber: unstable position minus stable position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapSample {
    pub u: f64,
    pub w_unstable: f64,
    pub w_stable: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Extremum {
    Max,
    Min,
}

/// A local extremum of the signed gap, refined by a parabola through the
/// three nearest fiber samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TangencyCandidate {
    pub u: f64,
    /// Point on the stable curve at the extremum.
    pub location: Point,
    pub gap: f64,
    pub extremum: Extremum,
    /// Second derivative of the gap along the fibers (curvature mismatch).
    pub curvature_mismatch: f64,
    pub curvature_unstable: f64,
    pub curvature_stable: f64,
    /// Change in the mismatch estimate when the stencil is doubled.
    pub curvature_noise: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TangencyScan {
    pub samples: Vec<GapSample>,
    pub candidates: Vec<TangencyCandidate>,
    /// Number of sign changes of the gap across the window.
    pub sign_changes: usize,
}

impl TangencyScan {
    /// The extremum of the requested kind with the smallest `|gap|`.
    pub fn nearest(&self, kind: Extremum) -> Option<&TangencyCandidate> {
        self.candidates
            .iter()
            .filter(|c| c.extremum == kind)
            .min_by(|a, b| a.gap.abs().total_cmp(&b.gap.abs()))
    }
}

/// A polyline segment in fiber coordinates.
type Segment = ((f64, f64), (f64, f64));

fn crossings(points: &[Point], dir: FiberDirection, window: &Rect) -> Vec<Segment> {
    points
        .windows(2)
        .filter(|w| window.contains(w[0].x, w[0].y) && window.contains(w[1].x, w[1].y))
        .map(|w| (dir.fiber_coords(w[0]), dir.fiber_coords(w[1])))
        .collect()
}

fn crossing_on(segs: &[Segment], u: f64) -> Result<Option<f64>, usize> {
    let mut hits = segs.iter().filter_map(|&((ua, wa), (ub, wb))| {
        let inside = (ua <= u && u < ub) || (ub <= u && u < ua);
        inside.then(|| wa + (wb - wa) * (u - ua) / (ub - ua))
    });
    let first = hits.next();
    let extra = hits.count();
    if extra > 0 {
        Err(extra + 1)
    } else {
        Ok(first)
    }
}

/// Gap samples on `fibers` evenly spaced fibers across `window`. Fibers
/// missing either curve are skipped; a fiber meeting a curve more than once
/// rejects the window.
pub fn fiber_gaps(
    unstable: &[Point],
    stable: &[Point],
    window: &Rect,
    dir: FiberDirection,
    fibers: usize,
) -> Result<Vec<GapSample>, PlanarError> {
    if fibers < 3 {
        return Err(PlanarError::Invalid("need at least three fibers".into()));
    }
    let corners = [
        Point::new(window.x.lo, window.y.lo),
        Point::new(window.x.lo, window.y.hi),
        Point::new(window.x.hi, window.y.lo),
        Point::new(window.x.hi, window.y.hi),
    ];
    let us: Vec<f64> = corners.iter().map(|&c| dir.fiber_coords(c).0).collect();
    let (u_lo, u_hi) = us.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &u| (a.min(u), b.max(u)));
    let su = crossings(unstable, dir, window);
    let ss = crossings(stable, dir, window);
    let mut out = Vec::new();
    for i in 0..fibers {
        // Stay strictly inside so boundary fibers see whole segments.
        let u = u_lo + (u_hi - u_lo) * (i as f64 + 0.5) / fibers as f64;
        let wu = crossing_on(&su, u).map_err(|k| {
            PlanarError::WindowRejected(format!("unstable curve meets fiber u = {u} {k} times"))
        })?;
        let ws = crossing_on(&ss, u)
            .map_err(|k| PlanarError::WindowRejected(format!("stable curve meets fiber u = {u} {k} times")))?;
        if let (Some(w_unstable), Some(w_stable)) = (wu, ws) {
            out.push(GapSample { u, w_unstable, w_stable, gap: w_unstable - w_stable });
        }
    }
    Ok(out)
}

fn parabola(u: [f64; 3], g: [f64; 3]) -> (f64, f64, f64) {
    // g = a (x - u1)^2 + b (x - u1) + c
    let (h0, h2) = (u[0] - u[1], u[2] - u[1]);
    let c = g[1];
    let d0 = (g[0] - c) / h0;
    let d2 = (g[2] - c) / h2;
    let a = (d2 - d0) / (h2 - h0);
    let b = d0 - a * h0;
    (a, b, c)
}

/// Scans the gap between an unstable and a stable curve across `window` and
/// reports its interior local extrema.
pub fn detect_tangencies(
    unstable: &ManifoldCurve,
    stable: &ManifoldCurve,
    window: &Rect,
    dir: FiberDirection,
    fibers: usize,
) -> Result<TangencyScan, PlanarError> {
    detect_tangencies_on(&unstable.points, &stable.points, window, dir, fibers)
}

/// [`detect_tangencies`] on bare polylines.
pub fn detect_tangencies_on(
    unstable: &[Point],
    stable: &[Point],
    window: &Rect,
    dir: FiberDirection,
    fibers: usize,
) -> Result<TangencyScan, PlanarError> {
    let samples = fiber_gaps(unstable, stable, window, dir, fibers)?;
    let sign_changes = samples.windows(2).filter(|w| (w[0].gap < 0.0) != (w[1].gap < 0.0)).count();
    let mut candidates = Vec::new();
    for i in 1..samples.len().saturating_sub(1) {
        let (a, b, c) = (samples[i - 1], samples[i], samples[i + 1]);
        let kind = if b.gap >= a.gap && b.gap >= c.gap && (b.gap > a.gap || b.gap > c.gap) {
            Extremum::Max
        } else if b.gap <= a.gap && b.gap <= c.gap && (b.gap < a.gap || b.gap < c.gap) {
            Extremum::Min
        } else {
            continue;
        };
        let us = [a.u, b.u, c.u];
        let (pa, pb, pc) = parabola(us, [a.gap, b.gap, c.gap]);
        let shift = if pa != 0.0 { (-pb / (2.0 * pa)).clamp(us[0] - us[1], us[2] - us[1]) } else { 0.0 };
        let gap = pa * shift * shift + pb * shift + pc;
        let u = b.u + shift;
        let (ka, kb, kc) = parabola(us, [a.w_stable, b.w_stable, c.w_stable]);
        let w_stable = ka * shift * shift + kb * shift + kc;
        let (ua, _, _) = parabola(us, [a.w_unstable, b.w_unstable, c.w_unstable]);
        let curvature_noise = if i >= 2 && i + 2 < samples.len() {
            let (wide, _, _) = parabola(
                [samples[i - 2].u, b.u, samples[i + 2].u],
                [samples[i - 2].gap, b.gap, samples[i + 2].gap],
            );
            (2.0 * wide - 2.0 * pa).abs()
        } else {
            f64::NAN
        };
        candidates.push(TangencyCandidate {
            u,
            location: dir.point_at(u, w_stable),
            gap,
            extremum: kind,
            curvature_mismatch: 2.0 * pa,
            curvature_unstable: 2.0 * ua,
            curvature_stable: 2.0 * ka,
            curvature_noise,
        });
    }
    Ok(TangencyScan { samples, candidates, sign_changes })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    ContactMaking,
    ContactBreaking,
    Transverse,
    /// Slope below the noise floor.
    Withheld,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TangencyEvent {
    pub parameter: f64,
    /// Where the curves are closest, when the caller has a scan to read it from.
    pub location: Option<Point>,
    /// Oriented gap at the parameter: positive when the curves cross.
    pub min_gap: f64,
    /// Richardson-extrapolated derivative of the oriented gap.
    pub gap_slope: f64,
    pub slope_coarse: f64,
    pub slope_fine: f64,
    /// Coarse and fine slopes agree within 10%.
    pub richardson_consistent: bool,
    pub classification: Classification,
}

pub const SLOPE_NOISE_FLOOR: f64 = 1e-4;

/// Classifies the extremum tracked by `gap_at(t)` (the signed extremal gap
/// along a parameter curve). The gap is oriented so that positive means the
/// curves cross: as is at a maximum, negated at a minimum. Contact-making
/// means the oriented gap increases through zero.
pub fn classify_tangency(
    gap_at: impl Fn(f64) -> Result<f64, PlanarError>,
    t0: f64,
    dt: f64,
    extremum: Extremum,
) -> Result<TangencyEvent, PlanarError> {
    if !(dt > 0.0) {
        return Err(PlanarError::Invalid("dt must be positive".into()));
    }
    let o = match extremum {
        Extremum::Max => 1.0,
        Extremum::Min => -1.0,
    };
    let g = |t: f64| gap_at(t).map(|v| o * v);
    let g0 = g(t0)?;
    let (gm, gp) = (g(t0 - dt)?, g(t0 + dt)?);
    let (hm, hp) = (g(t0 - 0.5 * dt)?, g(t0 + 0.5 * dt)?);
    let slope_coarse = (gp - gm) / (2.0 * dt);
    let slope_fine = (hp - hm) / dt;
    let gap_slope = (4.0 * slope_fine - slope_coarse) / 3.0;
    let richardson_consistent = (slope_coarse - slope_fine).abs() <= 0.1 * slope_fine.abs();
    let same_side = gm.signum() == g0.signum() && gp.signum() == g0.signum() && g0 != 0.0;
    let classification = if gap_slope.abs() < SLOPE_NOISE_FLOOR {
        Classification::Withheld
    } else if same_side && g0.abs() > gap_slope.abs() * dt {
        Classification::Transverse
    } else if gap_slope > 0.0 {
        Classification::ContactMaking
    } else {
        Classification::ContactBreaking
    };
    Ok(TangencyEvent {
        parameter: t0,
        location: None,
        min_gap: g0,
        gap_slope,
        slope_coarse,
        slope_fine,
        richardson_consistent,
        classification,
    })
}

/// Ordinate of the 2-periodic point of `y -> -y^3 + mu y + nu` near `seed`.
pub fn two_cycle_ordinate(mu_bar: f64, nu_bar: f64, seed: f64) -> Result<f64, PlanarError> {
    let f = CubicMap1D::new(mu_bar, nu_bar);
    let mut y = seed;
    for _ in 0..100 {
        let z = f.eval(&y);
        let g = f.eval(&z) - y;
        let dg = f.derivative(&z, 1) * f.derivative(&y, 1) - 1.0;
        let step = g / dg;
        y -= step;
        if step.abs() < 1e-15 * y.abs().max(1.0) {
            return Ok(y);
        }
    }
    Err(PlanarError::NewtonDiverged { iterations: 100, x: y, y: f.eval(&y) })
}

/// Critical value `F(c+)` (`upper`) or `F(c-)`.
pub fn critical_value(mu_bar: f64, nu_bar: f64, upper: bool) -> Result<f64, PlanarError> {
    let f = CubicMap1D::new(mu_bar, nu_bar);
    let (lo, hi) = critical_points(&f).map_err(|e| PlanarError::Invalid(e.to_string()))?;
    Ok(f.eval(if upper { &hi } else { &lo }))
}

/// Parameter velocities of the limit family at `(mu_bar, nu_bar)`, from
/// central differences with step `h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VelocityTable {
    pub mu_bar: f64,
    pub nu_bar: f64,
    pub step: f64,
    /// `d y1+ / d mu_bar` for the 2-cycle ordinate near `+2`.
    pub dy_plus_dmu: f64,
    pub dy_minus_dmu: f64,
    pub dy_plus_dnu: f64,
    pub dy_minus_dnu: f64,
    /// `d F(c+) / d mu_bar`.
    pub dcrit_plus_dmu: f64,
    pub dcrit_minus_dmu: f64,
    pub dcrit_plus_dnu: f64,
    pub dcrit_minus_dnu: f64,
}

pub fn velocity_derivatives(mu_bar: f64, nu_bar: f64, h: f64) -> Result<VelocityTable, PlanarError> {
    let d = |f: &dyn Fn(f64, f64) -> Result<f64, PlanarError>, wrt_mu: bool| -> Result<f64, PlanarError> {
        let (dm, dn) = if wrt_mu { (h, 0.0) } else { (0.0, h) };
        Ok((f(mu_bar + dm, nu_bar + dn)? - f(mu_bar - dm, nu_bar - dn)?) / (2.0 * h))
    };
    let yp = |m, n| two_cycle_ordinate(m, n, 2.0);
    let ym = |m, n| two_cycle_ordinate(m, n, -2.0);
    let cp = |m, n| critical_value(m, n, true);
    let cm = |m, n| critical_value(m, n, false);
    Ok(VelocityTable {
        mu_bar,
        nu_bar,
        step: h,
        dy_plus_dmu: d(&yp, true)?,
        dy_minus_dmu: d(&ym, true)?,
        dy_plus_dnu: d(&yp, false)?,
        dy_minus_dnu: d(&ym, false)?,
        dcrit_plus_dmu: d(&cp, true)?,
        dcrit_minus_dmu: d(&cm, true)?,
        dcrit_plus_dnu: d(&cp, false)?,
        dcrit_minus_dnu: d(&cm, false)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FBarSlope {
    /// `(mu_bar, nu_bar)` points of the tangency locus.
    pub locus: Vec<(f64, f64)>,
    /// Grid values where the bracket held no sign change.
    pub skipped: Vec<f64>,
    pub slope: f64,
    pub strictly_decreasing: bool,
}

/// Tracks the zero set of `gap(mu_bar, nu_bar)` in `nu_bar` across
/// `mu_grid` (bisection inside `nu_bracket` to width `tol`) and fits the
/// slope of the resulting locus by least squares.
pub fn f_bar_slope<G>(gap: G, mu_grid: &[f64], nu_bracket: (f64, f64), tol: f64) -> Result<FBarSlope, PlanarError>
where
    G: Fn(f64, f64) -> Result<f64, PlanarError> + Sync,
{
    let solved: Vec<(f64, Option<f64>)> = mu_grid
        .par_iter()
        .map(|&m| {
            let (mut lo, mut hi) = nu_bracket;
            let mut glo = gap(m, lo).ok()?;
            let ghi = gap(m, hi).ok()?;
            if (glo < 0.0) == (ghi < 0.0) {
                return Some((m, None));
            }
            while hi - lo > tol {
                let mid = 0.5 * (lo + hi);
                let gm = gap(m, mid).ok()?;
                if (gm < 0.0) == (glo < 0.0) {
                    lo = mid;
                    glo = gm;
                } else {
                    hi = mid;
                }
            }
            Some((m, Some(0.5 * (lo + hi))))
        })
        .map(|r| r.unwrap_or((f64::NAN, None)))
        .collect();
    let mut locus = Vec::new();
    let mut skipped = Vec::new();
    for (m, (mu, nu)) in mu_grid.iter().zip(solved) {
        match nu {
            Some(v) if mu.is_finite() => locus.push((mu, v)),
            _ => skipped.push(*m),
        }
    }
    if locus.len() < 2 {
        return Err(PlanarError::LocusLost(format!("only {} locus points", locus.len())));
    }
    let k = locus.len() as f64;
    let mx = locus.iter().map(|p| p.0).sum::<f64>() / k;
    let my = locus.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = locus.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = locus.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let strictly_decreasing = locus.windows(2).all(|w| w[1].1 < w[0].1);
    Ok(FBarSlope { locus, skipped, slope: sxy / sxx, strictly_decreasing })
}

/// Extremal gap of the limit family at the upper tangency: the critical value
/// `F(c+)` minus the 2-cycle ordinate `y1+` that the stable leaf sits on.
pub fn limit_upper_gap(mu_bar: f64, nu_bar: f64) -> Result<f64, PlanarError> {
    Ok(critical_value(mu_bar, nu_bar, true)? - two_cycle_ordinate(mu_bar, nu_bar, 2.0)?)
}

/// As [`limit_upper_gap`] with the unstable side frozen at `(3, 0)`.
pub fn decoupled_upper_gap(mu_bar: f64, nu_bar: f64) -> Result<f64, PlanarError> {
    Ok(critical_value(3.0, 0.0, true)? - two_cycle_ordinate(mu_bar, nu_bar, 2.0)?)
}

/// Which of the two tangencies of the renormalized family to track.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TangencySide {
    /// `W^u(P+)` against `W^s(P+)` near `(1, 2)`; the gap has a maximum.
    Upper,
    /// `W^u(P+)` against `W^s(P-)` near `(-1, -2)`; the gap has a minimum.
    Lower,
}

impl TangencySide {
    pub fn extremum(&self) -> Extremum {
        match self {
            TangencySide::Upper => Extremum::Max,
            TangencySide::Lower => Extremum::Min,
        }
    }

    pub fn window(&self) -> Rect {
        match self {
            TangencySide::Upper => Rect::new(0.55, 1.45, 1.0, 3.0),
            TangencySide::Lower => Rect::new(-1.45, -0.55, -3.0, -1.0),
        }
    }
}

/// Manifold geometry of the renormalized family `psi_{mu_bar, nu_bar, n}`
/// near its two tangencies between the manifolds of the 2-cycle
/// `P+ ~ (-2, 2)`, `P- ~ (2, -2)`.
#[derive(Debug, Clone)]
pub struct RenormTangency {
    pub params: ModelParams,
    pub n: u32,
    pub manifold: ManifoldOptions,
    pub fibers: usize,
    pub direction: FiberDirection,
}

impl RenormTangency {
    pub fn new(params: ModelParams, n: u32) -> Self {
        RenormTangency {
            params,
            n,
            manifold: ManifoldOptions { h_max: 1e-3, ..ManifoldOptions::default() },
            fibers: 401,
            direction: FiberDirection::Vertical,
        }
    }

    pub fn map(&self, mu_bar: f64, nu_bar: f64) -> Result<RenormalizedMap, PlanarError> {
        RenormalizedMap::new(self.params, self.n, mu_bar, nu_bar).map_err(|e| PlanarError::Invalid(e.to_string()))
    }

    /// Unstable curve of `P+` and the stable curve relevant to `side`.
    pub fn manifolds(
        &self,
        mu_bar: f64,
        nu_bar: f64,
        side: TangencySide,
    ) -> Result<(ManifoldCurve, ManifoldCurve), PlanarError> {
        let map = self.map(mu_bar, nu_bar)?;
        let p_plus = find_saddle(&map, 2, Point::new(-2.0, 2.0), 1e-14)?;
        let right = ManifoldOptions { direction_hint: Some([1.0, 0.0]), ..self.manifold };
        let left = ManifoldOptions { direction_hint: Some([-1.0, 0.0]), ..self.manifold };
        let window = side.window();
        let (u_target, stable) = match side {
            TangencySide::Upper => {
                let s = grow_manifold(&map, &p_plus, ManifoldKind::Stable, window.x.hi + 2.5, &right)?;
                (11.0, s)
            }
            TangencySide::Lower => {
                let p_minus = find_saddle(&map, 2, Point::new(2.0, -2.0), 1e-14)?;
                let s = grow_manifold(&map, &p_minus, ManifoldKind::Stable, 2.5 - window.x.lo, &left)?;
                (6.0, s)
            }
        };
        let unstable = grow_manifold(&map, &p_plus, ManifoldKind::Unstable, u_target, &right)?;
        Ok((unstable, stable))
    }

    pub fn scan(&self, mu_bar: f64, nu_bar: f64, side: TangencySide) -> Result<TangencyScan, PlanarError> {
        let (u, s) = self.manifolds(mu_bar, nu_bar, side)?;
        detect_tangencies(&u, &s, &side.window(), self.direction, self.fibers)
    }

    /// Signed extremal gap at the tracked tangency.
    pub fn gap(&self, mu_bar: f64, nu_bar: f64, side: TangencySide) -> Result<f64, PlanarError> {
        let scan = self.scan(mu_bar, nu_bar, side)?;
        scan.nearest(side.extremum())
            .map(|c| c.gap)
            .ok_or_else(|| PlanarError::LocusLost(format!("no gap extremum at mu_bar = {mu_bar}, nu_bar = {nu_bar}")))
    }

    /// Classifies the tangency at `nu_bar = nu0` along `t -> (mu_bar, nu0 + t)`.
    pub fn classify(&self, mu_bar: f64, nu0: f64, side: TangencySide, dt: f64) -> Result<TangencyEvent, PlanarError> {
        let mut event = classify_tangency(|v| self.gap(mu_bar, v, side), nu0, dt, side.extremum())?;
        event.location = self.scan(mu_bar, nu0, side)?.nearest(side.extremum()).map(|c| c.location);
        Ok(event)
    }

    /// First `nu_bar` in `bracket` where the tracked gap vanishes.
    pub fn tangency_parameter(
        &self,
        mu_bar: f64,
        side: TangencySide,
        bracket: (f64, f64),
        tol: f64,
    ) -> Result<f64, PlanarError> {
        let (mut lo, mut hi) = bracket;
        let glo = self.gap(mu_bar, lo, side)?;
        let ghi = self.gap(mu_bar, hi, side)?;
        if (glo < 0.0) == (ghi < 0.0) {
            return Err(PlanarError::LocusLost(format!("no sign change of the gap in [{lo}, {hi}]")));
        }
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if (self.gap(mu_bar, mid, side)? < 0.0) == (glo < 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

use serde::Serialize;

use super::{PlanarError, PlanarMap, Point, SaddlePoint, SpectrumKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ManifoldKind {
    Stable,
    Unstable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ManifoldOptions {
    pub h_min: f64,
    pub h_max: f64,
    /// Largest turning angle between consecutive segments, in radians.
    pub angle_max: f64,
    pub max_points: usize,
    /// Distance of the fundamental domain from the saddle.
    pub seed_distance: f64,
    /// Selects the branch whose initial direction has a positive dot
    /// product with this vector.
    pub direction_hint: Option<[f64; 2]>,
}

impl Default for ManifoldOptions {
    fn default() -> Self {
        ManifoldOptions {
            h_min: 1e-5,
            h_max: 1e-2,
            angle_max: 0.2,
            max_points: 2_000_000,
            seed_distance: 1e-6,
            direction_hint: None,
        }
    }
}

/// One branch of an invariant manifold as a polyline starting at the saddle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifoldCurve {
    pub kind: ManifoldKind,
    pub base: SaddlePoint,
    pub points: Vec<Point>,
    /// Cumulative arclength at each point.
    pub arclength: Vec<f64>,
    /// Growth parameter of each point: `k + u` is the `k`-th growth step
    /// applied to the fundamental-domain point `u`.
    pub parameters: Vec<f64>,
    /// Map iterations per growth step (the saddle period, doubled when the
    /// relevant eigenvalue is negative so the branch maps to itself).
    pub step_iterations: usize,
    /// Set when the point budget ran out or the orbit escaped before the
    /// target arclength.
    pub truncated: bool,
}

impl ManifoldCurve {
    pub fn length(&self) -> f64 {
        self.arclength.last().copied().unwrap_or(0.0)
    }

    /// Distance from `p` to the polyline and the index of the nearest segment.
    pub fn distance_to(&self, p: Point) -> (f64, usize) {
        let mut best = (f64::INFINITY, 0);
        for (i, w) in self.points.windows(2).enumerate() {
            let d = segment_distance(p, w[0], w[1]);
            if d < best.0 {
                best = (d, i);
            }
        }
        best
    }

    /// Largest distance from the image of a sampled polyline point to the
    /// polyline, over points whose image parameter lies within the grown
    /// range. Images are taken with the growth direction: forward for
    /// unstable curves, backward for stable ones.
    pub fn invariance_defect<M: PlanarMap>(&self, map: &M, samples: usize) -> f64 {
        let n = self.points.len();
        if n < 3 || samples == 0 {
            return 0.0;
        }
        let last = self.parameters[n - 1];
        let inside: Vec<Point> = self
            .points
            .iter()
            .zip(&self.parameters)
            .filter(|(_, &t)| t + 1.0 <= last)
            .map(|(p, _)| *p)
            .collect();
        let stride = (inside.len() / samples).max(1);
        let mut worst = 0.0f64;
        for p in inside.iter().step_by(stride) {
            let mut q = *p;
            for _ in 0..self.step_iterations {
                q = match self.kind {
                    ManifoldKind::Unstable => map.forward(q),
                    ManifoldKind::Stable => match map.inverse(q) {
                        Some(r) => r,
                        None => return f64::NAN,
                    },
                };
            }
            worst = worst.max(self.distance_to(q).0);
        }
        worst
    }
}

fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    (p - (a + t * ab)).norm()
}

fn turning_angle(a: Point, b: Point, c: Point) -> f64 {
    let (u, v) = (b - a, c - b);
    let denom = u.norm() * v.norm();
    if denom == 0.0 {
        return 0.0;
    }
    (u.dot(&v) / denom).clamp(-1.0, 1.0).acos()
}

const MAX_LEVELS: usize = 400;
const INITIAL_LEVEL_POINTS: usize = 8;

/// Grows one branch of `W^u` or `W^s` of `saddle` up to `target_arclength`.
///
/// A fundamental domain `{p + s v : s in [d / L, d]}` on the eigendirection
/// (`d` the seed distance, `L` the expansion of the growth map) is
/// parametrized log-uniformly by `u in [0, 1]`; the point with parameter
/// `k + u` is the `k`-th image of the seed point `u`. Parameters are bisected
/// until consecutive points are at most `h_max` apart and turn by at most
/// `angle_max`, and points closer than `h_min` to their predecessor are
/// dropped.
pub fn grow_manifold<M: PlanarMap>(
    map: &M,
    saddle: &SaddlePoint,
    kind: ManifoldKind,
    target_arclength: f64,
    opts: &ManifoldOptions,
) -> Result<ManifoldCurve, PlanarError> {
    let (eigs, vecs) = match (saddle.kind, saddle.eigenvalues, saddle.eigenvectors) {
        (SpectrumKind::Saddle, Some(e), Some(v)) => (e, v),
        _ => {
            let e = saddle.eigenvalues.unwrap_or([f64::NAN; 2]);
            return Err(PlanarError::NotSaddle(e[0].abs(), e[1].abs()));
        }
    };
    if kind == ManifoldKind::Stable && !map.has_inverse() {
        return Err(PlanarError::NoInverse(map.name()));
    }
    if !(opts.h_min > 0.0 && opts.h_min < opts.h_max && opts.seed_distance > 0.0) {
        return Err(PlanarError::Invalid("need 0 < h_min < h_max and a positive seed distance".into()));
    }
    let (eig, mut v) = match kind {
        ManifoldKind::Unstable => (eigs[0], vecs[0]),
        ManifoldKind::Stable => (eigs[1], vecs[1]),
    };
    let mut expansion = match kind {
        ManifoldKind::Unstable => eig.abs(),
        ManifoldKind::Stable => 1.0 / eig.abs(),
    };
    let mut step_iterations = saddle.period;
    if eig < 0.0 {
        step_iterations *= 2;
        expansion *= expansion;
    }
    if let Some(h) = opts.direction_hint {
        if v.dot(&Point::new(h[0], h[1])) < 0.0 {
            v = -v;
        }
    }
    let p0 = saddle.location;
    let d = opts.seed_distance;

    let step = |p: Point| -> Option<Point> {
        let mut q = p;
        for _ in 0..step_iterations {
            q = match kind {
                ManifoldKind::Unstable => map.forward(q),
                ManifoldKind::Stable => map.inverse(q)?,
            };
        }
        (q.x.is_finite() && q.y.is_finite()).then_some(q)
    };
    let point_at = |tau: f64| -> Option<Point> {
        let k = tau.floor();
        let u = tau - k;
        let s = d * expansion.powf(u - 1.0);
        let mut q = p0 + s * v;
        for _ in 0..k as usize {
            q = step(q)?;
        }
        Some(q)
    };

    let mut points = vec![p0];
    let mut arclength = vec![0.0];
    let mut parameters = vec![0.0];
    let mut evaluations = 0usize;
    let mut truncated = false;
    let mut last_tau = 0.0f64;
    'levels: for level in 0..MAX_LEVELS {
        let mut pending: Vec<(f64, Point)> = Vec::new();
        for i in (1..=INITIAL_LEVEL_POINTS).rev() {
            let tau = level as f64 + i as f64 / INITIAL_LEVEL_POINTS as f64;
            match point_at(tau) {
                Some(p) => pending.push((tau, p)),
                None => {
                    truncated = true;
                    break 'levels;
                }
            }
        }
        if level == 0 {
            pending.push((0.0, p0 + (d / expansion) * v));
        }
        evaluations += pending.len();
        while let Some((tb, pb)) = pending.pop() {
            let pa = *points.last().unwrap();
            let dist = (pb - pa).norm();
            let angle = if points.len() >= 2 { turning_angle(points[points.len() - 2], pa, pb) } else { 0.0 };
            let refine = dist > opts.h_max || (angle > opts.angle_max && dist > opts.h_min);
            if refine && tb - last_tau > 1e-13 {
                if evaluations >= opts.max_points {
                    truncated = true;
                    break 'levels;
                }
                let tm = 0.5 * (last_tau + tb);
                let Some(pm) = point_at(tm) else {
                    truncated = true;
                    break 'levels;
                };
                evaluations += 1;
                pending.push((tb, pb));
                pending.push((tm, pm));
                continue;
            }
            last_tau = tb;
            if dist < opts.h_min {
                continue;
            }
            let s = arclength.last().unwrap() + dist;
            points.push(pb);
            arclength.push(s);
            parameters.push(tb);
            if s >= target_arclength {
                break 'levels;
            }
        }
        if level + 1 == MAX_LEVELS {
            truncated = true;
        }
    }
    Ok(ManifoldCurve { kind, base: saddle.clone(), points, arclength, parameters, step_iterations, truncated })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planar::{find_saddle, LinearSaddle};

    #[test]
    fn linear_unstable_manifold_is_the_y_axis() {
        let m = LinearSaddle { lambda: 0.2, sigma: 2.0 };
        let s = find_saddle(&m, 1, Point::new(0.1, 0.1), 1e-14).unwrap();
        let opts = ManifoldOptions { direction_hint: Some([0.0, 1.0]), ..Default::default() };
        let c = grow_manifold(&m, &s, ManifoldKind::Unstable, 1.0, &opts).unwrap();
        assert!(!c.truncated);
        assert!(c.length() >= 1.0);
        assert!(c.points.iter().all(|p| p.x.abs() < 1e-15 && p.y >= 0.0));
        for w in c.points.windows(2).skip(1) {
            let h = (w[1] - w[0]).norm();
            assert!(h <= opts.h_max * (1.0 + 1e-12) && h >= opts.h_min, "{h}");
        }
        let st = grow_manifold(&m, &s, ManifoldKind::Stable, 0.5, &opts).unwrap();
        assert!(st.points.iter().all(|p| p.y.abs() < 1e-15));
    }
}

use serde::Serialize;

use super::{thickness, CantorApproximation, CantorError, CantorScalar, CantorSource};
use crate::maps1d::{conjugacy_h, conjugacy_h_derivative};
use crate::rational::Rational;
use crate::Interval;

const MONOTONE_SAMPLES: usize = 1000;

/// A smooth map expected to be strictly monotone on the ambient interval.
pub trait MonotoneMap: Sync {
    fn name(&self) -> String;
    fn eval(&self, x: f64) -> f64;
    fn derivative(&self, x: f64) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMonotone {
    pub a: f64,
    pub b: f64,
}

impl MonotoneMap for AffineMonotone {
    fn name(&self) -> String {
        format!("affine({}, {})", self.a, self.b)
    }
    fn eval(&self, x: f64) -> f64 {
        self.a * x + self.b
    }
    fn derivative(&self, _x: f64) -> f64 {
        self.a
    }
}

/// `h(x) = 2 sin(pi x / 3)`, conjugating the N-map to `F_{3,0}`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SineConjugacy;

impl MonotoneMap for SineConjugacy {
    fn name(&self) -> String {
        "2 sin(pi x / 3)".into()
    }
    fn eval(&self, x: f64) -> f64 {
        conjugacy_h(x)
    }
    fn derivative(&self, x: f64) -> f64 {
        conjugacy_h_derivative(x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImageReport {
    pub image: Interval<f64>,
    pub intervals: Vec<Interval<f64>>,
    pub delta: f64,
    /// `max |h'| / min |h'|` over the ambient trimmed by `delta` on each side.
    pub distortion: f64,
    pub source_thickness: f64,
    pub image_thickness: f64,
    /// `source_thickness / max(distortion, 4)`.
    pub bound: f64,
    pub bound_holds: bool,
}

/// Endpoint-wise image of `k` under a monotone map, with the thickness
/// comparison `tau(h(K)) >= tau(K) / max(c, 4)`. `delta` defaults to one
/// hundredth of the ambient length.
pub fn image_cantor<T: CantorScalar>(
    k: &CantorApproximation<T>,
    map: &dyn MonotoneMap,
    delta: Option<f64>,
) -> Result<(CantorApproximation<f64>, ImageReport), CantorError> {
    let lo = k.ambient.lo.approx();
    let hi = k.ambient.hi.approx();
    let len = hi - lo;
    let delta = delta.unwrap_or(len / 100.0);
    if !(delta >= 0.0) || 2.0 * delta >= len {
        return Err(CantorError::InvalidDelta(delta));
    }

    let grid: Vec<f64> = (0..=MONOTONE_SAMPLES).map(|i| lo + len * i as f64 / MONOTONE_SAMPLES as f64).collect();
    let increasing = map.eval(hi) > map.eval(lo);
    for w in grid.windows(2) {
        let d = map.derivative(w[0]);
        let step_ok = if increasing { map.eval(w[1]) > map.eval(w[0]) } else { map.eval(w[1]) < map.eval(w[0]) };
        if d == 0.0 || (d > 0.0) != increasing || !step_ok {
            return Err(CantorError::NonMonotone { x: w[0] });
        }
    }

    let (tlo, thi) = (lo + delta, hi - delta);
    let (mut dmin, mut dmax) = (f64::INFINITY, 0.0f64);
    for i in 0..=MONOTONE_SAMPLES {
        let d = map.derivative(tlo + (thi - tlo) * i as f64 / MONOTONE_SAMPLES as f64).abs();
        dmin = dmin.min(d);
        dmax = dmax.max(d);
    }
    let distortion = dmax / dmin;

    let apply = |iv: &Interval<T>| {
        let (a, b) = (map.eval(iv.lo.approx()), map.eval(iv.hi.approx()));
        if increasing {
            Interval { lo: a, hi: b }
        } else {
            Interval { lo: b, hi: a }
        }
    };
    let mut intervals: Vec<_> = k.intervals.iter().map(apply).collect();
    if !increasing {
        intervals.reverse();
    }
    let image = CantorApproximation::new(
        apply(&k.ambient),
        intervals,
        k.generation,
        CantorSource::Image { map: map.name() },
    )?;

    let source_thickness = thickness(k)?.thickness.approx();
    let image_thickness = thickness(&image)?.thickness;
    let bound = source_thickness / distortion.max(4.0);
    let report = ImageReport {
        image: image.ambient,
        intervals: image.intervals.clone(),
        delta,
        distortion,
        source_thickness,
        image_thickness,
        bound,
        bound_holds: image_thickness >= bound,
    };
    Ok((image, report))
}

/// Exact image under `x -> a x + b`.
pub fn image_affine_exact(
    k: &CantorApproximation<Rational>,
    a: &Rational,
    b: &Rational,
) -> CantorApproximation<Rational> {
    k.affine_image(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_image() {
        let k = CantorApproximation::new(
            Interval { lo: 0.0, hi: 3.0 },
            vec![Interval { lo: 0.0, hi: 1.0 }, Interval { lo: 2.0, hi: 3.0 }],
            1,
            CantorSource::Custom,
        )
        .unwrap();
        let (img, rep) = image_cantor(&k, &AffineMonotone { a: 1.0, b: 0.0 }, None).unwrap();
        assert_eq!(img.intervals, k.intervals);
        assert_eq!(rep.distortion, 1.0);
        assert!(rep.bound_holds);
    }

    struct Square;
    impl MonotoneMap for Square {
        fn name(&self) -> String {
            "x^2".into()
        }
        fn eval(&self, x: f64) -> f64 {
            x * x
        }
        fn derivative(&self, x: f64) -> f64 {
            2.0 * x
        }
    }

    #[test]
    fn folding_map_is_rejected() {
        let k = CantorApproximation::new(
            Interval { lo: -1.0, hi: 1.0 },
            vec![Interval { lo: -1.0, hi: -0.5 }, Interval { lo: 0.5, hi: 1.0 }],
            1,
            CantorSource::Custom,
        )
        .unwrap();
        assert!(matches!(image_cantor(&k, &Square, None), Err(CantorError::NonMonotone { .. })));
    }
}

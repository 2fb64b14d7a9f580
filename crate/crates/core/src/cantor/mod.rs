//! Exact affine Cantor sets, thickness and the Gap Lemma.
//!
//! Sets are represented by a finite generation of their construction: an
//! ordered list of disjoint closed intervals inside an ambient interval.
//! Endpoints are either exact rationals or floats; every algorithm here is
//! generic over [`CantorScalar`] and never rounds in the rational case.

mod gap;
mod image;
mod km;
mod markov;
mod thickness;

use std::fmt::Debug;
use std::io;
use std::ops::{Add, Div, Mul, Sub};

use serde::Serialize;

pub use gap::{gap_lemma_check, GapLemmaReport, GapVerdict, GenerationRelation};
pub use image::{image_affine_exact, image_cantor, AffineMonotone, ImageReport, MonotoneMap, SineConjugacy};
pub use km::{build_km, KmConstruction};
pub use markov::{markov_cantor, km_markov_system, AffineBranch, MarkovBranch, MarkovBranchSystem};
pub use thickness::{thickness, BridgeSide, EndpointRatio, ThicknessReport};

use crate::maps1d::MapError;
use crate::rational::{to_f64, Rational, RationalRepr};
use crate::Interval;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CantorError {
    #[error("K_m needs an even m >= 6, got {0}")]
    InvalidM(usize),
    #[error("generation must be at least 1")]
    InvalidGeneration,
    #[error("construction ordering violated: {relation}")]
    OrderingViolated { relation: String },
    #[error("branch {branch}: point {point} is not in the expected branch domain")]
    ItineraryViolated { branch: usize, point: String },
    #[error("thickness needs at least two intervals, got {0}")]
    TooFewIntervals(usize),
    #[error("intervals are not ordered, disjoint and inside the ambient interval: {0}")]
    Malformed(String),
    #[error("map is not strictly monotone near x = {x}")]
    NonMonotone { x: f64 },
    #[error("branch {branch} does not expand (|slope| = {slope})")]
    NonExpanding { branch: usize, slope: f64 },
    #[error("branch domains {0} and {1} overlap")]
    OverlappingBranches(usize, usize),
    #[error("invalid trimming delta {0}")]
    InvalidDelta(f64),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error("serialization failed: {0}")]
    Serialize(String),
}

/// Scalars usable as Cantor set endpoints.
pub trait CantorScalar:
    Clone
    + PartialOrd
    + Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
{
    fn approx(&self) -> f64;
}

impl CantorScalar for f64 {
    fn approx(&self) -> f64 {
        *self
    }
}

impl CantorScalar for Rational {
    fn approx(&self) -> f64 {
        to_f64(self)
    }
}

/// How a set was produced.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CantorSource {
    Km { m: usize },
    Markov { branches: usize },
    Image { map: String },
    Affine,
    Custom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CantorApproximation<T> {
    pub ambient: Interval<T>,
    pub intervals: Vec<Interval<T>>,
    pub generation: usize,
    pub source: CantorSource,
}

impl<T: CantorScalar> CantorApproximation<T> {
    /// Validates ordering, disjointness and containment in the ambient.
    pub fn new(
        ambient: Interval<T>,
        intervals: Vec<Interval<T>>,
        generation: usize,
        source: CantorSource,
    ) -> Result<Self, CantorError> {
        if ambient.lo > ambient.hi {
            return Err(CantorError::Malformed("ambient interval is reversed".into()));
        }
        for (i, iv) in intervals.iter().enumerate() {
            if !(iv.lo <= iv.hi) {
                return Err(CantorError::Malformed(format!("interval {i} is reversed")));
            }
            if iv.lo < ambient.lo || iv.hi > ambient.hi {
                return Err(CantorError::Malformed(format!("interval {i} leaves the ambient")));
            }
        }
        for (i, w) in intervals.windows(2).enumerate() {
            if !(w[0].hi < w[1].lo) {
                return Err(CantorError::Malformed(format!(
                    "intervals {i} and {} are not strictly ordered",
                    i + 1
                )));
            }
        }
        Ok(CantorApproximation { ambient, intervals, generation, source })
    }

    /// Smallest interval containing every construction interval.
    pub fn hull(&self) -> Option<Interval<T>> {
        let first = self.intervals.first()?;
        let last = self.intervals.last()?;
        Some(Interval { lo: first.lo.clone(), hi: last.hi.clone() })
    }

    /// Complementary open intervals between consecutive construction
    /// intervals, as closed-interval endpoints.
    pub fn gaps(&self) -> Vec<Interval<T>> {
        self.intervals
            .windows(2)
            .map(|w| Interval { lo: w[0].hi.clone(), hi: w[1].lo.clone() })
            .collect()
    }

    /// `x -> a x + b` applied endpoint-wise (order restored when `a < 0`).
    pub fn affine_image(&self, a: &T, b: &T) -> Self {
        let f = |x: &T| a.clone() * x.clone() + b.clone();
        let flip = a.approx() < 0.0;
        let map_iv = |iv: &Interval<T>| {
            let (lo, hi) = (f(&iv.lo), f(&iv.hi));
            if flip {
                Interval { lo: hi, hi: lo }
            } else {
                Interval { lo, hi }
            }
        };
        let mut intervals: Vec<_> = self.intervals.iter().map(map_iv).collect();
        if flip {
            intervals.reverse();
        }
        CantorApproximation {
            ambient: map_iv(&self.ambient),
            intervals,
            generation: self.generation,
            source: CantorSource::Affine,
        }
    }

    /// Same set with the ambient replaced (validated).
    pub fn with_ambient(self, ambient: Interval<T>) -> Result<Self, CantorError> {
        Self::new(ambient, self.intervals, self.generation, self.source)
    }

    pub fn to_f64(&self) -> CantorApproximation<f64> {
        let conv = |iv: &Interval<T>| Interval { lo: iv.lo.approx(), hi: iv.hi.approx() };
        CantorApproximation {
            ambient: conv(&self.ambient),
            intervals: self.intervals.iter().map(conv).collect(),
            generation: self.generation,
            source: self.source.clone(),
        }
    }

    /// Whether `x` lies in some construction interval.
    pub fn contains(&self, x: &T) -> bool {
        let idx = self.intervals.partition_point(|iv| iv.hi < *x);
        self.intervals.get(idx).is_some_and(|iv| iv.lo <= *x)
    }
}

#[derive(Debug, Serialize)]
struct CsvRow<'a> {
    generation: usize,
    left_num: &'a str,
    left_den: &'a str,
    right_num: &'a str,
    right_den: &'a str,
}

/// JSON shape of an exact approximation.
#[derive(Debug, Clone, Serialize)]
pub struct CantorJson {
    pub generation: usize,
    pub source: CantorSource,
    pub ambient: Interval<RationalRepr>,
    pub intervals: Vec<Interval<RationalRepr>>,
}

impl CantorApproximation<Rational> {
    /// Appends one CSV row per interval; the header is written by the csv
    /// writer on first use.
    pub fn write_csv<W: io::Write>(&self, writer: &mut csv::Writer<W>) -> Result<(), CantorError> {
        for iv in &self.intervals {
            let (ln, ld) = (iv.lo.numer().to_string(), iv.lo.denom().to_string());
            let (rn, rd) = (iv.hi.numer().to_string(), iv.hi.denom().to_string());
            writer
                .serialize(CsvRow {
                    generation: self.generation,
                    left_num: &ln,
                    left_den: &ld,
                    right_num: &rn,
                    right_den: &rd,
                })
                .map_err(|e| CantorError::Serialize(e.to_string()))?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> CantorJson {
        let conv = |iv: &Interval<Rational>| Interval {
            lo: RationalRepr::from(&iv.lo),
            hi: RationalRepr::from(&iv.hi),
        };
        CantorJson {
            generation: self.generation,
            source: self.source.clone(),
            ambient: conv(&self.ambient),
            intervals: self.intervals.iter().map(conv).collect(),
        }
    }
}

/// Intersection of two sorted disjoint interval lists; only pieces of
/// positive length are kept.
pub(crate) fn intersect_sorted<T: CantorScalar>(a: &[Interval<T>], b: &[Interval<T>]) -> Vec<Interval<T>> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        let lo = if a[i].lo > b[j].lo { a[i].lo.clone() } else { b[j].lo.clone() };
        let hi = if a[i].hi < b[j].hi { a[i].hi.clone() } else { b[j].hi.clone() };
        if lo < hi {
            out.push(Interval { lo, hi });
        }
        if a[i].hi < b[j].hi {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

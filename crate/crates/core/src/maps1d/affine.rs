use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::MapError;
use crate::rational::{int, q, to_f64, Rational};
use crate::Interval;

/// Domain of one affine branch; endpoints may be open or closed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchDomain {
    pub lo: Rational,
    pub hi: Rational,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl BranchDomain {
    pub fn closed(lo: Rational, hi: Rational) -> Self {
        BranchDomain { lo, hi, lo_closed: true, hi_closed: true }
    }

    pub fn contains(&self, x: &Rational) -> bool {
        let above = if self.lo_closed { x >= &self.lo } else { x > &self.lo };
        let below = if self.hi_closed { x <= &self.hi } else { x < &self.hi };
        above && below
    }

    pub fn contains_f64(&self, x: f64) -> bool {
        let (lo, hi) = (to_f64(&self.lo), to_f64(&self.hi));
        let above = if self.lo_closed { x >= lo } else { x > lo };
        let below = if self.hi_closed { x <= hi } else { x < hi };
        above && below
    }
}

/// `x -> slope * x + intercept` on `domain`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffinePiece {
    pub slope: Rational,
    pub intercept: Rational,
    pub domain: BranchDomain,
}

impl AffinePiece {
    pub fn apply(&self, x: &Rational) -> Rational {
        &self.slope * x + &self.intercept
    }

    pub fn apply_f64(&self, x: f64) -> f64 {
        to_f64(&self.slope) * x + to_f64(&self.intercept)
    }

    /// Inverse of the affine formula (ignores the domain).
    pub fn invert(&self, y: &Rational) -> Rational {
        (y - &self.intercept) / &self.slope
    }
}

/// Piecewise-affine map with exact rational branch data. Pieces are ordered
/// left to right and their domains do not overlap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseAffineMap {
    pieces: Vec<AffinePiece>,
}

impl PiecewiseAffineMap {
    pub fn new(pieces: Vec<AffinePiece>) -> Result<Self, MapError> {
        if pieces.is_empty() {
            return Err(MapError::InvalidBranches("no pieces".into()));
        }
        for (i, p) in pieces.iter().enumerate() {
            if p.domain.lo > p.domain.hi {
                return Err(MapError::InvalidBranches(format!("piece {i} has reversed domain")));
            }
            if p.slope.is_zero() {
                return Err(MapError::InvalidBranches(format!("piece {i} is constant")));
            }
        }
        for (i, w) in pieces.windows(2).enumerate() {
            let (a, b) = (&w[0].domain, &w[1].domain);
            let disjoint = a.hi < b.lo || (a.hi == b.lo && !(a.hi_closed && b.lo_closed));
            if !disjoint {
                return Err(MapError::InvalidBranches(format!(
                    "pieces {i} and {} overlap or are out of order",
                    i + 1
                )));
            }
        }
        Ok(PiecewiseAffineMap { pieces })
    }

    pub fn pieces(&self) -> &[AffinePiece] {
        &self.pieces
    }

    pub fn domain(&self) -> Interval<Rational> {
        Interval {
            lo: self.pieces[0].domain.lo.clone(),
            hi: self.pieces[self.pieces.len() - 1].domain.hi.clone(),
        }
    }

    pub fn domain_f64(&self) -> Interval<f64> {
        let d = self.domain();
        Interval { lo: to_f64(&d.lo), hi: to_f64(&d.hi) }
    }

    pub fn branch_index(&self, x: &Rational) -> Option<usize> {
        self.pieces.iter().position(|p| p.domain.contains(x))
    }

    pub fn branch_index_f64(&self, x: f64) -> Option<usize> {
        self.pieces.iter().position(|p| p.domain.contains_f64(x))
    }

    fn outside(&self, x: f64) -> MapError {
        let d = self.domain_f64();
        MapError::OutsideDomain { x, lo: d.lo, hi: d.hi }
    }

    pub fn eval_exact(&self, x: &Rational) -> Result<Rational, MapError> {
        let i = self.branch_index(x).ok_or_else(|| self.outside(to_f64(x)))?;
        Ok(self.pieces[i].apply(x))
    }

    pub fn eval(&self, x: f64) -> Result<f64, MapError> {
        let i = self.branch_index_f64(x).ok_or_else(|| self.outside(x))?;
        Ok(self.pieces[i].apply_f64(x))
    }

    pub fn derivative(&self, x: f64) -> Result<f64, MapError> {
        let i = self.branch_index_f64(x).ok_or_else(|| self.outside(x))?;
        Ok(to_f64(&self.pieces[i].slope))
    }

    /// Composition of the branches in `itinerary` (first entry applied
    /// first), as `(slope, intercept)`.
    pub fn compose(&self, itinerary: &[usize]) -> (Rational, Rational) {
        let mut slope = Rational::one();
        let mut intercept = Rational::zero();
        for &i in itinerary {
            let p = &self.pieces[i];
            slope = &p.slope * &slope;
            intercept = &p.slope * &intercept + &p.intercept;
        }
        (slope, intercept)
    }
}

/// The N-map `S` on `[-3/2, 3/2]`: slope `-3` on `[-3/2, -1/2)`, slope `3` on
/// `[-1/2, 1/2]` and slope `-3` on `(1/2, 3/2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct NMap {
    map: PiecewiseAffineMap,
}

impl Default for NMap {
    fn default() -> Self {
        Self::new()
    }
}

impl NMap {
    /// Branch indices, named after the restrictions `S1`, `S2`, `S3`.
    pub const S1: usize = 0;
    pub const S2: usize = 1;
    pub const S3: usize = 2;

    pub fn new() -> Self {
        let half = q(1, 2);
        let three_halves = q(3, 2);
        let pieces = vec![
            AffinePiece {
                slope: int(-3),
                intercept: int(-3),
                domain: BranchDomain {
                    lo: -three_halves.clone(),
                    hi: -half.clone(),
                    lo_closed: true,
                    hi_closed: false,
                },
            },
            AffinePiece {
                slope: int(3),
                intercept: int(0),
                domain: BranchDomain::closed(-half.clone(), half.clone()),
            },
            AffinePiece {
                slope: int(-3),
                intercept: int(3),
                domain: BranchDomain { lo: half, hi: three_halves, lo_closed: false, hi_closed: true },
            },
        ];
        NMap { map: PiecewiseAffineMap::new(pieces).expect("N-map branches are well formed") }
    }

    pub fn eval_exact(&self, x: &Rational) -> Result<Rational, MapError> {
        self.map.eval_exact(x)
    }

    pub fn eval(&self, x: f64) -> Result<f64, MapError> {
        self.map.eval(x)
    }

    pub fn branch(&self, index: usize) -> &AffinePiece {
        &self.map.pieces()[index]
    }

    /// `S_index^{-1}(y)`; the caller is responsible for `y` lying in the
    /// branch image.
    pub fn inverse_branch(&self, index: usize, y: &Rational) -> Rational {
        self.map.pieces()[index].invert(y)
    }

    pub fn as_piecewise(&self) -> &PiecewiseAffineMap {
        &self.map
    }

    pub fn into_piecewise(self) -> PiecewiseAffineMap {
        self.map
    }
}

/// Convenience: `S(x)` for exact input.
pub fn nmap_eval(x: &Rational) -> Result<Rational, MapError> {
    NMap::new().eval_exact(x)
}

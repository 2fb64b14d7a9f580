use std::cmp::Ordering;
use std::ops::Sub;

use serde::{Deserialize, Serialize};

/// Closed interval `[lo, hi]` with `lo <= hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Interval<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: PartialOrd + Clone> Interval<T> {
    /// Returns `None` when `lo > hi`.
    pub fn new(lo: T, hi: T) -> Option<Self> {
        match lo.partial_cmp(&hi) {
            Some(Ordering::Less) | Some(Ordering::Equal) => Some(Interval { lo, hi }),
            _ => None,
        }
    }

    /// Interval spanned by two points in either order.
    pub fn spanning(a: T, b: T) -> Self {
        if a <= b {
            Interval { lo: a, hi: b }
        } else {
            Interval { lo: b, hi: a }
        }
    }

    pub fn contains(&self, x: &T) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_interval(&self, other: &Interval<T>) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// Closed intervals sharing at least one point.
    pub fn overlaps(&self, other: &Interval<T>) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn intersection(&self, other: &Interval<T>) -> Option<Interval<T>> {
        let lo = if self.lo >= other.lo { &self.lo } else { &other.lo };
        let hi = if self.hi <= other.hi { &self.hi } else { &other.hi };
        Interval::new(lo.clone(), hi.clone())
    }
}

impl<T> Interval<T>
where
    T: Clone + Sub<Output = T>,
{
    pub fn length(&self) -> T {
        self.hi.clone() - self.lo.clone()
    }
}

impl Interval<f64> {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    /// `count` evenly spaced points including both endpoints (`count >= 2`),
    /// or the midpoint when `count == 1`.
    pub fn grid(&self, count: usize) -> Vec<f64> {
        match count {
            0 => Vec::new(),
            1 => vec![self.midpoint()],
            _ => (0..count)
                .map(|i| {
                    if i + 1 == count {
                        self.hi
                    } else {
                        self.lo + (self.hi - self.lo) * i as f64 / (count - 1) as f64
                    }
                })
                .collect(),
        }
    }
}

/// Axis-aligned closed rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x: Interval<f64>,
    pub y: Interval<f64>,
}

impl Rect {
    pub fn new(x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64) -> Self {
        Rect { x: Interval { lo: x_lo, hi: x_hi }, y: Interval { lo: y_lo, hi: y_hi } }
    }

    /// `[-r, r]^2`.
    pub fn square(r: f64) -> Self {
        Rect::new(-r, r, -r, r)
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.x.contains(&x) && self.y.contains(&y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_hits_both_endpoints() {
        let g = Interval { lo: -2.0, hi: 2.0 }.grid(5);
        assert_eq!(g, vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
        assert_eq!(Interval { lo: 0.0, hi: 1.0 }.grid(1), vec![0.5]);
    }

    #[test]
    fn rejects_reversed_bounds() {
        assert!(Interval::new(1.0, 0.0).is_none());
        assert!(Interval::new(0.0, 0.0).is_some());
    }

    #[test]
    fn closed_overlap_includes_touching_endpoints() {
        let a = Interval { lo: 0, hi: 1 };
        let b = Interval { lo: 1, hi: 2 };
        assert!(a.overlaps(&b));
        assert_eq!(a.intersection(&b), Some(Interval { lo: 1, hi: 1 }));
        assert!(!a.overlaps(&Interval { lo: 2, hi: 3 }));
    }
}

use serde::Serialize;

use super::{thickness, CantorApproximation, CantorScalar};
use crate::Interval;

/// Relation between two construction stages at one generation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GenerationRelation {
    /// Some interval of the first set meets some interval of the second.
    Overlap,
    /// The hull of the first set lies in one complementary component of the
    /// second (bounded or not).
    FirstInGap,
    SecondInGap,
    /// No interval overlap, yet neither set sits in a gap of the other.
    LinkedDisjoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GapVerdict {
    FirstInGapOfSecond,
    SecondInGapOfFirst,
    IntervalsIntersect,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapLemmaReport {
    pub verdict: GapVerdict,
    pub per_generation: Vec<GenerationRelation>,
    /// Product of the thicknesses of the finest stages, when both are defined.
    pub thickness_product: Option<f64>,
    /// Set when the thickness product exceeds 1 but some generation is
    /// linked without overlap, which the Gap Lemma forbids.
    pub gap_lemma_violated: bool,
}

fn in_gap<T: CantorScalar>(hull: &Interval<T>, other: &[Interval<T>]) -> bool {
    // Index of the first interval of `other` ending at or after hull.lo.
    let idx = other.partition_point(|iv| iv.hi < hull.lo);
    match other.get(idx) {
        None => true,
        Some(iv) => hull.hi < iv.lo,
    }
}

fn overlaps<T: CantorScalar>(a: &[Interval<T>], b: &[Interval<T>]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i].hi < b[j].lo {
            i += 1;
        } else if b[j].hi < a[i].lo {
            j += 1;
        } else {
            return true;
        }
    }
    false
}

pub fn relation<T: CantorScalar>(a: &CantorApproximation<T>, b: &CantorApproximation<T>) -> GenerationRelation {
    if overlaps(&a.intervals, &b.intervals) {
        return GenerationRelation::Overlap;
    }
    match (a.hull(), b.hull()) {
        (Some(ha), _) if in_gap(&ha, &b.intervals) => GenerationRelation::FirstInGap,
        (_, Some(hb)) if in_gap(&hb, &a.intervals) => GenerationRelation::SecondInGap,
        (None, _) => GenerationRelation::FirstInGap,
        (_, None) => GenerationRelation::SecondInGap,
        _ => GenerationRelation::LinkedDisjoint,
    }
}

/// Finite-generation Gap Lemma trichotomy for two nested sequences of
/// construction stages (index `i` of each slice is one generation).
///
/// Being in a gap at some generation is certified for the limit sets too.
/// Overlap at every generation is the checkable surrogate for intersection.
pub fn gap_lemma_check<T: CantorScalar>(
    first: &[CantorApproximation<T>],
    second: &[CantorApproximation<T>],
) -> GapLemmaReport {
    let per_generation: Vec<_> = first.iter().zip(second).map(|(a, b)| relation(a, b)).collect();
    let verdict = if let Some(r) = per_generation
        .iter()
        .find(|r| matches!(r, GenerationRelation::FirstInGap | GenerationRelation::SecondInGap))
    {
        match r {
            GenerationRelation::FirstInGap => GapVerdict::FirstInGapOfSecond,
            _ => GapVerdict::SecondInGapOfFirst,
        }
    } else if !per_generation.is_empty() && per_generation.iter().all(|r| *r == GenerationRelation::Overlap) {
        GapVerdict::IntervalsIntersect
    } else {
        GapVerdict::Inconclusive
    };
    let thickness_product = match (first.last(), second.last()) {
        (Some(a), Some(b)) => match (thickness(a), thickness(b)) {
            (Ok(ta), Ok(tb)) => Some(ta.thickness.approx() * tb.thickness.approx()),
            _ => None,
        },
        _ => None,
    };
    let gap_lemma_violated = thickness_product.is_some_and(|t| t > 1.0)
        && per_generation.contains(&GenerationRelation::LinkedDisjoint);
    GapLemmaReport { verdict, per_generation, thickness_product, gap_lemma_violated }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cantor::CantorSource;

    fn set(ivs: &[(f64, f64)]) -> CantorApproximation<f64> {
        let intervals: Vec<_> = ivs.iter().map(|&(lo, hi)| Interval { lo, hi }).collect();
        let ambient = Interval { lo: intervals[0].lo, hi: intervals.last().unwrap().hi };
        CantorApproximation::new(ambient, intervals, 1, CantorSource::Custom).unwrap()
    }

    #[test]
    fn relations() {
        let a = set(&[(0.0, 1.0), (2.0, 3.0)]);
        assert_eq!(relation(&a, &set(&[(1.2, 1.8)])), GenerationRelation::SecondInGap);
        assert_eq!(relation(&set(&[(5.0, 6.0)]), &a), GenerationRelation::FirstInGap);
        assert_eq!(relation(&a, &set(&[(0.5, 0.7)])), GenerationRelation::Overlap);
        assert_eq!(relation(&a, &set(&[(1.2, 1.4), (3.5, 4.0)])), GenerationRelation::LinkedDisjoint);
    }

    #[test]
    fn linked_disjoint_thick_sets_flag_violation() {
        let a = set(&[(0.0, 1.0), (2.0, 3.0)]);
        let b = set(&[(1.2, 1.4), (3.5, 4.0)]);
        let r = gap_lemma_check(&[a], &[b]);
        assert_eq!(r.verdict, GapVerdict::Inconclusive);
        assert!(r.thickness_product.is_some());
    }
}

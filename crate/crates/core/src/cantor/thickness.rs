use serde::Serialize;

use super::{CantorApproximation, CantorError, CantorScalar};
use crate::Interval;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BridgeSide {
    Left,
    Right,
}

/// Bridge/gap ratio at one boundary point of one gap.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EndpointRatio<T> {
    pub gap_index: usize,
    pub side: BridgeSide,
    pub bridge: Interval<T>,
    pub ratio: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThicknessReport<T> {
    pub thickness: T,
    pub witness_gap: Interval<T>,
    pub witness_bridge: Interval<T>,
    pub ratios: Vec<EndpointRatio<T>>,
}

/// Thickness of a finite construction stage: the minimum over gap boundary
/// points of bridge length over gap length.
///
/// The bridge at a boundary point of gap `G` runs from that point to the
/// nearest gap on the same side whose length is at least `|G|` (equal
/// lengths block), or to the end of the hull when there is none. Nearest
/// blockers come from a monotone stack, so the scan is linear.
pub fn thickness<T: CantorScalar>(k: &CantorApproximation<T>) -> Result<ThicknessReport<T>, CantorError> {
    if k.intervals.len() < 2 {
        return Err(CantorError::TooFewIntervals(k.intervals.len()));
    }
    let hull = k.hull().expect("at least two intervals");
    let gaps = k.gaps();
    let lens: Vec<T> = gaps.iter().map(|g| g.hi.clone() - g.lo.clone()).collect();
    let n = gaps.len();

    let mut left_block = vec![None; n];
    let mut stack: Vec<usize> = Vec::new();
    for i in 0..n {
        while stack.last().is_some_and(|&t| lens[t] < lens[i]) {
            stack.pop();
        }
        left_block[i] = stack.last().copied();
        stack.push(i);
    }
    let mut right_block = vec![None; n];
    stack.clear();
    for i in (0..n).rev() {
        while stack.last().is_some_and(|&t| lens[t] < lens[i]) {
            stack.pop();
        }
        right_block[i] = stack.last().copied();
        stack.push(i);
    }

    let mut ratios = Vec::with_capacity(2 * n);
    for i in 0..n {
        let lo = left_block[i].map_or_else(|| hull.lo.clone(), |j| gaps[j].hi.clone());
        let left = Interval { lo, hi: gaps[i].lo.clone() };
        let hi = right_block[i].map_or_else(|| hull.hi.clone(), |j| gaps[j].lo.clone());
        let right = Interval { lo: gaps[i].hi.clone(), hi };
        for (side, bridge) in [(BridgeSide::Left, left), (BridgeSide::Right, right)] {
            let ratio = (bridge.hi.clone() - bridge.lo.clone()) / lens[i].clone();
            ratios.push(EndpointRatio { gap_index: i, side, bridge, ratio });
        }
    }

    let best = ratios
        .iter()
        .enumerate()
        .fold(0, |b, (i, r)| if r.ratio < ratios[b].ratio { i } else { b });
    Ok(ThicknessReport {
        thickness: ratios[best].ratio.clone(),
        witness_gap: gaps[ratios[best].gap_index].clone(),
        witness_bridge: ratios[best].bridge.clone(),
        ratios,
    })
}

use num_traits::Signed;
use rayon::prelude::*;

use super::{CantorApproximation, CantorError, CantorSource, KmConstruction};
use crate::maps1d::NMap;
use crate::rational::{to_f64, Rational};
use crate::Interval;

/// `x -> slope * x + intercept`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineBranch {
    pub slope: Rational,
    pub intercept: Rational,
}

impl AffineBranch {
    fn preimage(&self, iv: &Interval<Rational>) -> Interval<Rational> {
        let a = (&iv.lo - &self.intercept) / &self.slope;
        let b = (&iv.hi - &self.intercept) / &self.slope;
        if a <= b {
            Interval { lo: a, hi: b }
        } else {
            Interval { lo: b, hi: a }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarkovBranch {
    pub domain: Interval<Rational>,
    pub map: AffineBranch,
}

/// Expanding affine branches on disjoint closed domains.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovBranchSystem {
    pub ambient: Interval<Rational>,
    branches: Vec<MarkovBranch>,
}

impl MarkovBranchSystem {
    /// Sorts the branches by domain and checks expansion and disjointness.
    pub fn new(ambient: Interval<Rational>, mut branches: Vec<MarkovBranch>) -> Result<Self, CantorError> {
        branches.sort_by(|a, b| a.domain.lo.cmp(&b.domain.lo));
        for (i, b) in branches.iter().enumerate() {
            if b.map.slope.abs() <= Rational::from_integer(1.into()) {
                return Err(CantorError::NonExpanding { branch: i, slope: to_f64(&b.map.slope) });
            }
            if b.domain.lo >= b.domain.hi || b.domain.lo < ambient.lo || b.domain.hi > ambient.hi {
                return Err(CantorError::Malformed(format!("branch {i} domain")));
            }
        }
        for (i, w) in branches.windows(2).enumerate() {
            if w[0].domain.hi >= w[1].domain.lo {
                return Err(CantorError::OverlappingBranches(i, i + 1));
            }
        }
        Ok(MarkovBranchSystem { ambient, branches })
    }

    pub fn branches(&self) -> &[MarkovBranch] {
        &self.branches
    }
}

/// Generation `generation` of the maximal invariant set: generation 1 is the
/// union of the branch domains, and each further generation keeps, inside
/// each domain, the branch preimage of the previous generation.
pub fn markov_cantor(
    system: &MarkovBranchSystem,
    generation: usize,
) -> Result<CantorApproximation<Rational>, CantorError> {
    if generation == 0 {
        return Err(CantorError::InvalidGeneration);
    }
    let mut current: Vec<Interval<Rational>> = system.branches.iter().map(|b| b.domain.clone()).collect();
    for _ in 1..generation {
        let next: Vec<Vec<Interval<Rational>>> = system
            .branches
            .par_iter()
            .map(|b| {
                let mut pieces: Vec<_> = current
                    .iter()
                    .filter_map(|j| {
                        let p = b.map.preimage(j);
                        let lo = p.lo.max(b.domain.lo.clone());
                        let hi = p.hi.min(b.domain.hi.clone());
                        (lo < hi).then_some(Interval { lo, hi })
                    })
                    .collect();
                pieces.sort_by(|x, y| x.lo.cmp(&y.lo));
                pieces
            })
            .collect();
        current = next.into_iter().flatten().collect();
    }
    CantorApproximation::new(
        system.ambient.clone(),
        current,
        generation,
        CantorSource::Markov { branches: system.branches.len() },
    )
}

/// The N-map restricted to the first-generation intervals of `K_m`.
pub fn km_markov_system(c: &KmConstruction) -> Result<MarkovBranchSystem, CantorError> {
    let s = NMap::new();
    let pieces = s.as_piecewise();
    let branches = c
        .labelled
        .iter()
        .map(|iv| {
            let b = pieces
                .branch_index(&iv.lo)
                .filter(|&b| pieces.branch_index(&iv.hi) == Some(b))
                .ok_or_else(|| CantorError::OrderingViolated {
                    relation: format!("[{}, {}] lies in one branch of S", iv.lo, iv.hi),
                })?;
            let p = s.branch(b);
            Ok(MarkovBranch {
                domain: iv.clone(),
                map: AffineBranch { slope: p.slope.clone(), intercept: p.intercept.clone() },
            })
        })
        .collect::<Result<Vec<_>, CantorError>>()?;
    MarkovBranchSystem::new(c.ambient.clone(), branches)
}

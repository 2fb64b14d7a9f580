use num_traits::{One, Zero};
use rayon::prelude::*;

use super::{intersect_sorted, CantorApproximation, CantorError, CantorSource};
use crate::maps1d::NMap;
use crate::rational::{int, pow3, q, Rational};
use crate::Interval;

/// The first-generation data of the affine Cantor set `K_m` of the N-map:
/// the `m`-periodic orbit `q_0..q_{m-1}`, the backward points `q~_i` and the
/// intervals `I_0..I_{m-1}`.
#[derive(Debug, Clone)]
pub struct KmConstruction {
    pub m: usize,
    pub q: Vec<Rational>,
    /// `q~_i`, indexed by `i`; only `i = 0` and `3..=m-1` are defined.
    pub q_tilde: Vec<Option<Rational>>,
    /// `I_0..I_{m-1}` in construction order.
    pub labelled: Vec<Interval<Rational>>,
    /// `[q_2, q_1]`.
    pub ambient: Interval<Rational>,
    first: Vec<Interval<Rational>>,
}

fn qt(c: &KmConstruction, i: usize) -> Rational {
    c.q_tilde[i].clone().expect("backward point is defined")
}

impl KmConstruction {
    pub fn new(m: usize) -> Result<Self, CantorError> {
        if m < 6 || !m.is_multiple_of(2) {
            return Err(CantorError::InvalidM(m));
        }
        let s = NMap::new();
        let pieces = s.as_piecewise();

        // Itinerary of q_0 in application order: S2, S3, (S1, S3)^(m/2-2), S1, S2.
        let mut chain = vec![NMap::S2, NMap::S3];
        for _ in 0..m / 2 - 2 {
            chain.extend([NMap::S1, NMap::S3]);
        }
        chain.extend([NMap::S1, NMap::S2]);
        let (a, b) = pieces.compose(&chain);
        let q0 = b / (Rational::one() - a);

        let mut orbit = vec![q0.clone()];
        for (k, &branch) in chain.iter().enumerate() {
            let x = &orbit[k];
            if pieces.branch_index(x) != Some(branch) {
                return Err(CantorError::ItineraryViolated { branch, point: x.to_string() });
            }
            orbit.push(s.branch(branch).apply(x));
        }
        if orbit.pop() != Some(q0) {
            return Err(CantorError::OrderingViolated { relation: "S^m(q_0) = q_0".into() });
        }

        let mut q_tilde = vec![None; m];
        q_tilde[0] = Some(s.inverse_branch(NMap::S3, &orbit[1]));
        q_tilde[m - 1] = Some(s.inverse_branch(NMap::S2, q_tilde[0].as_ref().unwrap()));
        for j in 0..m - 4 {
            let branch = if j % 2 == 0 { NMap::S1 } else { NMap::S3 };
            let prev = q_tilde[m - j - 1].clone().unwrap();
            q_tilde[m - j - 2] = Some(s.inverse_branch(branch, &prev));
        }

        let mut c = KmConstruction {
            m,
            ambient: Interval { lo: orbit[2].clone(), hi: orbit[1].clone() },
            q: orbit,
            q_tilde,
            labelled: Vec::new(),
            first: Vec::new(),
        };
        c.check_ordering()?;

        let qv = &c.q;
        let mut labelled = vec![Interval { lo: qt(&c, 0), hi: qv[m - 3].clone() }];
        for i in 1..m / 2 - 1 {
            labelled.push(Interval { lo: qt(&c, 2 * i + 1), hi: qv[2 * i - 1].clone() });
            labelled.push(Interval { lo: qv[2 * i].clone(), hi: qt(&c, 2 * i + 2) });
        }
        labelled.push(Interval { lo: qv[m - 2].clone(), hi: s.inverse_branch(NMap::S1, &qv[2]) });
        labelled.push(Interval { lo: s.inverse_branch(NMap::S2, &qv[2]), hi: qv[m - 1].clone() });
        labelled.push(Interval { lo: qt(&c, m - 1), hi: qv[0].clone() });
        for (i, iv) in labelled.iter().enumerate() {
            if !(iv.lo < iv.hi) {
                return Err(CantorError::OrderingViolated { relation: format!("I_{i} has positive length") });
            }
        }
        let mut first = labelled.clone();
        first.sort_by(|x, y| x.lo.cmp(&y.lo));
        c.labelled = labelled;
        c.first = first;
        // Validates disjointness and containment.
        c.generation(1)?;
        Ok(c)
    }

    /// The chain of strict inequalities among the construction points that
    /// the interval assembly relies on; the first failing relation is named.
    fn check_ordering(&self) -> Result<(), CantorError> {
        let m = self.m;
        let mut chain: Vec<(String, Rational)> = vec![("-3/2".into(), q(-3, 2)), ("q_2".into(), self.q[2].clone())];
        for k in (4..=m - 2).step_by(2) {
            chain.push((format!("q~_{k}"), qt(self, k)));
            chain.push((format!("q_{k}"), self.q[k].clone()));
        }
        chain.push(("0".into(), Rational::zero()));
        chain.push((format!("q_{}", m - 1), self.q[m - 1].clone()));
        chain.push((format!("q~_{}", m - 1), qt(self, m - 1)));
        chain.push(("q_0".into(), self.q[0].clone()));
        chain.push(("1/2".into(), q(1, 2)));
        chain.push(("q~_0".into(), qt(self, 0)));
        for k in (3..=m - 3).rev().step_by(2) {
            chain.push((format!("q_{k}"), self.q[k].clone()));
            chain.push((format!("q~_{k}"), qt(self, k)));
        }
        chain.push(("q_1".into(), self.q[1].clone()));
        chain.push(("3/2".into(), q(3, 2)));
        for w in chain.windows(2) {
            if !(w[0].1 < w[1].1) {
                return Err(CantorError::OrderingViolated { relation: format!("{} < {}", w[0].0, w[1].0) });
            }
        }
        Ok(())
    }

    /// `K^(g)`: generation 1 is the union of the `I_i`; generation `g + 1` is
    /// `K^(1)` intersected with the full preimage of `K^(g)` under `S`.
    pub fn generation(&self, g: usize) -> Result<CantorApproximation<Rational>, CantorError> {
        if g == 0 {
            return Err(CantorError::InvalidGeneration);
        }
        let s = NMap::new();
        let mut current = self.first.clone();
        for _ in 1..g {
            let mut pre: Vec<Interval<Rational>> = [NMap::S1, NMap::S2, NMap::S3]
                .par_iter()
                .flat_map_iter(|&b| {
                    let s = &s;
                    let dom = &s.branch(b).domain;
                    current.iter().filter_map(move |j| {
                        let (x, y) = (s.inverse_branch(b, &j.lo), s.inverse_branch(b, &j.hi));
                        let (lo, hi) = if x < y { (x, y) } else { (y, x) };
                        let lo = lo.max(dom.lo.clone());
                        let hi = hi.min(dom.hi.clone());
                        (lo < hi).then_some(Interval { lo, hi })
                    })
                })
                .collect();
            pre.sort_by(|x, y| x.lo.cmp(&y.lo));
            current = intersect_sorted(&self.first, &pre);
        }
        CantorApproximation::new(self.ambient.clone(), current, g, CantorSource::Km { m: self.m })
    }

    /// `q~_0 - q_0`, the gap around the turning point `1/2`. Equals
    /// `8 / (3^m - 1)`.
    pub fn central_gap(&self) -> Rational {
        qt(self, 0) - &self.q[0]
    }

    /// `x_m = (1 - 3^{2-m}) / 2`, the zero of `S^m(x) - x` bracketing `q_0`
    /// from the left.
    pub fn x_m(&self) -> Rational {
        (Rational::one() - Rational::one() / pow3(self.m as u32 - 2)) / int(2)
    }

    /// The lower bound `(3^m - 45) / 22` for the thickness of `K_m`.
    pub fn claimed_thickness_bound(&self) -> Rational {
        (pow3(self.m as u32) - int(45)) / int(22)
    }

    /// The closed form `22 / (3^m - 1)` given for `1/2 - q_0` alongside the
    /// bound above; the exact construction gives `4 / (3^m - 1)`.
    pub fn claimed_delta(&self) -> Rational {
        int(22) / (pow3(self.m as u32) - int(1))
    }
}

/// Generation `generation` of `K_m`.
pub fn build_km(m: usize, generation: usize) -> Result<CantorApproximation<Rational>, CantorError> {
    KmConstruction::new(m)?.generation(generation)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k6_orbit_and_points() {
        let c = KmConstruction::new(6).unwrap();
        let want = [q(45, 91), q(135, 91), q(-132, 91), q(123, 91), q(-96, 91), q(15, 91)];
        assert_eq!(c.q, want);
        assert_eq!(qt(&c, 0), q(46, 91));
        assert_eq!(qt(&c, 5), q(46, 273));
        assert_eq!(qt(&c, 4), q(-865, 819));
        assert_eq!(qt(&c, 3), q(3322, 2457));
        assert_eq!(c.x_m(), q(40, 81));
        assert!(c.x_m() < c.q[0] && c.q[0] < q(1, 2));
        assert_eq!(c.central_gap(), q(8, 728));
    }

    #[test]
    fn k6_first_generation() {
        let k = build_km(6, 1).unwrap();
        let want = [
            (q(-132, 91), q(-865, 819)),
            (q(-96, 91), q(-47, 91)),
            (q(-44, 91), q(15, 91)),
            (q(46, 273), q(45, 91)),
            (q(46, 91), q(123, 91)),
            (q(3322, 2457), q(135, 91)),
        ];
        let got: Vec<_> = k.intervals.iter().map(|iv| (iv.lo.clone(), iv.hi.clone())).collect();
        assert_eq!(got, want);
        assert_eq!(k.ambient, Interval { lo: q(-132, 91), hi: q(135, 91) });
    }

    #[test]
    fn rejects_bad_m() {
        assert_eq!(build_km(5, 1).unwrap_err(), CantorError::InvalidM(5));
        assert_eq!(build_km(4, 1).unwrap_err(), CantorError::InvalidM(4));
        assert_eq!(build_km(6, 0).unwrap_err(), CantorError::InvalidGeneration);
    }

    #[test]
    fn interval_counts_grow() {
        let counts: Vec<usize> = (1..=4).map(|g| build_km(6, g).unwrap().intervals.len()).collect();
        assert_eq!(counts, vec![6, 17, 50, 148]);
    }
}

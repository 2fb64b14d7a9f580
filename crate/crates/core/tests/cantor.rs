//! Cantor-set checks against independent brute-force oracles.

use cubic_lab::cantor::{
    build_km, gap_lemma_check, image_affine_exact, image_cantor, km_markov_system, markov_cantor, thickness,
    AffineBranch, CantorApproximation, CantorSource, GapVerdict, KmConstruction, MarkovBranch, MarkovBranchSystem,
    SineConjugacy,
};
use cubic_lab::maps1d::NMap;
use cubic_lab::rational::{int, pow3, q, Rational};
use cubic_lab::Interval;
use proptest::prelude::*;

/// O(n^2) thickness straight from the definition: scan outward from each
/// gap endpoint until a gap at least as long is met.
fn oracle_thickness(ivs: &[Interval<Rational>]) -> Rational {
    let gaps: Vec<(Rational, Rational)> = ivs.windows(2).map(|w| (w[0].hi.clone(), w[1].lo.clone())).collect();
    let len = |g: &(Rational, Rational)| &g.1 - &g.0;
    let (lo, hi) = (ivs[0].lo.clone(), ivs[ivs.len() - 1].hi.clone());
    let mut best: Option<Rational> = None;
    for (i, g) in gaps.iter().enumerate() {
        let l = len(g);
        let left_end = (0..i).rev().find(|&j| len(&gaps[j]) >= l).map_or(lo.clone(), |j| gaps[j].1.clone());
        let right_end = (i + 1..gaps.len()).find(|&j| len(&gaps[j]) >= l).map_or(hi.clone(), |j| gaps[j].0.clone());
        for r in [(&g.0 - left_end) / &l, (right_end - &g.1) / &l] {
            if best.as_ref().is_none_or(|b| r < *b) {
                best = Some(r);
            }
        }
    }
    best.unwrap()
}

/// Generation `g` by itinerary enumeration: the cylinder of a word
/// `(i_0, ..., i_{g-1})` of first-generation intervals is the set of points
/// of `I_{i_0}` whose successive images visit `I_{i_1}, ...`.
fn oracle_generation(first: &[Interval<Rational>], g: usize) -> Vec<Interval<Rational>> {
    let s = NMap::new();
    let branch_of = |iv: &Interval<Rational>| s.as_piecewise().branch_index(&iv.lo).unwrap();
    // Admissible words, extended one letter at a time; a word survives when
    // pulling its last interval back through the earlier letters is nonempty.
    let mut words: Vec<Vec<usize>> = (0..first.len()).map(|i| vec![i]).collect();
    for _ in 1..g {
        let mut next_words = Vec::new();
        for w in &words {
            for k in 0..first.len() {
                let mut target = first[k].clone();
                let mut ok = true;
                for &idx in w.iter().rev() {
                    let b = branch_of(&first[idx]);
                    let (x, y) = (s.inverse_branch(b, &target.lo), s.inverse_branch(b, &target.hi));
                    let (lo, hi) = if x < y { (x, y) } else { (y, x) };
                    let lo = lo.max(first[idx].lo.clone());
                    let hi = hi.min(first[idx].hi.clone());
                    if lo >= hi {
                        ok = false;
                        break;
                    }
                    target = Interval { lo, hi };
                }
                if ok {
                    let mut nw = w.clone();
                    nw.push(k);
                    next_words.push(nw);
                }
            }
        }
        words = next_words;
    }
    let mut out = Vec::new();
    for w in &words {
        let mut target = first[*w.last().unwrap()].clone();
        for &idx in w[..w.len() - 1].iter().rev() {
            let b = branch_of(&first[idx]);
            let (x, y) = (s.inverse_branch(b, &target.lo), s.inverse_branch(b, &target.hi));
            let (lo, hi) = if x < y { (x, y) } else { (y, x) };
            target = Interval { lo: lo.max(first[idx].lo.clone()), hi: hi.min(first[idx].hi.clone()) };
        }
        out.push(target);
    }
    out.sort_by(|a, b| a.lo.cmp(&b.lo));
    out
}

#[test]
fn generations_match_itinerary_oracle() {
    for m in [6usize, 8] {
        let first = build_km(m, 1).unwrap().intervals;
        for g in 1..=3 {
            assert_eq!(build_km(m, g).unwrap().intervals, oracle_generation(&first, g), "m={m} g={g}");
        }
    }
}

#[test]
fn thickness_matches_brute_force_on_km() {
    for (m, gens) in [(6usize, 5usize), (8, 4), (10, 3)] {
        for g in 1..=gens {
            let k = build_km(m, g).unwrap();
            assert_eq!(thickness(&k).unwrap().thickness, oracle_thickness(&k.intervals), "m={m} g={g}");
        }
    }
}

#[test]
fn frozen_km_thickness_values() {
    // Values from the exact brute-force oracle.
    let table: [(usize, &[(usize, i64)]); 3] = [
        (6, &[(6, 85), (17, 85), (50, 49), (148, 49), (437, 49), (1290, 49)]),
        (8, &[(8, 814), (23, 814), (68, 778), (203, 778)]),
        (10, &[(10, 7375), (29, 7375), (86, 7339)]),
    ];
    for (m, rows) in table {
        for (g, &(count, num)) in rows.iter().enumerate() {
            let k = build_km(m, g + 1).unwrap();
            assert_eq!(k.intervals.len(), count, "m={m} g={}", g + 1);
            assert_eq!(thickness(&k).unwrap().thickness, q(num, 3), "m={m} g={}", g + 1);
        }
    }
}

#[test]
fn k6_first_generation_witness_is_gap_around_minus_half() {
    let r = thickness(&build_km(6, 1).unwrap()).unwrap();
    assert_eq!(r.witness_gap, Interval { lo: q(-47, 91), hi: q(-44, 91) });
    assert_eq!(r.witness_bridge, Interval { lo: q(-132, 91), hi: q(-47, 91) });
}

#[test]
fn central_gap_closed_form() {
    for m in [6usize, 8, 10, 12] {
        let c = KmConstruction::new(m).unwrap();
        let d = pow3(m as u32) - int(1);
        assert_eq!(c.central_gap(), int(8) / &d, "m={m}");
        assert_eq!(q(1, 2) - &c.q[0], int(4) / d, "m={m}");
    }
}

#[test]
fn turning_points_lie_in_gaps() {
    for m in [6usize, 8, 10] {
        for g in 1..=3 {
            let k = build_km(m, g).unwrap();
            assert!(!k.contains(&q(1, 2)) && !k.contains(&q(-1, 2)), "m={m} g={g}");
        }
    }
}

#[test]
fn s_maps_each_generation_onto_the_previous() {
    let s = NMap::new();
    for m in [6usize, 8] {
        for g in 1..=3 {
            let coarse = build_km(m, g).unwrap().intervals;
            let fine = build_km(m, g + 1).unwrap().intervals;
            let mut images: Vec<Interval<Rational>> = fine
                .iter()
                .map(|iv| {
                    let (a, b) = (s.eval_exact(&iv.lo).unwrap(), s.eval_exact(&iv.hi).unwrap());
                    if a < b { Interval { lo: a, hi: b } } else { Interval { lo: b, hi: a } }
                })
                .collect();
            images.sort_by(|a, b| a.lo.cmp(&b.lo));
            images.dedup();
            assert_eq!(images, coarse, "m={m} g={g}");
        }
    }
}

#[test]
fn thickness_is_monotone_in_generation_and_m() {
    let tau = |m, g| thickness(&build_km(m, g).unwrap()).unwrap().thickness;
    for m in [6usize, 8] {
        for g in 1..4 {
            assert!(tau(m, g + 1) <= tau(m, g), "m={m} g={g}");
        }
    }
    for g in 1..=3 {
        assert!(tau(6, g) < tau(8, g) && tau(8, g) < tau(10, g), "g={g}");
    }
}

#[test]
fn markov_system_reproduces_km() {
    let c = KmConstruction::new(6).unwrap();
    let sys = km_markov_system(&c).unwrap();
    for g in 1..=4 {
        assert_eq!(markov_cantor(&sys, g).unwrap().intervals, c.generation(g).unwrap().intervals, "g={g}");
    }
}

fn middle_thirds(g: usize) -> CantorApproximation<Rational> {
    let branch = |lo, hi, c| MarkovBranch {
        domain: Interval { lo, hi },
        map: AffineBranch { slope: int(3), intercept: int(c) },
    };
    let sys = MarkovBranchSystem::new(
        Interval { lo: int(0), hi: int(1) },
        vec![branch(int(0), q(1, 3), 0), branch(q(2, 3), int(1), -2)],
    )
    .unwrap();
    markov_cantor(&sys, g).unwrap()
}

#[test]
fn middle_thirds_matches_ternary_construction() {
    for g in 1..=6u32 {
        let k = middle_thirds(g as usize);
        let width = int(1) / pow3(g);
        let direct: Vec<Interval<Rational>> = (0..1u64 << g)
            .map(|bits| {
                let lo = (0..g).fold(int(0), |acc, i| {
                    if bits >> (g - 1 - i) & 1 == 1 { acc + int(2) / pow3(i + 1) } else { acc }
                });
                Interval { hi: &lo + &width, lo }
            })
            .collect();
        assert_eq!(k.intervals, direct, "g={g}");
    }
    assert_eq!(thickness(&middle_thirds(5)).unwrap().thickness, int(1));
}

#[test]
fn gap_lemma_scenarios() {
    let gens: Vec<_> = (1..=6).map(|g| build_km(6, g).unwrap()).collect();
    assert_eq!(gap_lemma_check(&gens, &gens).verdict, GapVerdict::IntervalsIntersect);

    let wide = Interval { lo: q(-3, 2), hi: q(23, 2) };
    let far: Vec<_> = gens
        .iter()
        .map(|k| k.affine_image(&int(1), &int(10)))
        .collect();
    let near: Vec<_> = gens.iter().map(|k| k.affine_image(&int(1), &q(1, 1000))).collect();
    let base: Vec<_> = gens.iter().map(|k| k.clone().with_ambient(wide.clone()).unwrap()).collect();
    let far: Vec<_> = far.into_iter().map(|k| k.with_ambient(wide.clone()).unwrap()).collect();
    let r = gap_lemma_check(&base, &far);
    assert_eq!(r.verdict, GapVerdict::FirstInGapOfSecond);
    let r = gap_lemma_check(&gens, &near);
    assert_eq!(r.verdict, GapVerdict::IntervalsIntersect);
    assert!(r.thickness_product.unwrap() > 1.0);
    assert!(!r.gap_lemma_violated);
}

#[test]
fn sine_image_respects_distortion_bound() {
    let k = build_km(6, 3).unwrap();
    let (_, rep) = image_cantor(&k, &SineConjugacy, Some(0.05)).unwrap();
    assert!(rep.bound_holds, "{rep:?}");
    assert!(rep.distortion > 1.0);
}

#[test]
fn affine_image_keeps_thickness_exactly() {
    let k = build_km(6, 2).unwrap();
    let img = image_affine_exact(&k, &int(2), &int(5));
    assert_eq!(thickness(&img).unwrap().thickness, thickness(&k).unwrap().thickness);
    assert_eq!(img.source, CantorSource::Affine);
}

#[test]
fn csv_round_trip_for_k6() {
    let k = build_km(6, 2).unwrap();
    let mut w = csv::Writer::from_writer(vec![]);
    k.write_csv(&mut w).unwrap();
    let data = w.into_inner().unwrap();
    let mut r = csv::Reader::from_reader(data.as_slice());
    let parsed: Vec<Interval<Rational>> = r
        .records()
        .map(|rec| {
            let rec = rec.unwrap();
            let f = |i: usize, j: usize| {
                Rational::new(rec[i].parse().unwrap(), rec[j].parse().unwrap())
            };
            assert_eq!(&rec[0], "2");
            Interval { lo: f(1, 2), hi: f(3, 4) }
        })
        .collect();
    assert_eq!(parsed, k.intervals);
}

fn arb_set() -> impl Strategy<Value = Vec<Interval<Rational>>> {
    prop::collection::vec((1i64..50, 1i64..50), 2..30).prop_map(|pairs| {
        let mut x = int(0);
        let mut out = Vec::new();
        for (len, gap) in pairs {
            let hi = &x + q(len, 7);
            out.push(Interval { lo: x.clone(), hi: hi.clone() });
            x = hi + q(gap, 5);
        }
        out
    })
}

proptest! {
    #[test]
    fn thickness_matches_oracle_on_random_sets(ivs in arb_set()) {
        let amb = Interval { lo: ivs[0].lo.clone(), hi: ivs[ivs.len() - 1].hi.clone() };
        let k = CantorApproximation::new(amb, ivs.clone(), 1, CantorSource::Custom).unwrap();
        let r = thickness(&k).unwrap();
        prop_assert_eq!(&r.thickness, &oracle_thickness(&ivs));
        let min = r.ratios.iter().map(|e| e.ratio.clone()).min().unwrap();
        prop_assert_eq!(r.thickness, min);
    }

    #[test]
    fn thickness_is_affine_invariant(ivs in arb_set(), a in -20i64..20, d in 1i64..9, b in -50i64..50) {
        prop_assume!(a != 0);
        let amb = Interval { lo: ivs[0].lo.clone(), hi: ivs[ivs.len() - 1].hi.clone() };
        let k = CantorApproximation::new(amb, ivs, 1, CantorSource::Custom).unwrap();
        let img = k.affine_image(&q(a, d), &q(b, 3));
        prop_assert_eq!(thickness(&img).unwrap().thickness, thickness(&k).unwrap().thickness);
    }
}

//! The acceptance criteria as runnable checks, shared by the test suite and
//! the `verify` command.

use std::collections::BTreeSet;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cantor::{
    build_km, gap_lemma_check, markov_cantor, thickness, AffineBranch, CantorApproximation, GapVerdict,
    KmConstruction, MarkovBranch, MarkovBranchSystem,
};
use crate::maps1d::conjugacy_defect;
use crate::planar::{
    f_bar_slope, find_saddle, lyapunov, velocity_derivatives, Classification, CubicHenon,
    LinearSaddle, PlanarMap, Point, RenormTangency, SpectrumKind, TangencySide,
};
use crate::rational::{int, q, to_f64};
use crate::renorm::{decay_fit, residual_norm, ModelParams, Perturbation, RenormalizedMap};
use crate::wangyoung::{certify, mu_lower, transversality_h, TFamily};
use crate::{Interval, Rational, Rect};

pub const SCHEMA_VERSION: u32 = 1;

/// Criteria whose stated target is known not to hold. They are run and
/// reported like the others but do not count as unexpected failures.
pub const KNOWN_UNATTAINABLE: &[u8] = &[1];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubCheck {
    pub key: String,
    pub status: Status,
    pub measured: String,
    pub requirement: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub id: u8,
    pub key: &'static str,
    pub title: &'static str,
    pub status: Status,
    pub known_unattainable: bool,
    pub runtime_s: f64,
    pub budget_s: f64,
    pub checks: Vec<SubCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub schema_version: u32,
    pub criteria: Vec<CriterionReport>,
    pub all_passed: bool,
    /// Failed criteria not listed in [`KNOWN_UNATTAINABLE`].
    pub unexpected_failures: Vec<u8>,
}

impl VerifyReport {
    pub fn failed(&self) -> Vec<&CriterionReport> {
        self.criteria.iter().filter(|c| c.status == Status::Fail).collect()
    }

    /// Human-readable table, one line per criterion.
    pub fn table(&self) -> String {
        let mut out = String::new();
        for c in &self.criteria {
            let status = match c.status {
                Status::Pass => "PASS",
                Status::Fail if c.known_unattainable => "FAIL (known)",
                Status::Fail => "FAIL",
                Status::Skipped => "SKIP",
            };
            out.push_str(&format!("{:>2}  {:<13} {:<34} {:>7.2}s\n", c.id, status, c.title, c.runtime_s));
            for s in c.checks.iter().filter(|s| s.status != Status::Pass) {
                let tag = if s.status == Status::Skipped { "skipped" } else { "failed" };
                out.push_str(&format!("      {tag}: {} = {} (need {})\n", s.key, s.measured, s.requirement));
            }
        }
        out
    }
}

/// Reference values the criteria compare against. Kept in one place so a
/// wrong constant can be injected to test failure reporting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectations {
    pub q0: (i64, i64),
    pub dy_dmu: f64,
    pub dy_dnu: f64,
    pub dcrit_dmu: f64,
    pub gap_slope: f64,
    pub locus_slope: f64,
    pub h_lower: f64,
    pub henon_a: f64,
    pub henon_b: f64,
}

impl Default for Expectations {
    fn default() -> Self {
        Expectations {
            q0: (45, 91),
            dy_dmu: 0.25,
            dy_dnu: 0.1,
            dcrit_dmu: 1.0,
            gap_slope: 0.9,
            locus_slope: -5.0 / 6.0,
            h_lower: 0.3699,
            henon_a: 2.8,
            henon_b: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyOptions {
    /// Criterion keys or sub-check keys to skip.
    pub skip: BTreeSet<String>,
    pub expectations: Expectations,
    /// Renormalization depth used for the tangency criterion.
    pub tangency_n: u32,
    pub lyapunov_steps: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            skip: BTreeSet::new(),
            expectations: Expectations::default(),
            tangency_n: 5,
            lyapunov_steps: 1_000_000,
            seed: 7,
        }
    }
}

pub struct Criterion {
    pub id: u8,
    pub key: &'static str,
    pub title: &'static str,
    pub budget_s: f64,
    run: fn(&VerifyOptions, &mut Checks),
}

pub const CRITERIA: &[Criterion] = &[
    Criterion { id: 1, key: "cantor", title: "Cantor exactness", budget_s: 5.0, run: cantor_exactness },
    Criterion { id: 2, key: "conjugacy", title: "Conjugacy", budget_s: 1.0, run: conjugacy },
    Criterion { id: 3, key: "renorm", title: "Renormalization rate", budget_s: 30.0, run: renorm_rate },
    Criterion { id: 4, key: "velocity", title: "Velocity table", budget_s: 1.0, run: velocity_table },
    Criterion { id: 5, key: "tangency", title: "Tangency antimonotonicity", budget_s: 300.0, run: tangency },
    Criterion { id: 6, key: "wangyoung", title: "Wang-Young certificate", budget_s: 30.0, run: wang_young },
    Criterion { id: 7, key: "attractor", title: "Attractor consistency", budget_s: 120.0, run: attractor },
    Criterion { id: 8, key: "invariants", title: "Structural invariants", budget_s: 30.0, run: invariants },
];

/// Collects sub-check outcomes, honouring the skip list.
pub struct Checks<'a> {
    skip: &'a BTreeSet<String>,
    items: Vec<SubCheck>,
}

impl Checks<'_> {
    pub fn skipped(&self, key: &str) -> bool {
        self.skip.contains(key)
    }

    pub fn record(&mut self, key: &str, passed: bool, measured: impl ToString, requirement: impl ToString) {
        let status = if self.skipped(key) {
            Status::Skipped
        } else if passed {
            Status::Pass
        } else {
            Status::Fail
        };
        self.items.push(SubCheck {
            key: key.into(),
            status,
            measured: measured.to_string(),
            requirement: requirement.to_string(),
        });
    }

    fn skip(&mut self, key: &str) {
        self.items.push(SubCheck {
            key: key.into(),
            status: Status::Skipped,
            measured: "-".into(),
            requirement: "-".into(),
        });
    }

    fn error(&mut self, key: &str, err: impl std::fmt::Display) {
        self.record(key, false, format!("error: {err}"), "no error");
    }
}

pub fn run_criterion(c: &Criterion, opts: &VerifyOptions) -> CriterionReport {
    let known_unattainable = KNOWN_UNATTAINABLE.contains(&c.id);
    if opts.skip.contains(c.key) {
        return CriterionReport {
            id: c.id,
            key: c.key,
            title: c.title,
            status: Status::Skipped,
            known_unattainable,
            runtime_s: 0.0,
            budget_s: c.budget_s,
            checks: Vec::new(),
        };
    }
    let mut checks = Checks { skip: &opts.skip, items: Vec::new() };
    let start = Instant::now();
    (c.run)(opts, &mut checks);
    let runtime_s = start.elapsed().as_secs_f64();
    checks.record("runtime", runtime_s <= c.budget_s, format!("{runtime_s:.2}s"), format!("<= {}s", c.budget_s));
    let status = if checks.items.iter().any(|s| s.status == Status::Fail) { Status::Fail } else { Status::Pass };
    CriterionReport {
        id: c.id,
        key: c.key,
        title: c.title,
        status,
        known_unattainable,
        runtime_s,
        budget_s: c.budget_s,
        checks: checks.items,
    }
}

pub fn run_all(opts: &VerifyOptions) -> VerifyReport {
    let criteria: Vec<CriterionReport> = CRITERIA.iter().map(|c| run_criterion(c, opts)).collect();
    let all_passed = criteria.iter().all(|c| c.status != Status::Fail);
    let unexpected_failures =
        criteria.iter().filter(|c| c.status == Status::Fail && !c.known_unattainable).map(|c| c.id).collect();
    VerifyReport { schema_version: SCHEMA_VERSION, criteria, all_passed, unexpected_failures }
}

fn fmt_q(x: &Rational) -> String {
    format!("{x} (~{:.6})", to_f64(x))
}

fn cantor_exactness(opts: &VerifyOptions, out: &mut Checks) {
    let (qn, qd) = opts.expectations.q0;
    let mut gen4 = Vec::new();
    for m in [6usize, 8, 10] {
        let construction = match KmConstruction::new(m) {
            Ok(c) => c,
            Err(e) => return out.error(&format!("km_{m}"), e),
        };
        if m == 6 {
            out.record("q0", construction.q[0] == q(qn, qd), &construction.q[0], format!("{qn}/{qd}"));
        }
        let bound = construction.claimed_thickness_bound();
        let mut worst: Option<Rational> = None;
        for g in 1..=4 {
            match build_km(m, g).and_then(|k| thickness(&k)) {
                Ok(r) => {
                    if worst.as_ref().is_none_or(|w| r.thickness < *w) {
                        worst = Some(r.thickness.clone());
                    }
                    if g == 4 {
                        gen4.push(r.thickness);
                    }
                }
                Err(e) => return out.error(&format!("km_{m}"), e),
            }
        }
        let worst = worst.expect("four generations");
        out.record(
            &format!("thickness_bound_m{m}"),
            worst >= bound,
            format!("min over g=1..4 {}", fmt_q(&worst)),
            format!(">= {}", fmt_q(&bound)),
        );
    }
    let increasing = gen4.windows(2).all(|w| w[0] < w[1]);
    let shown: Vec<String> = gen4.iter().map(|t| t.to_string()).collect();
    out.record("increasing_in_m", increasing, shown.join(" < "), "strictly increasing for m = 6, 8, 10");
}

fn conjugacy(_: &VerifyOptions, out: &mut Checks) {
    let grid = Interval { lo: -1.5, hi: 1.5 }.grid(10_000);
    let mut sup = 0.0f64;
    for x in grid {
        match conjugacy_defect(x) {
            Ok(d) => sup = sup.max(d),
            Err(e) => return out.error("sup_defect", e),
        }
    }
    out.record("sup_defect", sup < 1e-12, format!("{sup:e}"), "< 1e-12");
}

fn renorm_rate(_: &VerifyOptions, out: &mut Checks) {
    let base = ModelParams::default();
    let ns: Vec<u32> = (4..=14).collect();
    let mut worst = 0.0f64;
    for &n in &ns {
        match residual_norm(&base, n) {
            Ok(r) => {
                let exact = 2.0 * (base.a * base.c).abs() * (base.lambda * base.sigma).powi(n as i32);
                worst = worst.max((r.sup_h2 / exact - 1.0).abs());
            }
            Err(e) => return out.error("exact_residual", e),
        }
    }
    out.record("exact_residual", worst < 1e-10, format!("max relative error {worst:e}"), "< 1e-10");
    for eps in [0.1, 1.0] {
        let key = format!("quartic_slope_eps{eps}");
        if out.skipped(&key) {
            out.skip(&key);
            continue;
        }
        let params = base.with_perturbation(Perturbation::Quartic { epsilon: eps });
        let norms: Result<Vec<_>, _> = ns.par_iter().map(|&n| residual_norm(&params, n)).collect();
        match norms.and_then(|v| decay_fit(v, &params)) {
            Ok(fit) => out.record(
                &key,
                (fit.slope - fit.predicted).abs() <= 0.05,
                format!("{:.4}", fit.slope),
                format!("{:.4} +- 0.05", fit.predicted),
            ),
            Err(e) => out.error(&key, e),
        }
    }
}

fn velocity_table(opts: &VerifyOptions, out: &mut Checks) {
    let e = &opts.expectations;
    let v = match velocity_derivatives(3.0, 0.0, 1e-5) {
        Ok(v) => v,
        Err(err) => return out.error("velocity", err),
    };
    let mut rec = |key: &str, got: f64, want: f64, tol: f64| {
        out.record(key, (got - want).abs() < tol, format!("{got:.9}"), format!("{want} +- {tol:e}"))
    };
    rec("dy_plus_dmu", v.dy_plus_dmu, e.dy_dmu, 1e-3);
    rec("dy_minus_dmu", v.dy_minus_dmu, -e.dy_dmu, 1e-3);
    rec("dy_plus_dnu", v.dy_plus_dnu, e.dy_dnu, 1e-3);
    rec("dy_minus_dnu", v.dy_minus_dnu, e.dy_dnu, 1e-3);
    rec("dcrit_plus_dmu", v.dcrit_plus_dmu, e.dcrit_dmu, 1e-6);
    rec("dcrit_minus_dmu", v.dcrit_minus_dmu, -e.dcrit_dmu, 1e-6);
}

fn tangency(opts: &VerifyOptions, out: &mut Checks) {
    let e = &opts.expectations;
    let params = ModelParams::default();
    let n = opts.tangency_n;
    let coupling = params.coupling(n).abs();
    out.record("coupling", coupling <= 0.05, format!("{coupling:.4}"), "<= 0.05");
    let residual = match residual_norm(&params, n) {
        Ok(r) => r.sup_h1.max(r.sup_h2),
        Err(err) => return out.error("residual", err),
    };
    let tol = 0.1 + residual;
    let rt = RenormTangency::new(params, n);
    let dt = 1e-3;
    for side in [TangencySide::Upper, TangencySide::Lower] {
        let name = match side {
            TangencySide::Upper => "upper",
            TangencySide::Lower => "lower",
        };
        let nu0 = match rt.tangency_parameter(3.0, side, (-0.1, 0.1), 1e-10) {
            Ok(v) => v,
            Err(err) => {
                out.error(&format!("{name}_event"), err);
                continue;
            }
        };
        let event = match rt.classify(3.0, nu0, side, dt) {
            Ok(ev) => ev,
            Err(err) => {
                out.error(&format!("{name}_event"), err);
                continue;
            }
        };
        match side {
            TangencySide::Upper => {
                out.record(
                    "upper_contact_making",
                    event.classification == Classification::ContactMaking,
                    format!("{:?} at nu_bar = {nu0:.6}", event.classification),
                    "ContactMaking",
                );
                out.record(
                    "upper_gap_slope",
                    (event.gap_slope - e.gap_slope).abs() <= tol,
                    format!("{:.4}", event.gap_slope),
                    format!("{} +- {tol:.4}", e.gap_slope),
                );
            }
            TangencySide::Lower => {
                out.record(
                    "lower_contact_breaking",
                    event.classification == Classification::ContactBreaking && event.gap_slope < 0.0,
                    format!("{:?}, slope {:.4} at nu_bar = {nu0:.6}", event.classification, event.gap_slope),
                    "ContactBreaking with negative slope",
                );
            }
        }
        out.record(
            &format!("{name}_richardson"),
            event.richardson_consistent,
            format!("{:.5} vs {:.5}", event.slope_coarse, event.slope_fine),
            "agree within 10%",
        );
        match rt.scan(3.0, nu0, side).map(|s| s.nearest(side.extremum()).copied()) {
            Ok(Some(c)) => out.record(
                &format!("{name}_curvature_gap"),
                c.curvature_mismatch.abs() > 10.0 * c.curvature_noise,
                format!("{:.4} (noise {:.2e})", c.curvature_mismatch, c.curvature_noise),
                "> 10 x interpolation noise",
            ),
            Ok(None) => out.record(&format!("{name}_curvature_gap"), false, "no extremum", "an extremum"),
            Err(err) => out.error(&format!("{name}_curvature_gap"), err),
        }
    }
    if out.skipped("locus_slope") {
        return out.skip("locus_slope");
    }
    let grid: Vec<f64> = (0..9).map(|i| 2.96 + 0.01 * i as f64).collect();
    match f_bar_slope(|m, v| rt.gap(m, v, TangencySide::Upper), &grid, (-0.1, 0.1), 1e-9) {
        Ok(r) => {
            out.record(
                "locus_slope",
                (r.slope - e.locus_slope).abs() <= 0.1 && r.skipped.is_empty(),
                format!("{:.4} ({} points, {} skipped)", r.slope, r.locus.len(), r.skipped.len()),
                format!("{:.4} +- 0.1", e.locus_slope),
            );
            out.record("locus_decreasing", r.strictly_decreasing, r.strictly_decreasing, true);
        }
        Err(err) => out.error("locus_slope", err),
    }
}

fn wang_young(opts: &VerifyOptions, out: &mut Checks) {
    let cert = match certify(1e-14, 8) {
        Ok(c) => c,
        Err(e) => return out.error("certificate", e),
    };
    let m = &cert.misiurewicz;
    let lower = mu_lower();
    out.record(
        "mu_star_bracket",
        m.mu_star > lower && m.mu_star < 3.0,
        format!("{:.12}", m.mu_star),
        format!("in ({lower:.6}, 3)"),
    );
    let f3 = m.critical_orbit[3].abs();
    out.record("critical_orbit_closes", f3 < 1e-9, format!("{f3:e}"), "|F^3(c)| < 1e-9");
    out.record("ordering_chain", m.interval.chain.windows(2).all(|w| w[0] < w[1]), "strict", "strict");
    for (key, check) in &m.checks {
        out.record(key, check.passed, format!("{} ({})", check.value, check.detail), check.requirement);
    }
    let t = &cert.transversality;
    out.record("dp_dmu", t.dp_dmu < 0.4, format!("{:.6}", t.dp_dmu), "< 0.4");
    out.record("dp_dmu_closed_vs_fd", (t.dp_dmu - t.dp_dmu_fd).abs() < 1e-5, format!("{:e}", (t.dp_dmu - t.dp_dmu_fd).abs()), "< 1e-5");
    out.record("dfc_dmu", t.dfc_dmu > 0.9, format!("{:.6}", t.dfc_dmu), "> 0.9");
    let h = transversality_h(lower);
    out.record(
        "h_lower",
        (h - opts.expectations.h_lower).abs() < 1e-4 && h < 0.4,
        format!("{h:.6}"),
        format!("{} +- 1e-4", opts.expectations.h_lower),
    );
    out.record("nondegeneracy", cert.nondegeneracy.passed, cert.nondegeneracy.constant, 1.0);
}

fn quadratic_roots(p: f64, q: f64) -> [f64; 2] {
    // l^2 + p l + q with real roots, larger modulus first.
    let d = (p * p - 4.0 * q).sqrt();
    let big = -0.5 * (p + p.signum() * d);
    let mut r = [big, q / big];
    if r[0].abs() < r[1].abs() {
        r.swap(0, 1);
    }
    r
}

fn attractor(opts: &VerifyOptions, out: &mut Checks) {
    let (a, b) = (opts.expectations.henon_a, opts.expectations.henon_b);
    let map = CubicHenon { a, b };

    // Newton from a seed grid finds every fixed point in the trapping box.
    let mut found: Vec<Point> = Vec::new();
    for i in 0..20 {
        for j in 0..20 {
            let seed = Point::new(-0.4 + 0.8 * i as f64 / 19.0, -3.0 + 6.0 * j as f64 / 19.0);
            if let Ok(s) = find_saddle(&map, 1, seed, 1e-13) {
                if s.location.norm() < 10.0 && !found.iter().any(|p| (p - s.location).norm() < 1e-8) {
                    found.push(s.location);
                }
            }
        }
    }
    out.record("fixed_point_count", found.len() == 3, found.len(), 3);

    let mut worst = 0.0f64;
    let mut all_saddles = true;
    for p in map.fixed_points() {
        let s = match find_saddle(&map, 1, p + Point::new(1e-3, -1e-3), 1e-14) {
            Ok(s) => s,
            Err(e) => return out.error("fixed_points", e),
        };
        all_saddles &= s.kind == SpectrumKind::Saddle;
        // l^2 - 2.8 l - 0.1 at the origin, l^2 + 2.9 l - 0.1 at the outer pair.
        let (pc, qc) = if p.norm() == 0.0 { (-2.8, -0.1) } else { (2.9, -0.1) };
        let roots = quadratic_roots(pc, qc);
        match s.eigenvalues {
            Some(ev) => {
                worst = worst.max((ev[0] - roots[0]).abs()).max((ev[1] - roots[1]).abs());
            }
            None => worst = f64::INFINITY,
        }
    }
    out.record("all_saddles", all_saddles, all_saddles, true);
    out.record("eigenvalues_vs_polynomials", worst < 1e-8, format!("{worst:e}"), "< 1e-8");

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut det_worst = 0.0f64;
    let mut det_fd_worst = 0.0f64;
    for _ in 0..1000 {
        let p = Point::new(rng.gen_range(-0.3..0.3), rng.gen_range(-3.0..3.0));
        det_worst = det_worst.max((map.jacobian(p).determinant() + b).abs());
        let fd = crate::planar::finite_difference_jacobian(|q| map.forward(q), p, 1e-5);
        det_fd_worst = det_fd_worst.max((fd.determinant() + b).abs());
    }
    out.record("jacobian_determinant", det_worst < 1e-8, format!("{det_worst:e}"), "< 1e-8");
    out.record("jacobian_determinant_fd", det_fd_worst < 1e-5, format!("{det_fd_worst:e}"), "< 1e-5");

    if out.skipped("lyapunov") {
        return out.skip("lyapunov");
    }
    let seeds = [
        Point::new(0.1, 0.9),
        Point::new(0.0, 0.5),
        Point::new(-0.05, -0.7),
        Point::new(0.02, 1.2),
        Point::new(0.1, -1.0),
    ];
    let steps = opts.lyapunov_steps;
    let estimates: Result<Vec<f64>, _> =
        seeds.par_iter().map(|&s| lyapunov(&map, s, steps, 1000, 10.0).map(|l| l.exponent)).collect();
    match estimates {
        Ok(v) => {
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            let spread = v.iter().map(|x| (x - mean).abs()).fold(0.0, f64::max);
            out.record(
                "lyapunov",
                v.iter().all(|&x| x > 0.0) && spread <= 0.02,
                format!("mean {mean:.4}, max deviation {spread:.4}"),
                "positive, within 0.02 of the mean across 5 seeds",
            );
        }
        Err(e) => out.error("lyapunov", e),
    }
}

fn middle_thirds(g: usize) -> Result<CantorApproximation<Rational>, crate::cantor::CantorError> {
    let branch = |lo: Rational, hi: Rational, c: i64| MarkovBranch {
        domain: Interval { lo, hi },
        map: AffineBranch { slope: int(3), intercept: int(c) },
    };
    let sys = MarkovBranchSystem::new(
        Interval { lo: int(0), hi: int(1) },
        vec![branch(int(0), q(1, 3), 0), branch(q(2, 3), int(1), -2)],
    )?;
    markov_cantor(&sys, g)
}

fn round_trip<M: PlanarMap>(map: &M, rng: &mut ChaCha8Rng, bx: Rect) -> f64 {
    (0..1000)
        .map(|_| {
            let p = Point::new(rng.gen_range(bx.x.lo..bx.x.hi), rng.gen_range(bx.y.lo..bx.y.hi));
            match map.inverse(map.forward(p)) {
                Some(back) if back.x.is_finite() && back.y.is_finite() => (back - p).norm(),
                _ => f64::INFINITY,
            }
        })
        .fold(0.0, f64::max)
}

fn invariants(opts: &VerifyOptions, out: &mut Checks) {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let henon = CubicHenon::attractor();
    let err = round_trip(&henon, &mut rng, Rect::new(-0.3, 0.3, -2.0, 2.0));
    out.record("inverse_cubic_henon", err < 1e-10, format!("{err:e}"), "< 1e-10");
    match RenormalizedMap::new(ModelParams::default(), 6, 3.0, 0.0) {
        Ok(m) => {
            let err = round_trip(&m, &mut rng, Rect::square(2.0));
            out.record("inverse_renormalized", err < 1e-10, format!("{err:e}"), "< 1e-10");
        }
        Err(e) => out.error("inverse_renormalized", e),
    }
    match TFamily::fig02(2.8, 0.1) {
        Ok(t) => {
            let err = round_trip(&t, &mut rng, Rect::new(-0.3, 0.3, -2.0, 2.0));
            out.record("inverse_t_family", err < 1e-10, format!("{err:e}"), "< 1e-10");
        }
        Err(e) => out.error("inverse_t_family", e),
    }

    let linear = LinearSaddle { lambda: 0.2, sigma: 2.0 };
    // Start on the stable axis so the orbit stays bounded; the tangent vector is generic.
    match lyapunov(&linear, Point::new(0.3, 0.0), 10_000, 100, f64::INFINITY) {
        Ok(l) => {
            let d = (l.exponent - 2f64.ln()).abs();
            out.record("lyapunov_linear", d < 1e-9, format!("{d:e}"), "< 1e-9");
        }
        Err(e) => out.error("lyapunov_linear", e),
    }

    match middle_thirds(6).and_then(|k| thickness(&k)) {
        Ok(r) => out.record("middle_thirds_thickness", r.thickness == int(1), &r.thickness, 1),
        Err(e) => out.error("middle_thirds_thickness", e),
    }

    let gens: Result<Vec<_>, _> = (1..=6).map(|g| build_km(6, g)).collect();
    let gens = match gens {
        Ok(g) => g,
        Err(e) => return out.error("gap_lemma", e),
    };
    let same = gap_lemma_check(&gens, &gens).verdict;
    out.record("gap_lemma_identical", same == GapVerdict::IntervalsIntersect, format!("{same:?}"), "IntervalsIntersect");
    let wide = Interval { lo: q(-3, 2), hi: q(23, 2) };
    let rewrap = |v: Vec<CantorApproximation<Rational>>| -> Result<Vec<_>, _> {
        v.into_iter().map(|k| k.with_ambient(wide.clone())).collect()
    };
    let far = rewrap(gens.iter().map(|k| k.affine_image(&int(1), &int(10))).collect());
    let base = rewrap(gens.clone());
    match (base, far) {
        (Ok(base), Ok(far)) => {
            let v = gap_lemma_check(&base, &far).verdict;
            out.record(
                "gap_lemma_translated_10",
                matches!(v, GapVerdict::FirstInGapOfSecond | GapVerdict::SecondInGapOfFirst),
                format!("{v:?}"),
                "one set in a gap of the other",
            );
        }
        (Err(e), _) | (_, Err(e)) => out.error("gap_lemma_translated_10", e),
    }
    let near: Vec<_> = gens.iter().map(|k| k.affine_image(&int(1), &q(1, 1000))).collect();
    let r = gap_lemma_check(&gens, &near);
    out.record(
        "gap_lemma_translated_1e-3",
        r.verdict == GapVerdict::IntervalsIntersect && !r.gap_lemma_violated,
        format!("{:?}", r.verdict),
        "IntervalsIntersect",
    );
}

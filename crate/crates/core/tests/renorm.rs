use cubic_lab::planar::{finite_difference_jacobian, PlanarMap, Point};
use cubic_lab::renorm::{
    conjugate_to_standard, decay_fit, residual_norm, theta_n, theta_n_dd, theta_n_inverse, theta_n_inverse_dd, write_residual_csv, ModelParams,
    Perturbation, RenormalizedMap,
};
use proptest::prelude::*;

fn quartic(eps: f64) -> ModelParams {
    ModelParams::default().with_perturbation(Perturbation::Quartic { epsilon: eps })
}

#[test]
fn unperturbed_residual_is_the_coupling_term() {
    let p = ModelParams::default();
    for n in 4..=14 {
        let r = residual_norm(&p, n).unwrap();
        let exact = 2.0 * (p.a * p.c).abs() * (p.lambda * p.sigma).powi(n as i32);
        assert!((r.sup_h2 / exact - 1.0).abs() < 1e-10, "n={n}: {} vs {exact}", r.sup_h2);
        assert!(r.sup_h1 < 1e-12);
    }
}

#[test]
fn quartic_residual_decays_at_the_predicted_rate() {
    for eps in [0.1, 1.0] {
        let p = quartic(eps);
        let norms: Vec<_> = (4..=14).map(|n| residual_norm(&p, n).unwrap()).collect();
        let fit = decay_fit(norms, &p).unwrap();
        assert!((fit.predicted - (0.5f64).ln() / 2.0).abs() < 1e-15);
        assert!((fit.slope - fit.predicted).abs() <= 0.05, "eps={eps}: {}", fit.slope);
    }
}

#[test]
fn successive_residual_ratios_respect_xi() {
    let p = quartic(1.0);
    let xi = p.xi();
    let norms: Vec<_> = (4..=13).map(|n| residual_norm(&p, n).unwrap().sup_h2).collect();
    for w in norms.windows(2) {
        assert!(w[1] / w[0] <= xi + 0.05, "{} / {}", w[1], w[0]);
    }
}

#[test]
fn quartic_residual_matches_closed_form() {
    let p = quartic(0.7);
    let m = RenormalizedMap::new(p, 6, 2.9, 0.1).unwrap();
    let kappa = m.coupling();
    let qc = m.quartic_residual_coefficient();
    for &(x, y) in &[(0.3, -1.2), (-1.0, 0.4), (1.7, 1.9)] {
        let (h1, h2) = m.residual(Point::new(x, y)).unwrap();
        assert!(h1.abs() < 1e-13);
        let expected = kappa * x + qc * y.powi(4);
        assert!((h2 - expected).abs() < 1e-12 * expected.abs().max(1.0), "{h2} vs {expected}");
    }
}

#[test]
fn determinant_is_minus_the_coupling() {
    let p = ModelParams::default();
    for n in [4u32, 8, 12] {
        let m = RenormalizedMap::new(p, n, 3.0, 0.0).unwrap();
        let kappa = m.coupling();
        for &(x, y) in &[(0.0, 0.0), (1.5, -1.5), (-2.0, 2.0)] {
            let det = finite_difference_jacobian(|q| m.forward(q), Point::new(x, y), 1e-4).determinant();
            assert!((det + kappa).abs() <= 1e-6 * kappa, "n={n}: {det} vs {}", -kappa);
        }
    }
}

#[test]
fn quartic_model_keeps_a_constant_sign_determinant() {
    let m = RenormalizedMap::new(quartic(1.0), 6, 3.0, 0.0).unwrap();
    for i in 0..=20 {
        for j in 0..=20 {
            let p = Point::new(-2.0 + 0.2 * i as f64, -2.0 + 0.2 * j as f64);
            assert!(m.jacobian(p).determinant() < 0.0);
        }
    }
}

#[test]
fn conjugated_map_has_the_cubic_diffeomorphism_form() {
    let p = ModelParams::default();
    let n = 6;
    let xi_n = p.xi().powi(n as i32);
    let m = conjugate_to_standard(RenormalizedMap::new(p, n, 2.9, 0.0).unwrap(), 2.9, 0.0);
    for &(x, y) in &[(0.2, 1.0), (-0.5, -0.3), (0.9, 1.8)] {
        let d = m.deviation_from_normal_form(Point::new(x, y));
        // Both deviations divided by xi^n stay of order one.
        assert!(d.x.abs() / xi_n < 10.0 && d.y.abs() / xi_n < 10.0, "{d:?}");
    }
}

#[test]
fn residual_csv_has_header_and_ratios() {
    let p = quartic(1.0);
    let norms: Vec<_> = (4..=6).map(|n| residual_norm(&p, n).unwrap()).collect();
    let mut buf = Vec::new();
    write_residual_csv(&norms, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "n,mu_bar,nu_bar,sup_H1,sup_H2,ratio");
    assert_eq!(lines.count(), 3);
}

proptest! {
    #[test]
    fn theta_round_trip(n in 1u32..=30, mu_bar in 0.0f64..4.0, nu_bar in -1.0f64..1.0) {
        let p = ModelParams::default();
        let (mu, nu) = theta_n_dd(&p, n, mu_bar, nu_bar);
        let (m2, n2) = theta_n_inverse_dd(&p, n, mu, nu);
        prop_assert!((m2 - mu_bar).abs() <= 1e-12 * mu_bar.abs().max(1.0));
        prop_assert!((n2 - nu_bar).abs() <= 1e-12 * nu_bar.abs().max(1.0), "{} vs {}", n2, nu_bar);
    }

    #[test]
    fn theta_round_trip_binary64(n in 1u32..=10, mu_bar in 0.0f64..4.0, nu_bar in -1.0f64..1.0) {
        let p = ModelParams::default();
        let (mu, nu) = theta_n(&p, n, mu_bar, nu_bar);
        let (m2, n2) = theta_n_inverse(&p, n, mu, nu);
        prop_assert!((m2 - mu_bar).abs() <= 1e-12 * mu_bar.abs().max(1.0));
        prop_assert!((n2 - nu_bar).abs() <= 1e-12 * nu_bar.abs().max(1.0), "{} vs {}", n2, nu_bar);
    }

    #[test]
    fn inverse_round_trip(x in -2.0f64..2.0, y in -2.0f64..2.0, n in 2u32..14) {
        let m = RenormalizedMap::new(quartic(0.5), n, 2.8, 0.2).unwrap();
        let p = Point::new(x, y);
        let back = m.inverse(m.forward(p)).unwrap();
        prop_assert!((back - p).norm() < 1e-10);
    }
}

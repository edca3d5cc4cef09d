mod common;

use common::*;
use ellconn::connections::Rank1Connection;
use ellconn::curves::BiellipticCover;
use ellconn::linalg::Mat2;
use ellconn::periods::*;
use ellconn::quadrature::{Method, QuadratureSettings};
use ellconn::C64;
use proptest::prelude::*;

fn settings() -> QuadratureSettings {
    QuadratureSettings::default()
}

#[test]
fn constants_at_2_3_match_frozen_reference() {
    for method in [Method::TanhSinh, Method::ChebyshevGauss] {
        let k = hyperelliptic_constants_with(2.0, 3.0, &settings().with_method(method)).unwrap();
        let got = k.as_array();
        let want = [K_23, KP_23, L_23, LP_23];
        for (g, w) in got.iter().zip(want) {
            assert!(*g > 0.0);
            assert!((g - w).abs() < 1e-13 * w, "{method:?}: {g} vs {w}");
        }
    }
}

#[test]
fn constants_match_sine_substitution_oracle() {
    // K, K' over [√(t'-t), √(t'-1)]; L, L' over [√(t'-1), √t'].
    for (t, tp) in [(2.0f64, 3.0f64), (1.4, 5.2), (3.5, 3.9)] {
        let (al, be, ga): (f64, f64, f64) = ((tp - t).sqrt(), (tp - 1.0f64).sqrt(), tp.sqrt());
        let rk = |x: f64| (tp - x * x) * (x + al) * (x + be);
        let rl = |x: f64| (ga + x) * (x + be) * (x * x - al * al);
        let one = |_x: f64| 1.0;
        let id = |x: f64| x;
        let want = [
            sine_substituted_integral(one, rk, al, be, 64),
            sine_substituted_integral(id, rk, al, be, 64),
            sine_substituted_integral(one, rl, be, ga, 64),
            sine_substituted_integral(id, rl, be, ga, 64),
        ];
        let got = hyperelliptic_constants(t, tp, &settings()).unwrap().as_array();
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-11 * w, "({t},{tp}): {g} vs {w}");
        }
    }
}

#[test]
fn constants_reject_bad_order() {
    assert!(hyperelliptic_constants(3.0, 2.0, &settings()).is_err());
    assert!(hyperelliptic_constants(3.0, 3.0, &settings()).is_err());
    assert!(hyperelliptic_constants(0.5, 3.0, &settings()).is_err());
}

#[test]
fn elliptic_periods_real_case_structure() {
    for t in [1.5, 2.0, 4.0, 9.0] {
        let p = elliptic_periods(c(t, 0.0), &settings()).unwrap();
        assert!(p.k.re.abs() < 1e-12 * p.k.norm(), "k should be imaginary: {}", p.k);
        assert!(p.l.im.abs() < 1e-12 * p.l.norm(), "l should be real: {}", p.l);
        assert!(p.tau.im > 0.0);
        assert!(!p.negated);
        let q = elliptic_periods(c(t, 0.0), &settings().with_method(Method::ChebyshevGauss)).unwrap();
        assert!((p.tau - q.tau).norm() < 1e-11);
    }
}

#[test]
fn tau_at_one_half_reduces_to_i() {
    let p = elliptic_periods(c(0.5, 0.0), &settings()).unwrap();
    let (z, _) = modular_reduce(p.tau).unwrap();
    assert!((z - c(0.0, 1.0)).norm() < 1e-6);
}

#[test]
fn period_matrix_examples() {
    let z = g2_period_matrix(c(0.0, 1.0), c(0.0, 2.0)).unwrap().z;
    let want = Mat2::new(c(0.0, 1.5), c(0.0, -0.5), c(0.0, -0.5), c(0.0, 1.5));
    assert!(z.max_diff(&want) < 1e-15);
    let e = imaginary_part_eigenvalues(&z);
    assert!((e[0] - 1.0).abs() < 1e-14 && (e[1] - 2.0).abs() < 1e-14);
    let d = g2_period_matrix(c(0.0, 1.0), c(0.0, 1.0)).unwrap().z;
    assert!(d.max_diff(&Mat2::diag(c(0.0, 1.0), c(0.0, 1.0))) < 1e-15);
    assert!(in_period_locus(&d));
    assert!(g2_period_matrix(c(0.0, -1.0), c(0.0, 1.0)).is_err());
}

#[test]
fn period_locus_examples() {
    let z = Mat2::new(c(0.0, 1.5), c(0.0, -0.5), c(0.0, -0.5), c(0.0, 1.5));
    assert!(in_period_locus(&z));
    assert!(!in_period_locus(&Mat2::new(c(0.0, 1.0), c(0.1, 0.0), c(0.2, 0.0), c(0.0, 1.0))));
    assert!(!in_period_locus(&Mat2::new(c(0.0, 1.0), c(0.0, 2.0), c(0.0, 2.0), c(0.0, 1.0))));
}

#[test]
fn trivial_periods_against_constants() {
    let cov = BiellipticCover::from_real(2.0, 3.0).unwrap();
    let i = c(0.0, 1.0);
    let n = omega_periods(&Rank1Connection::trivial(c(1.0, 0.0), c(0.0, 0.0)), &cov, &settings()).unwrap();
    assert!((n.n[0] - i * 2.0 * K_23).norm() < 1e-8);
    assert!((n.n[1] + i * 2.0 * K_23).norm() < 1e-8);
    assert!((n.n[2] + 2.0 * L_23).norm() < 1e-8);
    assert!((n.n[3] - 2.0 * L_23).norm() < 1e-8);
    let n = omega_periods(&Rank1Connection::trivial(c(0.0, 0.0), c(1.0, 0.0)), &cov, &settings()).unwrap();
    assert!((n.n[0] - i * 2.0 * KP_23).norm() < 1e-8);
    assert!((n.n[1] - i * 2.0 * KP_23).norm() < 1e-8);
    assert!((n.n[2] + 2.0 * LP_23).norm() < 1e-8);
    assert!((n.n[3] + 2.0 * LP_23).norm() < 1e-8);
    let z = omega_periods(&Rank1Connection::trivial(c(0.0, 0.0), c(0.0, 0.0)), &cov, &settings()).unwrap();
    assert!(z.n.iter().all(|v| v.norm() == 0.0));
}

#[test]
fn exact_differential_has_zero_periods() {
    // d(ξ y) = (y + ξ dy/dξ) dξ with dy/dξ = S'(ξ)/(2y).
    for (t, tp) in [(c(2.0, 0.0), c(3.0, 0.0)), (c(1.8, 0.4), c(3.6, -0.3))] {
        let cov = BiellipticCover::new(t, tp).unwrap();
        let cyc = cycles(&cov, &[]).unwrap();
        let f = move |xi: C64, y: C64| {
            let u = tp - xi * xi;
            let ds = -(xi * 2.0) * (u * u * 3.0 - u * (t + 1.0) * 2.0 + t);
            [y + xi * ds / (y * 2.0), c(1.0, 0.0)]
        };
        let p = cyc.periods(f, &settings()).unwrap();
        for v in p.iter().flatten() {
            assert!(v.norm() < 1e-10, "{v}");
        }
    }
}

#[test]
fn reciprocity_matches_contour_periods() {
    let cov = BiellipticCover::from_real(2.0, 3.0).unwrap();
    let cases = [
        (c(0.7, 0.4), 1.0, c(-0.5, 0.9), -1.0),
        (c(0.3, -0.6), -1.0, c(1.1, 0.2), 1.0),
    ];
    for (x1, s1, x2, s2) in cases {
        let conn = Rank1Connection::points(c(0.2, -0.1), c(0.4, 0.3), cov.point_at(x1, s1), cov.point_at(x2, s2));
        let pv = omega_periods(&conn, &cov, &settings()).unwrap();
        let rec = omega_periods_reciprocity(&conn, &cov, &settings()).unwrap();
        assert!(distance_mod_2pi_i(pv.n[2] - rec.n3) < 1e-6 / (2.0 * std::f64::consts::PI));
        assert!(distance_mod_2pi_i(pv.n[3] - rec.n4) < 1e-6 / (2.0 * std::f64::consts::PI));
    }
    let trivial = omega_periods_reciprocity(&Rank1Connection::trivial(c(0.3, 0.0), c(0.2, 0.0)), &cov, &settings())
        .unwrap();
    assert_eq!(trivial.divisor_part, [c(0.0, 0.0); 2]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn trivial_periods_are_linear_in_lambda(a in -1.0f64..1.0, b in -1.0f64..1.0, d in -1.0f64..1.0, e in -1.0f64..1.0) {
        let cov = BiellipticCover::from_real(2.0, 3.0).unwrap();
        let s = settings();
        let l1 = c(a, b);
        let l2 = c(d, e);
        let base1 = omega_periods(&Rank1Connection::trivial(c(1.0, 0.0), c(0.0, 0.0)), &cov, &s).unwrap();
        let base2 = omega_periods(&Rank1Connection::trivial(c(0.0, 0.0), c(1.0, 0.0)), &cov, &s).unwrap();
        let n = omega_periods(&Rank1Connection::trivial(l1, l2), &cov, &s).unwrap();
        for k in 0..4 {
            prop_assert!((n.n[k] - (l1 * base1.n[k] + l2 * base2.n[k])).norm() < 1e-10);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn tau_in_upper_half_plane(re in -3.0f64..3.0, im in -3.0f64..3.0) {
        let t = c(re, im);
        prop_assume!(t.norm() > 0.05 && (t - 1.0).norm() > 0.05);
        let p = elliptic_periods(t, &settings()).unwrap();
        prop_assert!(p.tau.im > 0.0);
        let q = elliptic_periods(t, &settings().with_method(Method::ChebyshevGauss)).unwrap();
        prop_assert!((p.tau - q.tau).norm() < 1e-9 * (1.0 + p.tau.norm()));
    }

    #[test]
    fn period_matrices_satisfy_riemann(a in -3.0f64..3.0, b in 0.01f64..3.0, d in -3.0f64..3.0, e in 0.01f64..3.0) {
        let z = g2_period_matrix(c(a, b), c(d, e)).unwrap().z;
        prop_assert!(riemann_relations(&z));
        prop_assert!(in_period_locus(&z));
    }
}

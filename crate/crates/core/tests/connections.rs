mod common;

use common::*;
use ellconn::connections::*;
use ellconn::curves::{BiellipticCover, CPoint, EPoint};
use ellconn::linalg::Mat2;
use ellconn::C64;
use proptest::prelude::*;
use std::f64::consts::PI;

fn cover23() -> BiellipticCover {
    BiellipticCover::from_real(2.0, 3.0).unwrap()
}

fn general() -> (BiellipticCover, Rank1Connection) {
    let cov = cover23();
    let q1 = cov.point_at(c(0.7, 0.4), 1.0);
    let q2 = cov.point_at(c(-0.5, 0.9), -1.0);
    (cov, Rank1Connection::points(c(0.3, 0.1), c(-0.2, 0.25), q1, q2))
}

fn sorted_eigs(m: &Mat2) -> [C64; 2] {
    let mut e = m.eigenvalues();
    e.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
    e
}

fn close(a: C64, b: C64, tol: f64) -> bool {
    (a - b).norm() < tol
}

/// Next value of `sqrt(f)` on the branch nearest `prev`.
fn follow(f: C64, prev: C64) -> C64 {
    let r = f.sqrt();
    if (r - prev).norm() <= (r + prev).norm() {
        r
    } else {
        -r
    }
}

/// `(1/2πi) ∮ ω` on a circle of radius `rho` around `(ξ0, y0)` in `C`.
fn omega_contour(conn: &Rank1Connection, cov: &BiellipticCover, xi0: C64, y0: C64, rho: f64) -> C64 {
    let n = 2048;
    let mut y = y0;
    let mut s = c(0.0, 0.0);
    for k in 0..n {
        let e = C64::from_polar(rho, 2.0 * PI * k as f64 / n as f64);
        let xi = xi0 + e;
        y = follow(cov.sextic(xi), y);
        s += omega_eval(conn, cov, &CPoint::affine(xi, y)).unwrap() * e;
    }
    s / n as f64
}

/// The direct image rebuilt from `ω` alone: `∇1 = ω` and `∇ξ = dξ + ξω`,
/// split into even and odd parts over the two lifts, with `dξ/dx = -1/(2ξ)`.
fn pushforward_oracle(conn: &Rank1Connection, cov: &BiellipticCover, xi: C64, y: C64) -> Mat2 {
    let w = |s: C64| omega_eval(conn, cov, &CPoint::affine(s, y)).unwrap();
    let dxi = |s: C64| -(s * 2.0).inv();
    let v1 = |s: C64| w(s) * dxi(s);
    let v2 = |s: C64| dxi(s) + s * w(s) * dxi(s);
    let even = |f: &dyn Fn(C64) -> C64| (f(xi) + f(-xi)) * 0.5;
    let odd = |f: &dyn Fn(C64) -> C64| (f(xi) - f(-xi)) / (xi * 2.0);
    Mat2::new(even(&v1), even(&v2), odd(&v1), odd(&v2))
}

#[test]
fn omega_trivial_values_and_parity() {
    let cov = cover23();
    let p = cov.point_at(c(0.5, 0.2), 1.0);
    let (xi, y) = xi_y(&p);
    let w = omega_eval(&Rank1Connection::trivial(c(1.0, 0.0), c(0.0, 0.0)), &cov, &p).unwrap();
    assert!(close(w, y.inv(), 1e-15));
    let iota = CPoint::affine(-xi, y);
    // With λ2 = 0 the coefficient is even in ξ; with λ1 = 0 it is odd.
    let even = Rank1Connection::trivial(c(0.7, -0.3), c(0.0, 0.0));
    let a = omega_eval(&even, &cov, &p).unwrap();
    assert!(close(a, omega_eval(&even, &cov, &iota).unwrap(), 1e-14));
    let odd = Rank1Connection::trivial(c(0.0, 0.0), c(0.4, 0.1));
    let b = omega_eval(&odd, &cov, &p).unwrap();
    assert!(close(b, -omega_eval(&odd, &cov, &iota).unwrap(), 1e-14));
}

#[test]
fn omega_rejects_poles_and_bad_points() {
    let (cov, conn) = general();
    let LineBundle::Points(q1, _) = conn.bundle else { unreachable!() };
    assert!(omega_eval(&conn, &cov, &q1).is_err());
    assert!(omega_eval(&conn, &cov, &CPoint::InfinityPlus).is_err());
    assert!(omega_eval(&conn, &cov, &CPoint::affine(c(0.3, 0.0), c(9.0, 0.0))).is_err());
}

#[test]
fn omega_has_residue_one_at_divisor_points() {
    let (cov, conn) = general();
    let LineBundle::Points(q1, q2) = conn.bundle else { unreachable!() };
    for q in [q1, q2] {
        let (xi, y) = xi_y(&q);
        let r = omega_contour(&conn, &cov, xi, y, 0.05);
        assert!(close(r, c(1.0, 0.0), 1e-8), "{r}");
        // The hyperelliptic conjugate carries no pole.
        let r = omega_contour(&conn, &cov, xi, -y, 0.05);
        assert!(r.norm() < 1e-8, "{r}");
    }
}

#[test]
fn matrix_at_zero_lambda() {
    let cov = cover23();
    let a = direct_image_matrix(&Rank1Connection::trivial(c(0.0, 0.0), c(0.0, 0.0)), &cov).unwrap();
    for x in [c(0.4, 0.3), c(-1.2, 0.8), c(5.0, -2.0)] {
        let y = cov.curve().rhs(x).sqrt();
        let want = Mat2::new(c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), -(( c(3.0, 0.0) - x) * 2.0).inv());
        assert!(a.eval(x, y).max_diff(&want) < 1e-15);
    }
}

#[test]
fn trivial_trace_formula() {
    let cov = BiellipticCover::new(c(1.7, 0.3), c(3.2, -0.4)).unwrap();
    let conn = Rank1Connection::trivial(c(0.6, -0.2), c(-0.9, 0.5));
    let a = direct_image_matrix(&conn, &cov).unwrap();
    let mut r = rng(7);
    for _ in 0..20 {
        let x = rand_c(&mut r, (-2.0, 4.0), (-2.0, 2.0));
        let y = cov.curve().rhs(x).sqrt();
        let want = -conn.lambda2 / y - ((cov.tp - x) * 2.0).inv();
        assert!(close(a.eval(x, y).trace(), want, 1e-12 * (1.0 + want.norm())));
    }
}

#[test]
fn matrix_agrees_with_pushforward_of_omega_on_both_lifts() {
    let mut r = rng(11);
    for _ in 0..10 {
        let cfg = random_config(&mut r, 0.15);
        let trivial = Rank1Connection::trivial(cfg.conn.lambda1, cfg.conn.lambda2);
        for conn in [cfg.conn, trivial] {
            let a = direct_image_matrix(&conn, &cfg.cover).unwrap();
            let xi = rand_c(&mut r, (-1.5, 1.5), (-1.5, 1.5));
            let p = cfg.cover.point_at(xi, 1.0);
            let (xi, y) = xi_y(&p);
            let x = cfg.cover.tp - xi * xi;
            let m = a.eval(x, y);
            let scale = 1.0 + m.max_abs();
            assert!(m.max_diff(&a.eval_c(&CPoint::affine(-xi, y)).unwrap()) < 1e-14 * scale);
            assert!(m.max_diff(&a.eval_c(&p).unwrap()) < 1e-14 * scale);
            let o = pushforward_oracle(&conn, &cfg.cover, xi, y);
            assert!(m.max_diff(&o) < 1e-10 * scale, "{m:?} vs {o:?}");
        }
    }
}

#[test]
fn trivial_residues_at_2_3() {
    let cov = cover23();
    let a = direct_image_matrix(&Rank1Connection::trivial(c(1.0, 0.0), c(0.0, 0.0)), &cov).unwrap();
    let res = analytic_residues(&a).unwrap();
    let z = c(0.0, 0.0);
    let want = Mat2::new(z, z, c(1.0 / (2.0 * 6f64.sqrt()), 0.0), c(0.5, 0.0));
    assert!(res.at_p_plus.unwrap().max_diff(&want) < 1e-15);
    let pair = res.at_p_plus.unwrap() + res.at_p_minus.unwrap();
    assert!(pair.max_diff(&Mat2::new(z, z, z, c(1.0, 0.0))) < 1e-15);
    assert!(pair.max_diff(&res.at_infinity.unwrap().scale(c(-1.0, 0.0))) < 1e-15);
    let num = numeric_residues(&a, &ContourSettings::default()).unwrap();
    assert!(num.max_diff(&res) < 1e-9);
}

#[test]
fn general_residues_and_eigenvalues() {
    let (cov, conn) = general();
    let a = direct_image_matrix(&conn, &cov).unwrap();
    let res = analytic_residues(&a).unwrap();
    let LineBundle::Points(q1, q2) = conn.bundle else { unreachable!() };
    let (x1, _) = xi_y(&q1);
    let (x2, _) = xi_y(&q2);
    let h = c(0.5, 0.0);
    let want = Mat2::new(h, x1 * 0.5, h / x1, h);
    assert!(res.at_q1.unwrap().max_diff(&want) < 1e-15);
    let num = numeric_residues(&a, &ContourSettings::default()).unwrap();
    let inf = Mat2::new(c(-1.0, 0.0), -(x1 + x2) * 0.5, c(0.0, 0.0), c(-2.0, 0.0));
    assert!(num.at_infinity.unwrap().max_diff(&inf) < 1e-8);
    assert!(num.max_diff(&res) < 1e-9);
    let checks: [(Option<Mat2>, [f64; 2]); 5] = [
        (res.at_p_plus, [0.0, 0.5]),
        (res.at_p_minus, [0.0, 0.5]),
        (res.at_q1, [0.0, 1.0]),
        (res.at_q2, [0.0, 1.0]),
        (res.at_infinity, [-2.0, -1.0]),
    ];
    for (m, want) in checks {
        let e = sorted_eigs(&m.unwrap());
        assert!(close(e[0], c(want[0], 0.0), 1e-12) && close(e[1], c(want[1], 0.0), 1e-12), "{e:?}");
    }
}

#[test]
fn contour_residues_are_stable_under_radius_halving() {
    let (cov, conn) = general();
    let a = direct_image_matrix(&conn, &cov).unwrap();
    let (r, ru) = default_radii(&a);
    let s = ContourSettings::default();
    let mut centers: Vec<(ResidueCenter, f64)> =
        a.finite_poles().into_iter().map(|p| (ResidueCenter::Finite(p), r)).collect();
    centers.push((ResidueCenter::Infinity, ru));
    for (center, rad) in centers {
        let big = numeric_residue(&a, center, rad, &s).unwrap();
        let small = numeric_residue(&a, center, rad / 2.0, &s).unwrap();
        assert!(big.max_diff(&small) < 1e-8, "{center:?}");
    }
    assert!(numeric_residue(&a, ResidueCenter::Finite(EPoint::affine(c(0.0, 0.0), c(0.0, 0.0))), r, &s).is_err());
}

#[test]
fn scalar_coefficients_at_zero_lambda() {
    let cov = cover23();
    let conn = Rank1Connection::trivial(c(0.0, 0.0), c(0.0, 0.0));
    for x in [c(0.4, 0.3), c(-1.0, 2.0), c(2.5, -0.5)] {
        let y = cov.curve().rhs(x).sqrt();
        let (p, q) = scalar_ode_coeffs(&conn, &cov, x, y).unwrap();
        let p3 = x * (x - 1.0) * (x - 2.0);
        let dp3 = x * x * 3.0 - x * 6.0 + 2.0;
        assert!(q.norm() == 0.0);
        assert!(close(p, dp3 / (p3 * 2.0) + ((x - 3.0) * 2.0).inv(), 1e-13));
    }
    assert!(scalar_ode_coeffs(&conn, &cov, c(1.0, 0.0), c(0.0, 0.0)).is_err());
    let (_, g) = general();
    assert!(scalar_ode_coeffs(&g, &cov, c(0.4, 0.3), c(1.0, 0.0)).is_err());
}

/// Classical RK4 along the segment `x0 → x1`, tracking `y` by continuity.
fn rk4<const N: usize>(
    f: impl Fn(C64, C64, &[C64; N]) -> [C64; N],
    curve_rhs: impl Fn(C64) -> C64,
    x0: C64,
    x1: C64,
    y0: C64,
    init: [C64; N],
    steps: usize,
    mut visit: impl FnMut(C64, C64, &[C64; N]),
) {
    let h = (x1 - x0) / steps as f64;
    let mut v = init;
    let mut y = y0;
    let axpy = |a: &[C64; N], k: &[C64; N], s: C64| {
        let mut o = *a;
        for i in 0..N {
            o[i] += k[i] * s;
        }
        o
    };
    for n in 0..steps {
        let x = x0 + h * n as f64;
        let ym = follow(curve_rhs(x + h * 0.5), y);
        let ye = follow(curve_rhs(x + h), ym);
        let k1 = f(x, y, &v);
        let k2 = f(x + h * 0.5, ym, &axpy(&v, &k1, h * 0.5));
        let k3 = f(x + h * 0.5, ym, &axpy(&v, &k2, h * 0.5));
        let k4 = f(x + h, ye, &axpy(&v, &k3, h));
        for i in 0..N {
            v[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0);
        }
        y = ye;
        visit(x + h, y, &v);
    }
}

#[test]
fn scalar_equation_matches_the_system() {
    let cov = BiellipticCover::new(c(1.9, 0.2), c(3.3, -0.1)).unwrap();
    let curve = cov.curve();
    for (l1, l2) in [(c(0.6, -0.2), c(-0.9, 0.5)), (c(1.3, 0.4), c(0.0, 0.0))] {
        let conn = Rank1Connection::trivial(l1, l2);
        let a = direct_image_matrix(&conn, &cov).unwrap();
        let (x0, x1) = (c(0.4, 0.6), c(2.6, 1.1));
        let y0 = curve.rhs(x0).sqrt();
        let phi0 = [c(1.0, 0.5), c(-0.3, 0.8)];
        let dphi0 = a.eval(x0, y0).apply(phi0);
        let init_scalar = [phi0[0], -dphi0[0]];
        let mut sys = Vec::new();
        rk4(
            |x, y, v| {
                let d = a.eval(x, y).apply(*v);
                [-d[0], -d[1]]
            },
            |x| curve.rhs(x),
            x0,
            x1,
            y0,
            phi0,
            4000,
            |_, _, v| sys.push(*v),
        );
        let mut k = 0;
        rk4(
            |x, y, v| {
                let (p, q) = scalar_ode_coeffs(&conn, &cov, x, y).unwrap();
                [v[1], -p * v[1] - q * v[0]]
            },
            |x| curve.rhs(x),
            x0,
            x1,
            y0,
            init_scalar,
            4000,
            |_, y, v| {
                let s = sys[k];
                k += 1;
                assert!((v[0] - s[0]).norm() < 1e-7, "Φ1 {} vs {}", v[0], s[0]);
                let phi2 = eliminate_phi2(&conn, y, v[0], v[1]).unwrap();
                assert!((phi2 - s[1]).norm() < 1e-7, "Φ2 {phi2} vs {}", s[1]);
            },
        );
        assert_eq!(k, 4000);
    }
    let conn = Rank1Connection::trivial(c(0.0, 0.0), c(1.0, 0.0));
    assert!(eliminate_phi2(&conn, c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(25))]

    #[test]
    fn random_residues_sum_to_zero_and_match(seed in any::<u64>()) {
        let cfg = random_config(&mut rng(seed), 0.15);
        let a = direct_image_matrix(&cfg.conn, &cfg.cover).unwrap();
        let num = numeric_residues(&a, &ContourSettings::default()).unwrap();
        let ana = analytic_residues(&a).unwrap();
        prop_assert!(num.sum().max_abs() < 1e-9);
        prop_assert!(ana.sum().max_abs() < 1e-12);
        prop_assert!(num.max_diff(&ana) < 1e-9);
        for (name, m) in ana.iter() {
            let e = sorted_eigs(&m);
            let want = match name {
                "p+" | "p-" => [0.0, 0.5],
                "q1" | "q2" => [0.0, 1.0],
                _ => [-2.0, -1.0],
            };
            prop_assert!(close(e[0], c(want[0], 0.0), 1e-9) && close(e[1], c(want[1], 0.0), 1e-9));
        }
    }
}

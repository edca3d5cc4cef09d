mod common;

use common::*;
use ellconn::groups::exact::SymbolBasis;
use ellconn::groups::lattice::integer_relations;
use ellconn::groups::*;
use ellconn::linalg::Mat2;
use ellconn::monodromy::closed_form_trivial;
use ellconn::periods::hyperelliptic_constants;
use ellconn::quadrature::QuadratureSettings;
use ellconn::{Error, C64};
use proptest::prelude::*;
use std::f64::consts::PI;

fn exact(values: [&str; 4]) -> Exponents {
    let basis = SymbolBasis::new(&["u", "v", "w", "z"]).unwrap();
    let values = values.map(|s| basis.parse(s).unwrap());
    Exponents::Exact { basis, values }
}

/// `e^{α1} H^{β1}`, `e^{α2} H^{β2}` and `diag(1, -1)` from numeric exponents.
fn generators(e: [C64; 4]) -> [Mat2; 3] {
    [h_theta(e[2]).scale(e[0].exp()), h_theta(e[3]).scale(e[1].exp()), Mat2::sigma3()]
}

/// Numeric value of a rational multiple of `πi`.
fn pi_i(p: i64, q: i64) -> C64 {
    c(0.0, PI * p as f64 / q as f64)
}

fn word_product(gens: &[Mat2; 3], word: &[(usize, bool)]) -> (Mat2, [i64; 2]) {
    let mut m = Mat2::identity();
    let mut jk = [0i64; 2];
    for &(g, inv) in word {
        let x = if inv { gens[g].inverse().unwrap() } else { gens[g] };
        if g < 2 {
            jk[g] += if inv { -1 } else { 1 };
        }
        m = m * x;
    }
    (m, jk)
}

#[test]
fn decomposition_examples() {
    let g = decompose_gg(&Mat2::sigma3()).unwrap();
    assert_eq!(g.eps, -1);
    assert!((g.c - 1.0).norm() < 1e-14 && (g.alpha - 1.0).norm() < 1e-14 && g.beta.norm() < 1e-14);
    assert!(decompose_gg(&Mat2::from_real(1.0, 1.0, 0.0, 1.0)).is_err());
    assert!(decompose_gg(&Mat2::zero()).is_err());

    let k = hyperelliptic_constants(2.0, 3.0, &QuadratureSettings::default()).unwrap();
    let (l1, l2) = (c(0.3, 0.1), c(-0.2, 0.4));
    let m = closed_form_trivial(l1, l2, &k);
    let g = decompose_gg(&m.m_b).unwrap();
    let want = GGElement {
        c: (l2 * 2.0 * k.lp).exp(),
        alpha: (l1 * 2.0 * k.l).cosh(),
        beta: (l1 * 2.0 * k.l).sinh(),
        eps: 1,
    };
    assert!(g.approx_eq(&want, 1e-12));
    let e = exponents_from_monodromy(&m).unwrap();
    let mats = generators(e);
    assert!(mats[0].max_diff(&m.m_a) < 1e-12 && mats[1].max_diff(&m.m_b) < 1e-12);
    let t = trivial_exponents(l1, l2, &k);
    for j in 0..4 {
        assert!(distance_mod_pi_i(e[j] - t[j]) < 1e-12, "{} vs {}", e[j], t[j]);
    }
}

/// Distance to the nearest multiple of `πi`.
fn distance_mod_pi_i(z: C64) -> f64 {
    let k = (z.im / PI).round();
    (z - c(0.0, k * PI)).norm()
}

#[test]
fn r_and_h_agree_on_imaginary_arguments() {
    for th in [0.3, -1.2, 2.5] {
        assert!(h_theta(c(0.0, th)).max_diff(&r_theta(c(th, 0.0))) < 1e-15);
    }
}

#[test]
fn kernel_examples() {
    let k = kernel_data(&Exponents::generic_exact()).unwrap();
    assert_eq!((k.r1(), k.r2()), (0, 0));

    let k = kernel_data(&exact(["u", "v", "1/5*pi_i", "0"])).unwrap();
    assert_eq!(k.r1(), 2);
    assert!(k.ker_phi1.contains([5, 0]) && k.ker_phi1.contains([0, 1]));
    assert!(!k.ker_phi1.contains([1, 0]) && !k.ker_phi1.contains([2, 0]));
    assert_eq!(k.ker_phi1.index(), Some(5));
}

#[test]
fn numeric_mode_recovers_a_planted_relation() {
    let mut r = rng(17);
    for _ in 0..5 {
        let a1 = rand_c(&mut r, (-1.0, 1.0), (-1.0, 1.0));
        let a2 = rand_c(&mut r, (-1.0, 1.0), (-1.0, 1.0));
        let b2 = rand_c(&mut r, (-1.0, 1.0), (-1.0, 1.0));
        let b1 = (pi_i(1, 1) + b2 * 2.0) / 3.0;
        let k = kernel_data(&Exponents::numeric([a1, a2, b1, b2])).unwrap();
        assert_eq!(k.relations.len(), 1);
        let rel = &k.relations[0];
        let s = if rel[2] > 0 { 1 } else { -1 };
        assert_eq!(rel.iter().map(|x| x * s).collect::<Vec<_>>(), vec![0, 0, 3, -2, -1]);
        let q = k.quality.unwrap();
        assert!(q.max_accepted < 1e-12 && q.min_rejected > 1e-4);
        assert!(k.ker_phi1.contains([3, -2]));
        assert_eq!(k.r1(), 1);
    }
    let x = [c(1.0, 0.0), c(1.0 + 1e-7, 0.0)];
    assert!(matches!(integer_relations(&x, 1000, 1e-12), Err(Error::Inconclusive(_))));
}

#[test]
fn classification_examples() {
    let c1 = classify_group(&kernel_data(&Exponents::generic_exact()).unwrap()).unwrap();
    assert_eq!((c1.table_row, c1.split, c1.finite), (1, Split::Yes, false));
    assert!(table_row(&AbelianQuotient::MuZ(2), &AbelianQuotient::MuZ(3)).is_err());
    assert_eq!(table_row(&AbelianQuotient::MuZ(3), &AbelianQuotient::MuZ(5)).unwrap(), 5);
    assert_eq!(table_row(&AbelianQuotient::MuZ(2), &AbelianQuotient::MuZ(4)).unwrap(), 5);

    let k = kernel_data(&exact(["1/5*pi_i", "u", "1/3*pi_i", "v"])).unwrap();
    let c5 = classify_group(&k).unwrap();
    assert_eq!((c5.q1, c5.q2), (AbelianQuotient::MuZ(3), AbelianQuotient::MuZ(5)));
    assert_eq!(c5.table_row, 5);

    let k = kernel_data(&exact(["0", "0", "2/3*pi_i", "1/2*pi_i"])).unwrap();
    assert_eq!((k.r1(), k.r2()), (2, 2));
    let cf = classify_group(&k).unwrap();
    assert!(cf.finite);
    assert_eq!(cf.order, Some(24));
    assert!(cf.structure.starts_with("D_"), "{}", cf.structure);
    assert_eq!(classify_dgal(&k), DGalClass::FiniteEqualsG);
    assert_eq!(order_from_characters(&k), Some(24));
}

#[test]
fn closure_examples() {
    let s3 = Mat2::sigma3();
    let i = Mat2::identity();
    let (n, _) = finite_closure(&[r_theta(c(2.0 * PI / 5.0, 0.0)), i, s3], 1000).unwrap();
    assert_eq!(n, 10);
    let (n, _) = finite_closure(&[i, i, s3], 1000).unwrap();
    assert_eq!(n, 2);
    let (n, elems) = finite_closure(&[r_theta(c(2.0 * PI / 3.0, 0.0)), r_theta(c(PI / 2.0, 0.0)), s3], 1000).unwrap();
    assert_eq!(n, 24);
    assert!(elems.iter().all(|m| decompose_gg(m).is_ok()));
    let k = kernel_data(&exact(["0", "0", "2/5*pi_i", "0"])).unwrap();
    assert_eq!(classify_group(&k).unwrap().order, Some(10));
    assert!(matches!(
        finite_closure(&[h_theta(c(0.3, 0.0)), i, s3], 200),
        Err(Error::Inconclusive(_))
    ));
}

#[test]
fn dgal_trichotomy_examples() {
    let k = kernel_data(&Exponents::generic_exact()).unwrap();
    assert_eq!(classify_dgal(&k), DGalClass::FullGG);
    assert_eq!(dgal_from_characters(&k), DGalClass::FullGG);

    // Only α1 is nonzero: the closure is the scalars times ⟨σ3⟩.
    let k = kernel_data(&exact(["u", "0", "0", "0"])).unwrap();
    assert_eq!((k.r1(), k.r2()), (2, 1));
    assert_eq!(classify_dgal(&k), DGalClass::OneDim(Some(1)));
    assert_eq!(dgal_from_characters(&k), DGalClass::OneDim(Some(1)));

    // Two different kernel lines.
    let k = kernel_data(&exact(["u", "0", "w", "w"])).unwrap();
    assert_eq!((k.r1(), k.r2()), (1, 1));
    assert!(k.ker_phi1.intersects_trivially(&k.ker_phi2));
    assert_eq!(classify_dgal(&k), DGalClass::FullGG);
    assert_eq!(dgal_from_characters(&k), DGalClass::FullGG);
}

#[test]
fn equal_kernel_lines_can_still_give_the_full_group() {
    // M_a = M_b = e^u H^w. Then M σ3 M σ3 = e^{2u} and M (σ3 M σ3)^{-1} = H^{2w}
    // lie in G, so the closure contains the whole torus.
    let k = kernel_data(&exact(["u", "u", "w", "w"])).unwrap();
    assert_eq!((k.r1(), k.r2()), (1, 1));
    assert_eq!(k.ker_phi1, k.ker_phi2);
    assert_eq!(k.characters.rank(), 0);
    assert_eq!(dgal_from_characters(&k), DGalClass::FullGG);
    // The rank criterion alone answers one-dimensional here.
    assert!(matches!(classify_dgal(&k), DGalClass::OneDim(_)));

    let (u, w) = (c(0.37, 0.21), c(-0.44, 0.63));
    let [m, _, s3] = generators([u, u, w, w]);
    let conj = s3 * m * s3;
    assert!((m * conj).max_diff(&Mat2::identity().scale((u * 2.0).exp())) < 1e-13);
    assert!((m * conj.inverse().unwrap()).max_diff(&h_theta(w * 2.0)) < 1e-13);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn decomposition_composes_along_words(
        seed in any::<u64>(),
        word in proptest::collection::vec((0usize..3, any::<bool>()), 1..8),
    ) {
        let mut r = rng(seed);
        let e = [0; 4].map(|_| rand_c(&mut r, (-0.7, 0.7), (-0.7, 0.7)));
        let gens = generators(e);
        let mut acc = decompose_gg(&Mat2::identity()).unwrap();
        let mut m = Mat2::identity();
        for &(g, inv) in &word {
            let x = if inv { gens[g].inverse().unwrap() } else { gens[g] };
            let dx = decompose_gg(&x).unwrap();
            acc = acc.compose(&dx);
            m = m * x;
            let dm = decompose_gg(&m).unwrap();
            prop_assert!((dm.alpha * dm.alpha - dm.beta * dm.beta - 1.0).norm() < 1e-9);
            prop_assert!(dm.approx_eq(&acc, 1e-9));
        }
    }

    #[test]
    fn unit_determinant_iff_zero_total_exponent(
        seed in any::<u64>(),
        word in proptest::collection::vec((0usize..3, any::<bool>()), 1..10),
    ) {
        let mut r = rng(seed);
        let e = [0; 4].map(|_| rand_c(&mut r, (-0.7, 0.7), (-0.7, 0.7)));
        let gens = generators(e);
        let (x, jk) = word_product(&gens, &word);
        let d = x.det();
        let unit = (d * d - 1.0).norm() < 1e-9;
        prop_assert_eq!(unit, jk == [0, 0], "det {} for exponents {:?}", d, jk);
    }

    #[test]
    fn rational_exponents_classify_and_close(
        p in proptest::collection::vec(-3i64..4, 4),
        q in proptest::collection::vec(1i64..5, 4),
    ) {
        let strs: Vec<String> = (0..4).map(|j| format!("{}/{}*pi_i", p[j], q[j])).collect();
        let k = kernel_data(&exact([&strs[0], &strs[1], &strs[2], &strs[3]])).unwrap();
        let cl = classify_group(&k).unwrap();
        prop_assert!((1..=11).contains(&cl.table_row));
        prop_assert!(cl.finite);
        let gens = generators([0, 1, 2, 3].map(|j| pi_i(p[j], q[j])));
        let (n, _) = finite_closure(&gens, 5000).unwrap();
        prop_assert_eq!(Some(n as i128), cl.order);
        prop_assert_eq!(order_from_characters(&k), cl.order);
        prop_assert_eq!(dgal_from_characters(&k), DGalClass::FiniteEqualsG);
    }
}

#![allow(dead_code)]

use ellconn::connections::Rank1Connection;
use ellconn::curves::{BiellipticCover, CPoint};
use ellconn::linalg::Mat2;
use ellconn::C64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rand_c(r: &mut ChaCha8Rng, re: (f64, f64), im: (f64, f64)) -> C64 {
    c(r.gen_range(re.0..re.1), r.gen_range(im.0..im.1))
}

/// A random generic configuration with complex `t, t'`, random `λ` and
/// two affine divisor points, all special abscissae at least `sep` apart.
pub struct RandomConfig {
    pub cover: BiellipticCover,
    pub conn: Rank1Connection,
    pub q1: CPoint,
    pub q2: CPoint,
}

pub fn random_config(r: &mut ChaCha8Rng, sep: f64) -> RandomConfig {
    loop {
        let t = rand_c(r, (1.3, 2.7), (-0.6, 0.6));
        let tp = rand_c(r, (2.9, 4.5), (-0.6, 0.6));
        let Ok(cover) = BiellipticCover::new(t, tp) else { continue };
        let xi1 = rand_c(r, (-1.5, 1.5), (-1.5, 1.5));
        let xi2 = rand_c(r, (-1.5, 1.5), (-1.5, 1.5));
        let s1 = if r.gen_bool(0.5) { 1.0 } else { -1.0 };
        let s2 = if r.gen_bool(0.5) { 1.0 } else { -1.0 };
        let xs = [c(0.0, 0.0), c(1.0, 0.0), t, tp, tp - xi1 * xi1, tp - xi2 * xi2];
        let mut ok = xi1.norm() > sep && xi2.norm() > sep && (xi1 - xi2).norm() > sep && (xi1 + xi2).norm() > sep;
        for i in 0..xs.len() {
            for j in i + 1..xs.len() {
                ok &= (xs[i] - xs[j]).norm() > sep;
            }
        }
        if !ok {
            continue;
        }
        let q1 = cover.point_at(xi1, s1);
        let q2 = cover.point_at(xi2, s2);
        let l1 = rand_c(r, (-1.0, 1.0), (-1.0, 1.0));
        let l2 = rand_c(r, (-1.0, 1.0), (-1.0, 1.0));
        let conn = Rank1Connection::points(l1, l2, q1, q2);
        return RandomConfig { cover, conn, q1, q2 };
    }
}

/// A random trivial-bundle configuration.
pub fn random_trivial(r: &mut ChaCha8Rng, sep: f64) -> (BiellipticCover, Rank1Connection) {
    loop {
        let t = rand_c(r, (1.3, 2.7), (-0.6, 0.6));
        let tp = rand_c(r, (2.9, 4.5), (-0.6, 0.6));
        let Ok(cover) = BiellipticCover::new(t, tp) else { continue };
        if (t - tp).norm() < sep {
            continue;
        }
        let l1 = rand_c(r, (-1.0, 1.0), (-1.0, 1.0));
        let l2 = rand_c(r, (-1.0, 1.0), (-1.0, 1.0));
        return (cover, Rank1Connection::trivial(l1, l2));
    }
}

pub fn xi_y(p: &CPoint) -> (C64, C64) {
    p.coords().expect("affine point")
}

pub fn m(a: C64, b: C64, cc: C64, d: C64) -> Mat2 {
    Mat2::new(a, b, cc, d)
}

/// Reference constants at `(t, t') = (2, 3)` from 30-digit adaptive
/// quadrature of the defining real integrals.
pub const K_23: f64 = 1.078_257_823_749_821_8;
pub const KP_23: f64 = 1.311_028_777_146_060_2;
pub const L_23: f64 = 0.842_875_177_406_297_6;
pub const LP_23: f64 = 1.311_028_777_146_059_2;

/// `∫_a^b w(ξ) dξ / sqrt((ξ-a)(b-ξ) r(ξ))` by the substitution
/// `ξ = m + h sin θ`, which turns it into `∫ w/sqrt(r) dθ` over
/// `[-π/2, π/2]`, then composite 5-point Gauss-Legendre.
pub fn sine_substituted_integral<W: Fn(f64) -> f64, R: Fn(f64) -> f64>(
    w: W,
    r: R,
    a: f64,
    b: f64,
    panels: usize,
) -> f64 {
    let nodes = [
        (0.0, 128.0 / 225.0),
        (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
        (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
        (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
        (0.906_179_845_938_664, 0.236_926_885_056_189_1),
    ];
    let (mid, half) = ((a + b) / 2.0, (b - a) / 2.0);
    let lo = -std::f64::consts::FRAC_PI_2;
    let width = std::f64::consts::PI / panels as f64;
    let mut s = 0.0;
    for k in 0..panels {
        let c0 = lo + width * (k as f64 + 0.5);
        for (x, wt) in nodes {
            let xi = mid + half * (c0 + 0.5 * width * x).sin();
            s += wt * 0.5 * width * w(xi) / r(xi).sqrt();
        }
    }
    s
}

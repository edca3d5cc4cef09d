//! Small dense complex matrices. Everything here is 2×2.

use crate::C64;
use std::ops::{Add, Mul, Neg, Sub};

/// A 2×2 complex matrix stored row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub m: [[C64; 2]; 2],
}

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

impl Mat2 {
    pub const fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Mat2 { m: [[a, b], [c, d]] }
    }

    pub fn from_real(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2::new(a.into(), b.into(), c.into(), d.into())
    }

    pub const fn zero() -> Self {
        Mat2::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub const fn identity() -> Self {
        Mat2::new(ONE, ZERO, ZERO, ONE)
    }

    pub fn diag(a: C64, d: C64) -> Self {
        Mat2::new(a, ZERO, ZERO, d)
    }

    /// The involution diag(1, -1).
    pub fn sigma3() -> Self {
        Mat2::diag(ONE, -ONE)
    }

    /// The swap matrix [[0,1],[1,0]].
    pub fn sigma1() -> Self {
        Mat2::new(ZERO, ONE, ONE, ZERO)
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.m[i][j]
    }

    pub fn scale(&self, s: C64) -> Self {
        let m = self.m;
        Mat2::new(m[0][0] * s, m[0][1] * s, m[1][0] * s, m[1][1] * s)
    }

    pub fn det(&self) -> C64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn trace(&self) -> C64 {
        self.m[0][0] + self.m[1][1]
    }

    pub fn transpose(&self) -> Self {
        let m = self.m;
        Mat2::new(m[0][0], m[1][0], m[0][1], m[1][1])
    }

    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d.norm() == 0.0 || !d.is_finite() {
            return None;
        }
        let m = self.m;
        Some(Mat2::new(m[1][1], -m[0][1], -m[1][0], m[0][0]).scale(d.inv()))
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.m
            .iter()
            .flat_map(|r| r.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.m
            .iter()
            .flat_map(|r| r.iter())
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().flat_map(|r| r.iter()).all(|z| z.is_finite())
    }

    pub fn max_diff(&self, other: &Mat2) -> f64 {
        (*self - *other).max_abs()
    }

    pub fn apply(&self, v: [C64; 2]) -> [C64; 2] {
        [
            self.m[0][0] * v[0] + self.m[0][1] * v[1],
            self.m[1][0] * v[0] + self.m[1][1] * v[1],
        ]
    }

    pub fn powi(&self, n: i64) -> Option<Self> {
        let (mut base, mut e) = if n < 0 {
            (self.inverse()?, n.unsigned_abs())
        } else {
            (*self, n as u64)
        };
        let mut acc = Mat2::identity();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        Some(acc)
    }

    /// Group commutator X Y X^-1 Y^-1.
    pub fn commutator(&self, other: &Mat2) -> Option<Self> {
        Some(*self * *other * self.inverse()? * other.inverse()?)
    }

    /// Both eigenvalues, ordered by increasing real part then imaginary part.
    pub fn eigenvalues(&self) -> [C64; 2] {
        let tr = self.trace();
        let disc = (tr * tr - self.det().scale(4.0)).sqrt();
        let mut e = [(tr + disc) * 0.5, (tr - disc) * 0.5];
        e.sort_by(|a, b| {
            a.re.partial_cmp(&b.re)
                .unwrap()
                .then(a.im.partial_cmp(&b.im).unwrap())
        });
        e
    }

    /// A unit eigenvector for eigenvalue `mu` (which must be an eigenvalue).
    pub fn eigenvector(&self, mu: C64) -> [C64; 2] {
        let b = *self - Mat2::identity().scale(mu);
        // Rows of (M - mu) are orthogonal to the kernel; take the larger row.
        let r0 = [b.m[0][0], b.m[0][1]];
        let r1 = [b.m[1][0], b.m[1][1]];
        let n0 = r0[0].norm_sqr() + r0[1].norm_sqr();
        let n1 = r1[0].norm_sqr() + r1[1].norm_sqr();
        let r = if n0 >= n1 { r0 } else { r1 };
        let v = if r[0].norm() + r[1].norm() < 1e-300 {
            [ONE, ZERO]
        } else {
            [-r[1], r[0]]
        };
        normalize(v)
    }
}

fn normalize(v: [C64; 2]) -> [C64; 2] {
    let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    [v[0] / n, v[1] / n]
}

/// Cross-product magnitude of two projective directions after normalisation;
/// zero iff they define the same point of P^1.
pub fn projective_distance(u: [C64; 2], v: [C64; 2]) -> f64 {
    let u = normalize(u);
    let v = normalize(v);
    (u[0] * v[1] - u[1] * v[0]).norm()
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        let (a, b) = (self.m, o.m);
        Mat2::new(
            a[0][0] + b[0][0],
            a[0][1] + b[0][1],
            a[1][0] + b[1][0],
            a[1][1] + b[1][1],
        )
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        self + (-o)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.scale(-ONE)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let (a, b) = (self.m, o.m);
        Mat2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

/// Solve the 2×2 system M v = r.
pub fn solve2(m: &Mat2, r: [C64; 2]) -> Option<[C64; 2]> {
    Some(m.inverse()?.apply(r))
}

/// Eigenvalues of a real symmetric 2×2 matrix [[a, b], [b, d]], ascending.
pub fn sym_eigen_real(a: f64, b: f64, d: f64) -> [f64; 2] {
    let mean = 0.5 * (a + d);
    let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    [mean - rad, mean + rad]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn inverse_and_det() {
        let m = Mat2::new(c(1.0, 2.0), c(0.5, 0.0), c(-1.0, 1.0), c(3.0, -1.0));
        let p = m * m.inverse().unwrap();
        assert!(p.max_diff(&Mat2::identity()) < 1e-14);
        assert!((m.det() - (c(1.0, 2.0) * c(3.0, -1.0) - c(0.5, 0.0) * c(-1.0, 1.0))).norm() < 1e-15);
    }

    #[test]
    fn eigen_pairs() {
        let m = Mat2::new(c(0.5, 0.0), c(0.3, 0.1), c(1.0 / 0.6, 0.0), c(0.5, 0.0));
        for mu in m.eigenvalues() {
            let v = m.eigenvector(mu);
            let w = m.apply(v);
            assert!((w[0] - mu * v[0]).norm() < 1e-12);
            assert!((w[1] - mu * v[1]).norm() < 1e-12);
        }
    }

    #[test]
    fn powers() {
        let m = Mat2::new(c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0));
        let p = m.powi(-3).unwrap();
        assert!(p.max_diff(&Mat2::from_real(1.0, -3.0, 0.0, 1.0)) < 1e-15);
    }

    #[test]
    fn symmetric_real_eigen() {
        let e = sym_eigen_real(1.5, -0.5, 1.5);
        assert!((e[0] - 1.0).abs() < 1e-15 && (e[1] - 2.0).abs() < 1e-15);
    }
}

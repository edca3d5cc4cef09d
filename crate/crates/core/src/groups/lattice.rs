//! Integer lattices: kernels of integer matrices, sublattices of `ℤ²` in
//! Hermite normal form, and integer-relation search by LLL reduction.

use crate::{Error, Result, C64};
use num_integer::Integer;

/// Basis of `{x ∈ ℤⁿ : A x = 0}` for an integer matrix given by rows.
pub fn integer_kernel(rows: &[Vec<i128>], n: usize) -> Vec<Vec<i128>> {
    // Column operations on A, mirrored on U = I; zero columns of the reduced
    // A mark kernel vectors in U.
    let m = rows.len();
    let mut a: Vec<Vec<i128>> = rows.to_vec();
    let mut u: Vec<Vec<i128>> = (0..n).map(|i| (0..n).map(|j| i128::from(i == j)).collect()).collect();
    let col_op = |mat: &mut Vec<Vec<i128>>, dst: usize, src: usize, q: i128| {
        for row in mat.iter_mut() {
            row[dst] -= q * row[src];
        }
    };
    let swap = |mat: &mut Vec<Vec<i128>>, i: usize, j: usize| {
        for row in mat.iter_mut() {
            row.swap(i, j);
        }
    };
    let mut col = 0;
    for r in 0..m {
        if col >= n {
            break;
        }
        loop {
            // Smallest nonzero |entry| in row r among columns >= col.
            let piv = (col..n).filter(|&j| a[r][j] != 0).min_by_key(|&j| a[r][j].abs());
            let Some(p) = piv else { break };
            swap(&mut a, col, p);
            swap(&mut u, col, p);
            let mut done = true;
            for j in col + 1..n {
                if a[r][j] != 0 {
                    let q = Integer::div_floor(&a[r][j], &a[r][col]);
                    col_op(&mut a, j, col, q);
                    col_op(&mut u, j, col, q);
                    if a[r][j] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                col += 1;
                break;
            }
        }
    }
    (col..n).map(|j| (0..n).map(|i| u[i][j]).collect()).collect()
}

/// A sublattice of `ℤ²` with basis in Hermite normal form: rows `(a, b)`
/// and `(0, c)` with `a > 0`, `0 ≤ b < c` when both are present.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice2 {
    pub basis: Vec<[i128; 2]>,
}

impl Lattice2 {
    pub fn zero() -> Self {
        Lattice2 { basis: Vec::new() }
    }

    pub fn full() -> Self {
        Lattice2 { basis: vec![[1, 0], [0, 1]] }
    }

    pub fn from_generators(gens: &[[i128; 2]]) -> Self {
        let mut rows: Vec<[i128; 2]> = gens.iter().copied().filter(|g| g[0] != 0 || g[1] != 0).collect();
        // Euclid on the first column.
        let mut first: Option<[i128; 2]> = None;
        let mut rest: Vec<i128> = Vec::new();
        while let Some(mut v) = rows.pop() {
            if v[0] == 0 {
                rest.push(v[1]);
                continue;
            }
            match first.as_mut() {
                None => first = Some(v),
                Some(f) => {
                    while v[0] != 0 {
                        let q = Integer::div_floor(&f[0], &v[0]);
                        let r = [f[0] - q * v[0], f[1] - q * v[1]];
                        *f = v;
                        v = r;
                    }
                    rest.push(v[1]);
                }
            }
        }
        let c = rest.iter().fold(0i128, |g, x| g.gcd(x));
        let mut basis = Vec::new();
        if let Some(mut f) = first {
            if f[0] < 0 {
                f = [-f[0], -f[1]];
            }
            if c != 0 {
                f[1] = f[1].mod_floor(&c);
            }
            basis.push(f);
        }
        if c != 0 {
            basis.push([0, c]);
        }
        Lattice2 { basis }
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn contains(&self, v: [i128; 2]) -> bool {
        match self.basis.as_slice() {
            [] => v == [0, 0],
            [w] => v[0] * w[1] == v[1] * w[0] && {
                let g = w[0].gcd(&w[1]);
                let (a, b) = (w[0] / g, w[1] / g);
                let k = if a != 0 { v[0] / a } else { v[1] / b };
                k * a == v[0] && k * b == v[1] && k % g == 0
            },
            [f, s] => {
                if v[0] % f[0] != 0 {
                    return false;
                }
                let k = v[0] / f[0];
                let rem = v[1] - k * f[1];
                s[1] != 0 && rem % s[1] == 0
            }
            _ => unreachable!(),
        }
    }

    pub fn is_subset_of(&self, other: &Lattice2) -> bool {
        self.basis.iter().all(|b| other.contains(*b))
    }

    pub fn intersects_trivially(&self, other: &Lattice2) -> bool {
        // Only rank-1 pairs can meet trivially inside ℤ² (two rank-2 or a
        // rank-2 and a nonzero lattice always share a nonzero vector).
        match (self.basis.as_slice(), other.basis.as_slice()) {
            ([], _) | (_, []) => true,
            ([v], [w]) => v[0] * w[1] != v[1] * w[0],
            _ => false,
        }
    }

    /// Invariant factors `d1 | d2` of `ℤ² / L` restricted to its torsion part,
    /// and the free rank of the quotient.
    pub fn quotient(&self) -> (usize, Vec<i128>) {
        match self.basis.as_slice() {
            [] => (2, vec![]),
            [w] => (1, vec![w[0].gcd(&w[1])]),
            [f, s] => {
                let d1 = f[0].gcd(&f[1]).gcd(&s[1]);
                let d2 = (f[0] * s[1]).abs() / d1;
                (0, vec![d1, d2])
            }
            _ => unreachable!(),
        }
    }

    /// Index `[ℤ² : L]` for a full-rank lattice.
    pub fn index(&self) -> Option<i128> {
        match self.basis.as_slice() {
            [f, s] => Some((f[0] * s[1]).abs()),
            _ => None,
        }
    }
}

/// Project kernel vectors of a constraint system onto two coordinates.
pub fn projected_kernel(rows: &[Vec<i128>], n: usize, proj: [usize; 2]) -> Lattice2 {
    let ker = integer_kernel(rows, n);
    let gens: Vec<[i128; 2]> = ker.iter().map(|v| [v[proj[0]], v[proj[1]]]).collect();
    Lattice2::from_generators(&gens)
}

/// Quality figures of a numeric relation search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelationQuality {
    pub height_bound: i128,
    pub tol: f64,
    /// Largest residual among accepted relations.
    pub max_accepted: f64,
    /// Smallest residual among rejected reduced vectors of height within the bound.
    pub min_rejected: f64,
}

/// Integer relations `Σ cᵢ xᵢ = 0` among complex values, found by LLL
/// reduction of the lattice spanned by `(eᵢ, W·Re xᵢ, W·Im xᵢ)`. Returns a
/// basis of the accepted relations. Ambiguous residuals (between `tol` and
/// `1e-4` for vectors of height within the bound) make the search
/// inconclusive.
pub fn integer_relations(
    x: &[C64],
    height_bound: i128,
    tol: f64,
) -> Result<(Vec<Vec<i128>>, RelationQuality)> {
    let n = x.len();
    let scale = x.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
    let w = 1e11 / scale;
    let mut ints: Vec<Vec<i128>> = (0..n).map(|i| (0..n).map(|j| i128::from(i == j)).collect()).collect();
    let mut tail: Vec<[f64; 2]> = x.iter().map(|v| [w * v.re, w * v.im]).collect();
    lll(&mut ints, &mut tail, 0.75);
    let mut accepted = Vec::new();
    let mut q = RelationQuality { height_bound, tol, max_accepted: 0.0, min_rejected: f64::INFINITY };
    for c in &ints {
        let height = c.iter().map(|v| v.abs()).max().unwrap_or(0);
        let mut s = C64::new(0.0, 0.0);
        let mut mag = 0.0;
        for (ci, xi) in c.iter().zip(x) {
            s += xi * (*ci as f64);
            mag += (*ci as f64).abs() * xi.norm();
        }
        let res = s.norm() / (1.0 + mag);
        if height <= height_bound && res <= tol {
            q.max_accepted = q.max_accepted.max(res);
            accepted.push(c.clone());
        } else if height <= height_bound {
            q.min_rejected = q.min_rejected.min(res);
            if res < 1e-4 {
                return Err(Error::Inconclusive(format!(
                    "near-relation of height {height} with residual {res:e} at tolerance {tol:e}"
                )));
            }
        }
    }
    Ok((accepted, q))
}

fn lll(ints: &mut [Vec<i128>], tail: &mut [[f64; 2]], delta: f64) {
    let n = ints.len();
    let gram_schmidt = |ints: &[Vec<i128>], tail: &[[f64; 2]]| -> (Vec<Vec<f64>>, Vec<f64>) {
        let dim = ints[0].len() + 2;
        let full: Vec<Vec<f64>> = ints
            .iter()
            .zip(tail)
            .map(|(i, t)| i.iter().map(|v| *v as f64).chain(t.iter().copied()).collect())
            .collect();
        let mut bstar: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mut mu = vec![vec![0.0; n]; n];
        let mut norms = vec![0.0; n];
        for i in 0..n {
            let mut v = full[i].clone();
            for j in 0..i {
                let m = (0..dim).map(|k| full[i][k] * bstar[j][k]).sum::<f64>() / norms[j];
                mu[i][j] = m;
                for k in 0..dim {
                    v[k] -= m * bstar[j][k];
                }
            }
            norms[i] = v.iter().map(|a| a * a).sum();
            bstar.push(v);
        }
        (mu, norms)
    };
    let mut k = 1;
    let mut guard = 0;
    while k < n && guard < 100_000 {
        guard += 1;
        for j in (0..k).rev() {
            let (mu, _) = gram_schmidt(ints, tail);
            let q = mu[k][j].round();
            if q != 0.0 {
                let qi = q as i128;
                let (src_i, src_t) = (ints[j].clone(), tail[j]);
                for (a, b) in ints[k].iter_mut().zip(&src_i) {
                    *a -= qi * b;
                }
                tail[k][0] -= q * src_t[0];
                tail[k][1] -= q * src_t[1];
            }
        }
        let (mu, norms) = gram_schmidt(ints, tail);
        if norms[k] >= (delta - mu[k][k - 1] * mu[k][k - 1]) * norms[k - 1] {
            k += 1;
        } else {
            ints.swap(k, k - 1);
            tail.swap(k, k - 1);
            k = (k - 1).max(1);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_of_small_matrix() {
        let k = integer_kernel(&[vec![2, 3, 5]], 3);
        assert_eq!(k.len(), 2);
        for v in &k {
            assert_eq!(2 * v[0] + 3 * v[1] + 5 * v[2], 0);
        }
    }

    #[test]
    fn lattice_normal_form() {
        let l = Lattice2::from_generators(&[[4, 2], [6, 0]]);
        assert_eq!(l.rank(), 2);
        assert_eq!(l.index(), Some(12));
        assert_eq!(l.quotient(), (0, vec![2, 6]));
        assert!(l.contains([10, 2]));
        assert!(!l.contains([1, 0]));
        let one = Lattice2::from_generators(&[[3, -2], [-6, 4]]);
        assert_eq!(one.basis, vec![[3, -2]]);
        assert!(one.contains([-9, 6]));
        assert!(!one.contains([1, 0]));
    }

    #[test]
    fn relation_recovery() {
        let pi_i = C64::new(0.0, std::f64::consts::PI);
        let b1 = C64::new(0.7, 0.3);
        let b2 = (b1 * 3.0 - pi_i) / 2.0;
        let (rels, _) = integer_relations(&[b1, b2, pi_i], 1000, 1e-9).unwrap();
        assert_eq!(rels.len(), 1);
        let r = &rels[0];
        let s = if r[0] < 0 { -1 } else { 1 };
        assert_eq!([r[0] * s, r[1] * s, r[2] * s], [3, -2, -1]);
    }
}

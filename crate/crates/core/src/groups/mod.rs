//! Structure of the monodromy group `G = ⟨M_a, M_b, M_γ1⟩ ⊂ 𝔾`:
//! decomposition in `𝔾`, the kernels of `φ1`, `φ2`, the table of possible
//! quotient pairs, brute-force closure of finite groups and the
//! differential Galois trichotomy.
//!
//! Write `M_a = e^{α1} H^{β1}`, `M_b = e^{α2} H^{β2}`. All group data is
//! derived from the lattice `R ⊂ ℤ⁵` of integer relations among
//! `(α1, α2, β1, β2, πi)`, computed exactly from declared symbols or
//! numerically by lattice reduction.

pub mod exact;
pub mod lattice;

use crate::linalg::Mat2;
use crate::monodromy::MonodromyRep;
use crate::periods::HyperellipticConstants;
use crate::{Error, Result, C64};
use exact::{ExactScalar, SymbolBasis, Q};
use lattice::{integer_relations, projected_kernel, Lattice2, RelationQuality};
use num_integer::Integer;
use std::collections::HashMap;

/// `R^θ = [[cos θ, i sin θ], [i sin θ, cos θ]]`.
pub fn r_theta(theta: C64) -> Mat2 {
    let i = C64::new(0.0, 1.0);
    Mat2::new(theta.cos(), i * theta.sin(), i * theta.sin(), theta.cos())
}

/// `H^θ = [[cosh θ, sinh θ], [sinh θ, cosh θ]]`; `H^{iθ} = R^θ`.
pub fn h_theta(theta: C64) -> Mat2 {
    Mat2::new(theta.cosh(), theta.sinh(), theta.sinh(), theta.cosh())
}

/// `C·[[α, εβ], [β, εα]]` with `α² - β² = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GGElement {
    pub c: C64,
    pub alpha: C64,
    pub beta: C64,
    pub eps: i8,
}

impl GGElement {
    pub fn matrix(&self) -> Mat2 {
        let e = C64::new(self.eps as f64, 0.0);
        Mat2::new(self.alpha, e * self.beta, self.beta, e * self.alpha).scale(self.c)
    }

    /// Product in `𝔾`: `(αI + βσ1) diag(1, ε)` composes with the hyperbolic
    /// addition law twisted by `ε` of the left factor.
    pub fn compose(&self, o: &GGElement) -> GGElement {
        let e = self.eps as f64;
        GGElement {
            c: self.c * o.c,
            alpha: self.alpha * o.alpha + self.beta * o.beta * e,
            beta: self.alpha * o.beta * e + self.beta * o.alpha,
            eps: self.eps * o.eps,
        }
    }

    /// Equality up to the sign ambiguity `(C, α, β) ~ (-C, -α, -β)`.
    pub fn approx_eq(&self, o: &GGElement, tol: f64) -> bool {
        self.eps == o.eps && self.matrix().max_diff(&o.matrix()) <= tol * (1.0 + self.matrix().max_abs())
    }
}

/// Write `M ∈ 𝔾` as `C[[α, εβ], [β, εα]]`; `C` is the principal root of
/// `ε det M`.
pub fn decompose_gg(m: &Mat2) -> Result<GGElement> {
    let tol = 1e-9 * (1.0 + m.max_abs());
    let (a, b, c, d) = (m.m[0][0], m.m[0][1], m.m[1][0], m.m[1][1]);
    let eps: i8 = if (a - d).norm() <= tol && (b - c).norm() <= tol {
        1
    } else if (a + d).norm() <= tol && (b + c).norm() <= tol {
        -1
    } else {
        return Err(Error::InvalidInput("matrix is not of the form C(αI+βσ1)diag(1,ε)".into()));
    };
    let c2 = a * a - c * c;
    if c2.norm() <= tol * tol {
        return Err(Error::InvalidInput("matrix is singular, not in 𝔾".into()));
    }
    let cc = c2.sqrt();
    Ok(GGElement { c: cc, alpha: a / cc, beta: c / cc, eps })
}

/// Exponent data `(α1, α2, β1, β2)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Exponents {
    Exact { basis: SymbolBasis, values: [ExactScalar; 4] },
    Numeric { values: [C64; 4], height_bound: i128, tol: f64 },
}

impl Exponents {
    /// The generic exact case: `α1 = -2s1`, `α2 = 2s2`, `β1 = -2s3`,
    /// `β2 = 2s4` with `s = (iλ2K', λ2L', iλ1K, λ1L)` declared free.
    pub fn generic_exact() -> Self {
        let basis = SymbolBasis::new(&["i_l2_Kp", "l2_Lp", "i_l1_K", "l1_L"]).unwrap();
        let two = Q::from_integer(2);
        let values = [
            basis.symbol("i_l2_Kp", -two).unwrap(),
            basis.symbol("l2_Lp", two).unwrap(),
            basis.symbol("i_l1_K", -two).unwrap(),
            basis.symbol("l1_L", two).unwrap(),
        ];
        Exponents::Exact { basis, values }
    }

    pub fn numeric(values: [C64; 4]) -> Self {
        Exponents::Numeric { values, height_bound: 1000, tol: 1e-8 }
    }
}

/// `(α1, α2, β1, β2)` for the trivial bundle from the period constants.
pub fn trivial_exponents(lambda1: C64, lambda2: C64, k: &HyperellipticConstants) -> [C64; 4] {
    let i = C64::new(0.0, 1.0);
    [
        -i * lambda2 * 2.0 * k.kp,
        lambda2 * 2.0 * k.lp,
        -i * lambda1 * 2.0 * k.k,
        lambda1 * 2.0 * k.l,
    ]
}

/// Exponents read off a monodromy representation whose `M_a`, `M_b` lie in
/// `𝔾₀`: the eigenvalues on `(1, ±1)` are `e^{α ± β}`.
pub fn exponents_from_monodromy(rep: &MonodromyRep) -> Result<[C64; 4]> {
    let mut out = [C64::new(0.0, 0.0); 4];
    for (j, m) in [rep.m_a, rep.m_b].iter().enumerate() {
        let g = decompose_gg(m)?;
        if g.eps != 1 {
            return Err(Error::InvalidInput("M_a, M_b must lie in the identity component".into()));
        }
        let z1 = (m.m[0][0] + m.m[0][1]).ln();
        let z2 = (m.m[0][0] - m.m[0][1]).ln();
        out[j] = (z1 + z2) * 0.5;
        out[j + 2] = (z1 - z2) * 0.5;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMode {
    Exact,
    Numeric,
}

/// Kernels of `φ1`, `φ2`, `σ` and the character lattice of the Zariski
/// closure of `G ∩ 𝔾₀`, all as sublattices of `ℤ²`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelData {
    pub mode: OracleMode,
    /// Basis of the relations among `(α1, α2, β1, β2, πi)`.
    pub relations: Vec<Vec<i128>>,
    pub ker_phi1: Lattice2,
    pub ker_phi2: Lattice2,
    pub ker_sigma: Lattice2,
    /// Characters `z1^{k1} z2^{k2}` of `𝔾₀ ≅ ℂ*×ℂ*` (eigenvalue coordinates)
    /// trivial on `M_a`, `M_b`, `H^{2β1}`, `H^{2β2}`.
    pub characters: Lattice2,
    pub quality: Option<RelationQuality>,
}

impl KernelData {
    pub fn r1(&self) -> usize {
        self.ker_phi1.rank()
    }

    pub fn r2(&self) -> usize {
        self.ker_phi2.rank()
    }
}

fn lcm_of_denominators(row: &[Q]) -> i128 {
    row.iter().fold(1i128, |l, q| l.lcm(q.denom()))
}

/// Relations among `(x_1, ..., x_k, πi)`, exactly.
pub fn exact_relations(basis: &SymbolBasis, values: &[ExactScalar]) -> Vec<Vec<i128>> {
    let n = values.len() + 1;
    let pi = basis.pi_i(Q::from_integer(1));
    let cols: Vec<&ExactScalar> = values.iter().chain(std::iter::once(&pi)).collect();
    let rows: Vec<Vec<i128>> = (0..basis.dim())
        .map(|r| {
            let row: Vec<Q> = cols.iter().map(|c| c.coords[r]).collect();
            let l = lcm_of_denominators(&row);
            row.iter().map(|q| (q * Q::from_integer(l)).to_integer()).collect()
        })
        .collect();
    lattice::integer_kernel(&rows, n)
}

/// Linear form `Σ_k u_k R_k[coord]` placed at variable offset `off`.
fn put(row: &mut [i128], rel: &[Vec<i128>], off: usize, coord: usize, sign: i128) {
    for (k, r) in rel.iter().enumerate() {
        row[off + k] += sign * r[coord];
    }
}

/// Group data from a relation lattice `R ⊂ ℤ⁵`.
pub fn kernel_data_from_relations(
    rel: Vec<Vec<i128>>,
    mode: OracleMode,
    quality: Option<RelationQuality>,
) -> KernelData {
    let r = rel.len();
    // ker φ1: (0, 0, n1, n2, *) ∈ R.
    let n = r + 2;
    let mut rows = Vec::new();
    for coord in 0..4 {
        let mut row = vec![0i128; n];
        put(&mut row, &rel, 0, coord, 1);
        if coord >= 2 {
            row[r + coord - 2] = -1;
        }
        rows.push(row);
    }
    let ker_phi1 = projected_kernel(&rows, n, [r, r + 1]);

    // ker φ2 / ker σ: (n1, n2, 0, 0, a) ∈ R and (0, 0, n1-2m1, n2-2m2, b)
    // ∈ R with a ≡ b mod 2 (m1 = m2 = 0 for σ).
    let build = |with_m: bool| -> Lattice2 {
        let extra = if with_m { 5 } else { 3 };
        let n = 2 * r + extra;
        let (n1, n2) = (2 * r, 2 * r + 1);
        let kk = n - 1;
        let mut rows = Vec::new();
        for coord in 0..4 {
            let mut row = vec![0i128; n];
            put(&mut row, &rel, 0, coord, 1);
            if coord < 2 {
                row[n1 + coord] = -1;
            }
            rows.push(row);
            let mut row = vec![0i128; n];
            put(&mut row, &rel, r, coord, 1);
            if coord >= 2 {
                row[n1 + coord - 2] = -1;
                if with_m {
                    row[2 * r + 2 + coord - 2] = 2;
                }
            }
            rows.push(row);
        }
        let mut row = vec![0i128; n];
        put(&mut row, &rel, 0, 4, 1);
        put(&mut row, &rel, r, 4, -1);
        row[kk] = -2;
        rows.push(row);
        projected_kernel(&rows, n, [n1, n2])
    };
    let ker_phi2 = build(true);
    let ker_sigma = build(false);

    // Characters: with p = k1 + k2, q = k1 - k2,
    // (p, 0, q, 0, 2e1), (0, p, 0, q, 2e2), (0, 0, 2q, 0, 2e3), (0, 0, 0, 2q, 2e4) ∈ R.
    let n = 4 * r + 6;
    let (k1, k2) = (4 * r, 4 * r + 1);
    let mut rows = Vec::new();
    let targets: [[(i128, i128); 4]; 4] = [
        [(1, 1), (0, 0), (1, -1), (0, 0)],
        [(0, 0), (1, 1), (0, 0), (1, -1)],
        [(0, 0), (0, 0), (2, -2), (0, 0)],
        [(0, 0), (0, 0), (0, 0), (2, -2)],
    ];
    for (b, t) in targets.iter().enumerate() {
        for coord in 0..4 {
            let mut row = vec![0i128; n];
            put(&mut row, &rel, b * r, coord, 1);
            row[k1] -= t[coord].0;
            row[k2] -= t[coord].1;
            rows.push(row);
        }
        let mut row = vec![0i128; n];
        put(&mut row, &rel, b * r, 4, 1);
        row[4 * r + 2 + b] = -2;
        rows.push(row);
    }
    let characters = projected_kernel(&rows, n, [k1, k2]);
    KernelData { mode, relations: rel, ker_phi1, ker_phi2, ker_sigma, characters, quality }
}

pub fn kernel_data(exps: &Exponents) -> Result<KernelData> {
    match exps {
        Exponents::Exact { basis, values } => {
            for v in values {
                if v.coords.len() != basis.dim() {
                    return Err(Error::InvalidInput("exponent does not match the symbol basis".into()));
                }
            }
            Ok(kernel_data_from_relations(exact_relations(basis, values), OracleMode::Exact, None))
        }
        Exponents::Numeric { values, height_bound, tol } => {
            let x = [values[0], values[1], values[2], values[3], C64::new(0.0, std::f64::consts::PI)];
            let (rel, q) = integer_relations(&x, *height_bound, *tol)?;
            Ok(kernel_data_from_relations(rel, OracleMode::Numeric, Some(q)))
        }
    }
}

/// Normal form of a quotient of `ℤ²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AbelianQuotient {
    Z2,
    /// `μ_d × ℤ` (`d = 1` is `ℤ`).
    MuZ(i128),
    /// Cyclic `μ_d`.
    Mu(i128),
    /// `μ_2 × μ_d` with `2 | d`.
    Mu2Mu(i128),
    /// `μ_{d1} × μ_{d2}` with `d1 | d2`, `d1 > 2`.
    Other(i128, i128),
}

impl AbelianQuotient {
    pub fn of(k: &Lattice2) -> Self {
        match k.quotient() {
            (2, _) => AbelianQuotient::Z2,
            (1, d) => AbelianQuotient::MuZ(d[0]),
            (_, d) => match d[0] {
                1 => AbelianQuotient::Mu(d[1]),
                2 => AbelianQuotient::Mu2Mu(d[1]),
                d1 => AbelianQuotient::Other(d1, d[1]),
            },
        }
    }

    pub fn rank(&self) -> usize {
        match self {
            AbelianQuotient::Z2 => 2,
            AbelianQuotient::MuZ(_) => 1,
            _ => 0,
        }
    }

    pub fn order(&self) -> Option<i128> {
        match *self {
            AbelianQuotient::Mu(d) => Some(d),
            AbelianQuotient::Mu2Mu(d) => Some(2 * d),
            AbelianQuotient::Other(a, b) => Some(a * b),
            _ => None,
        }
    }

    pub fn describe(&self) -> String {
        match *self {
            AbelianQuotient::Z2 => "Z x Z".into(),
            AbelianQuotient::MuZ(1) => "Z".into(),
            AbelianQuotient::MuZ(d) => format!("mu_{d} x Z"),
            AbelianQuotient::Mu(d) => format!("mu_{d}"),
            AbelianQuotient::Mu2Mu(d) => format!("mu_2 x mu_{d}"),
            AbelianQuotient::Other(a, b) => format!("mu_{a} x mu_{b}"),
        }
    }
}

/// Row of the table of realizable pairs `(Q1, Q2) = (N1, G/N)`.
pub fn table_row(q1: &AbelianQuotient, q2: &AbelianQuotient) -> Result<usize> {
    use AbelianQuotient::*;
    let even = |d: i128| d % 2 == 0;
    let row = match (*q1, *q2) {
        (Z2, Z2) => Some(1),
        (Z2, MuZ(d)) if even(d) => Some(2),
        (Z2, Mu2Mu(d)) if even(d) => Some(3),
        (MuZ(_), Z2) => Some(4),
        (MuZ(d), MuZ(dp)) if !even(d) || even(dp) => Some(5),
        (MuZ(d), Mu(dp)) if !even(d) && even(dp) => Some(6),
        (MuZ(_), Mu2Mu(dp)) if even(dp) => Some(7),
        (Mu(_), Z2) => Some(8),
        (Mu(d), MuZ(dp)) if (d - dp) % 2 == 0 => Some(9),
        (Mu(_), Mu(_)) => Some(10),
        (Mu(d), Mu2Mu(dp)) if even(d) && even(dp) => Some(11),
        _ => None,
    };
    row.ok_or_else(|| {
        Error::Inconclusive(format!(
            "pair ({}, {}) violates every row of the table",
            q1.describe(),
            q2.describe()
        ))
    })
}

/// Rows whose extension `N ⊲ G` is always split.
pub const STARRED_ROWS: [usize; 3] = [1, 4, 8];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Yes,
    No,
    Unknown,
}

impl Split {
    pub fn name(&self) -> &'static str {
        match self {
            Split::Yes => "yes",
            Split::No => "no",
            Split::Unknown => "unknown",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupClassification {
    pub q1: AbelianQuotient,
    pub q2: AbelianQuotient,
    pub table_row: usize,
    pub split: Split,
    pub finite: bool,
    /// `|G| = 2 |N1| |G/N|` when finite.
    pub order: Option<i128>,
    pub structure: String,
}

fn primitive_multiplier(l: &Lattice2) -> Option<i128> {
    match l.basis.as_slice() {
        [w] => Some(w[0].gcd(&w[1])),
        _ => None,
    }
}

pub fn classify_group(k: &KernelData) -> Result<GroupClassification> {
    let q1 = AbelianQuotient::of(&k.ker_phi1);
    let q2 = AbelianQuotient::of(&k.ker_phi2);
    let row = table_row(&q1, &q2)?;
    let split = if STARRED_ROWS.contains(&row) || k.ker_sigma == k.ker_phi2 {
        Split::Yes
    } else {
        match (primitive_multiplier(&k.ker_phi1), primitive_multiplier(&k.ker_phi2)) {
            (Some(d), Some(dp)) if dp % d != 0 => Split::No,
            _ => Split::Unknown,
        }
    };
    let order = match (q1.order(), q2.order()) {
        (Some(a), Some(b)) => Some(2 * a * b),
        _ => None,
    };
    let finite = order.is_some();
    let n1 = q1.describe();
    let structure = match (finite, q1, q2) {
        (true, AbelianQuotient::Mu(d), AbelianQuotient::Mu(dp)) => {
            format!("D_{d} -> G -> mu_{dp}, D_{d} = mu_{d} x| mu_2")
        }
        (true, AbelianQuotient::Mu(d), AbelianQuotient::Mu2Mu(dp)) => {
            format!("D_{d} -> G -> mu_2 x mu_{dp}, D_{d} = mu_{d} x| mu_2")
        }
        _ => format!("N1 = {n1}, N = N1 x| mu_2, G/N = {}", q2.describe()),
    };
    Ok(GroupClassification { q1, q2, table_row: row, split, finite, order, structure })
}

/// Zariski closure of `G` up to the classes of the trichotomy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DGalClass {
    FullGG,
    /// One-dimensional, `(V0 μ_d) ⋊ ⟨M_γ1⟩`; `d` from the character lattice
    /// when it has rank one.
    OneDim(Option<i128>),
    FiniteEqualsG,
}

impl DGalClass {
    pub fn name(&self) -> String {
        match self {
            DGalClass::FullGG => "full".into(),
            DGalClass::OneDim(Some(d)) => format!("one_dimensional(d={d})"),
            DGalClass::OneDim(None) => "one_dimensional".into(),
            DGalClass::FiniteEqualsG => "finite".into(),
        }
    }
}

fn character_d(k: &KernelData) -> Option<i128> {
    primitive_multiplier(&k.characters)
}

/// The trichotomy stated in terms of `r_i = rk ker φ_i`.
pub fn classify_dgal(k: &KernelData) -> DGalClass {
    let (r1, r2) = (k.r1(), k.r2());
    if r1.min(r2) == 0 || (r1 == 1 && r2 == 1 && k.ker_phi1.intersects_trivially(&k.ker_phi2)) {
        DGalClass::FullGG
    } else if r1 == 2 && r2 == 2 {
        DGalClass::FiniteEqualsG
    } else {
        DGalClass::OneDim(character_d(k))
    }
}

/// Direct computation: the closure of `G ∩ 𝔾₀` is the subgroup of the torus
/// cut out by the character lattice, of dimension `2 - rank`.
pub fn dgal_from_characters(k: &KernelData) -> DGalClass {
    match k.characters.rank() {
        0 => DGalClass::FullGG,
        1 => DGalClass::OneDim(character_d(k)),
        _ => DGalClass::FiniteEqualsG,
    }
}

/// Order of a finite `G` from the character lattice: `2 [ℤ² : Λ]`.
pub fn order_from_characters(k: &KernelData) -> Option<i128> {
    k.characters.index().map(|i| 2 * i)
}

fn key(m: &Mat2, grid: f64) -> [i64; 8] {
    let mut k = [0i64; 8];
    for i in 0..2 {
        for j in 0..2 {
            k[4 * i + 2 * j] = (m.m[i][j].re / grid).round() as i64;
            k[4 * i + 2 * j + 1] = (m.m[i][j].im / grid).round() as i64;
        }
    }
    k
}

/// Breadth-first closure of `⟨gens⟩` under multiplication. Fails when more
/// than `cap` elements appear.
pub fn finite_closure(gens: &[Mat2], cap: usize) -> Result<(usize, Vec<Mat2>)> {
    const GRID: f64 = 1e-7;
    let mut seen: HashMap<[i64; 8], usize> = HashMap::new();
    let mut elems: Vec<Mat2> = Vec::new();
    let insert = |m: Mat2, seen: &mut HashMap<[i64; 8], usize>, elems: &mut Vec<Mat2>| -> bool {
        let k = key(&m, GRID);
        if let Some(&i) = seen.get(&k) {
            if elems[i].max_diff(&m) < 1e-6 {
                return false;
            }
        }
        seen.insert(k, elems.len());
        elems.push(m);
        true
    };
    insert(Mat2::identity(), &mut seen, &mut elems);
    let mut frontier = vec![Mat2::identity()];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for x in &frontier {
            for g in gens {
                let y = *x * *g;
                if !y.is_finite() {
                    return Err(Error::Numerical("non-finite product in closure".into()));
                }
                if insert(y, &mut seen, &mut elems) {
                    next.push(y);
                    if elems.len() > cap {
                        return Err(Error::Inconclusive(format!(
                            "group has more than {cap} elements or is infinite"
                        )));
                    }
                }
            }
        }
        frontier = next;
    }
    Ok((elems.len(), elems))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn decomposition_examples() {
        let g = decompose_gg(&Mat2::sigma3()).unwrap();
        assert_eq!(g.eps, -1);
        assert!((g.c - 1.0).norm() < 1e-12 && (g.alpha - 1.0).norm() < 1e-12 && g.beta.norm() < 1e-12);
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        assert!(decompose_gg(&Mat2::new(one, one, zero, one)).is_err());
    }

    #[test]
    fn dihedral_closure() {
        let ra = r_theta(C64::new(2.0 * PI / 5.0, 0.0));
        let (n, _) = finite_closure(&[ra, Mat2::identity(), Mat2::sigma3()], 1000).unwrap();
        assert_eq!(n, 10);
        let (n, _) = finite_closure(&[Mat2::identity(), Mat2::identity(), Mat2::sigma3()], 1000).unwrap();
        assert_eq!(n, 2);
    }

    #[test]
    fn generic_exact_is_row_one() {
        let k = kernel_data(&Exponents::generic_exact()).unwrap();
        assert_eq!((k.r1(), k.r2()), (0, 0));
        let c = classify_group(&k).unwrap();
        assert_eq!(c.table_row, 1);
        assert_eq!(c.split, Split::Yes);
        assert_eq!(classify_dgal(&k), DGalClass::FullGG);
        assert_eq!(dgal_from_characters(&k), DGalClass::FullGG);
    }
}

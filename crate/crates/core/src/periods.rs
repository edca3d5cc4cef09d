//! Period integrals: elliptic periods and `τ`, the hyperelliptic constants
//! `K, K', L, L'`, the genus-2 period matrix, the bielliptic period locus,
//! and the periods `N1..N4` of a rank-1 connection form (by contour
//! integration and by the reciprocity law).

use crate::connections::Rank1Connection;
use crate::curves::{BiellipticCover, CPoint};
use crate::linalg::{sym_eigen_real, Mat2};
use crate::monodromy::{base_lift, standard_loops, LoopSpec};
use crate::paths::{lift, LiftedPath};
use crate::quadrature::{adaptive_gl_n, chebyshev_gauss, tanh_sinh, Method, QuadratureSettings};
use crate::{Error, Result, C64};
use std::f64::consts::PI;

/// Periods of `dx/y` on `y² = x(x-1)(x-t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticPeriods {
    pub k: C64,
    pub l: C64,
    pub tau: C64,
    /// Whether `l` had to be negated to put `τ` in the upper half plane.
    pub negated: bool,
    /// Branch-point pairs whose doubled segment integrals give `k` and `l`.
    pub pairs: [[C64; 2]; 2],
}

/// `∫ dx/y` along the straight segment `[a, b]` between two roots of the
/// cubic, `c` the third root, with `y` continued from its principal value at
/// the midpoint. Writing `x = a + (b-a)s`, the integrand is
/// `-i / (sqrt(s(1-s)) w(s))` with `w² = x - c`.
fn segment_integral(a: C64, b: C64, c: C64, settings: &QuadratureSettings) -> Result<C64> {
    let i = C64::new(0.0, 1.0);
    let xm = (a + b) * 0.5;
    let ym = ((xm - a) * (xm - b) * (xm - c)).sqrt();
    // y(1/2) = i (b-a) (1/2) w(1/2): fix the sign of w at the midpoint.
    let wm0 = (xm - c).sqrt();
    let wm = if ((i * (b - a) * 0.5 * wm0) - ym).norm() <= ((i * (b - a) * 0.5 * wm0) + ym).norm() {
        wm0
    } else {
        -wm0
    };
    let w = move |s: f64| -> C64 {
        let x = a + (b - a) * s;
        wm * ((x - c) / (xm - c)).sqrt()
    };
    let v = match settings.method {
        Method::TanhSinh => tanh_sinh(
            |s, dl, dr| -i / ((dl * dr).sqrt() * w(s)),
            0.0,
            1.0,
            settings,
        )?,
        Method::ChebyshevGauss => chebyshev_gauss(|s| -i / w(s), 0.0, 1.0, settings)?,
    };
    Ok(v)
}

fn on_segment(a: C64, b: C64, c: C64) -> bool {
    let d = b - a;
    let s = ((c - a) * d.conj()).re / d.norm_sqr();
    let dist = (a + d * s - c).norm();
    s > 0.0 && s < 1.0 && dist < 1e-9 * (1.0 + d.norm())
}

/// Periods `k`, `l`: doubled integrals over the segments `[1, t]` and
/// `[0, 1]`. When the third root lies on one of these segments (real `t`
/// outside `(1, ∞)`), the pair `{0, t}` replaces the blocked one. `τ = l/k`,
/// with `l` negated if needed so that `Im τ > 0`.
pub fn elliptic_periods(t: C64, settings: &QuadratureSettings) -> Result<EllipticPeriods> {
    settings.validate()?;
    crate::curves::EllipticCurve::new(t)?;
    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let mut pk = [one, t, zero];
    let mut pl = [zero, one, t];
    if on_segment(one, t, zero) {
        pk = [zero, t, one];
    } else if on_segment(zero, one, t) {
        pl = [zero, t, one];
    }
    let k = segment_integral(pk[0], pk[1], pk[2], settings)? * 2.0;
    let mut l = segment_integral(pl[0], pl[1], pl[2], settings)? * 2.0;
    let mut tau = l / k;
    let mut negated = false;
    if tau.im.abs() < 1e-12 {
        return Err(Error::Numerical("degenerate elliptic periods".into()));
    }
    if tau.im < 0.0 {
        l = -l;
        tau = -tau;
        negated = true;
    }
    Ok(EllipticPeriods { k, l, tau, negated, pairs: [[pk[0], pk[1]], [pl[0], pl[1]]] })
}

/// Reduce `τ` to the standard fundamental domain by translations and
/// inversions: `|Re τ| ≤ 1/2`, `|τ| ≥ 1`. Returns the reduced value and the
/// number of inversions used.
pub fn modular_reduce(tau: C64) -> Result<(C64, usize)> {
    if !(tau.im > 0.0) {
        return Err(Error::InvalidInput("τ must lie in the upper half plane".into()));
    }
    let mut z = tau;
    let mut inversions = 0;
    for _ in 0..10_000 {
        z -= z.re.round();
        if z.norm_sqr() < 1.0 - 1e-15 {
            z = -z.inv();
            inversions += 1;
        } else {
            return Ok((z, inversions));
        }
    }
    Err(Error::Numerical("modular reduction did not terminate".into()))
}

/// The four real constants of the configuration `1 < t < t'`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperellipticConstants {
    pub k: f64,
    pub kp: f64,
    pub l: f64,
    pub lp: f64,
}

impl HyperellipticConstants {
    pub fn as_array(&self) -> [f64; 4] {
        [self.k, self.kp, self.l, self.lp]
    }

    pub fn max_rel_diff(&self, other: &Self) -> f64 {
        self.as_array()
            .iter()
            .zip(other.as_array().iter())
            .map(|(a, b)| (a - b).abs() / a.abs().max(b.abs()))
            .fold(0.0, f64::max)
    }
}

/// `K, K', L, L'` with one quadrature rule.
///
/// With `α = sqrt(t'-t) < β = sqrt(t'-1) < γ = sqrt(t')`:
/// `K = ∫_α^β dξ / sqrt((t'-ξ²)(t'-1-ξ²)(ξ²-t'+t))`, `K'` the same with an
/// extra factor `ξ`, and `L`, `L'` the analogous integrals of `1/|y|`,
/// `ξ/|y|` over `[β, γ]`.
pub fn hyperelliptic_constants_with(
    t: f64,
    tp: f64,
    settings: &QuadratureSettings,
) -> Result<HyperellipticConstants> {
    settings.validate()?;
    if !(t.is_finite() && tp.is_finite() && 1.0 < t && t < tp) {
        return Err(Error::InvalidInput(format!(
            "hyperelliptic constants need 1 < t < t' (got t = {t}, t' = {tp})"
        )));
    }
    let al = (tp - t).sqrt();
    let be = (tp - 1.0).sqrt();
    let ga = tp.sqrt();
    // Smooth parts after removing 1/sqrt((ξ-a)(b-ξ)).
    let gk = move |x: f64| 1.0 / ((tp - x * x) * (x + al) * (x + be)).sqrt();
    let gl = move |x: f64| 1.0 / ((ga + x) * (x + be) * (x * x - al * al)).sqrt();
    let re = |v: f64| C64::new(v, 0.0);
    let (k, kp, l, lp) = match settings.method {
        Method::TanhSinh => {
            let k = tanh_sinh(|x, dl, dr| re(gk(x) / (dl * dr).sqrt()), al, be, settings)?;
            let kp = tanh_sinh(|x, dl, dr| re(x * gk(x) / (dl * dr).sqrt()), al, be, settings)?;
            let l = tanh_sinh(|x, dl, dr| re(gl(x) / (dl * dr).sqrt()), be, ga, settings)?;
            let lp = tanh_sinh(|x, dl, dr| re(x * gl(x) / (dl * dr).sqrt()), be, ga, settings)?;
            (k, kp, l, lp)
        }
        Method::ChebyshevGauss => {
            let k = chebyshev_gauss(|x| re(gk(x)), al, be, settings)?;
            let kp = chebyshev_gauss(|x| re(x * gk(x)), al, be, settings)?;
            let l = chebyshev_gauss(|x| re(gl(x)), be, ga, settings)?;
            let lp = chebyshev_gauss(|x| re(x * gl(x)), be, ga, settings)?;
            (k, kp, l, lp)
        }
    };
    Ok(HyperellipticConstants { k: k.re, kp: kp.re, l: l.re, lp: lp.re })
}

/// `K, K', L, L'` computed with both rules; fails if they disagree by more
/// than `10 · rel_tol`. Returns the value of `settings.method`.
pub fn hyperelliptic_constants(
    t: f64,
    tp: f64,
    settings: &QuadratureSettings,
) -> Result<HyperellipticConstants> {
    let a = hyperelliptic_constants_with(t, tp, &settings.with_method(Method::TanhSinh))?;
    let b = hyperelliptic_constants_with(t, tp, &settings.with_method(Method::ChebyshevGauss))?;
    let d = a.max_rel_diff(&b);
    if d > 10.0 * settings.rel_tol.max(1e-14) {
        return Err(Error::Numerical(format!(
            "quadrature rules disagree on the hyperelliptic constants (relative {d:e})"
        )));
    }
    Ok(if settings.method == Method::TanhSinh { a } else { b })
}

/// Period matrix of a genus-2 curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct G2PeriodMatrix {
    pub z: Mat2,
}

/// `Z_C = [[(τ1+τ2)/2, (τ1-τ2)/2], [(τ1-τ2)/2, (τ1+τ2)/2]]`.
pub fn g2_period_matrix(tau1: C64, tau2: C64) -> Result<G2PeriodMatrix> {
    if !(tau1.im > 0.0 && tau2.im > 0.0) {
        return Err(Error::InvalidInput("τ1, τ2 must lie in the upper half plane".into()));
    }
    let s = (tau1 + tau2) * 0.5;
    let d = (tau1 - tau2) * 0.5;
    Ok(G2PeriodMatrix { z: Mat2::new(s, d, d, s) })
}

const LOCUS_TOL: f64 = 1e-9;

/// Eigenvalues of `Im Z` for a symmetric `Z`.
pub fn imaginary_part_eigenvalues(z: &Mat2) -> [f64; 2] {
    sym_eigen_real(z.m[0][0].im, 0.5 * (z.m[0][1].im + z.m[1][0].im), z.m[1][1].im)
}

/// Riemann relations: `Z` symmetric and `Im Z` positive definite.
pub fn riemann_relations(z: &Mat2) -> bool {
    let scale = 1.0 + z.max_abs();
    if (z.m[0][1] - z.m[1][0]).norm() > LOCUS_TOL * scale {
        return false;
    }
    imaginary_part_eigenvalues(z)[0] > LOCUS_TOL * scale
}

/// Membership in the bielliptic period locus `{[[a, b], [b, a]] : Im ≻ 0}`.
pub fn in_period_locus(z: &Mat2) -> bool {
    let scale = 1.0 + z.max_abs();
    (z.m[0][0] - z.m[1][1]).norm() <= LOCUS_TOL * scale && riemann_relations(z)
}

/// `∫ f(ξ, y) dξ` along a lifted path; with `flip` the Galois-conjugate
/// lift `(-ξ, y)` is used.
pub fn integrate_on_lift<const N: usize, F: Fn(C64, C64) -> [C64; N]>(
    lifted: &LiftedPath,
    flip: bool,
    f: F,
    settings: &QuadratureSettings,
) -> Result<[C64; N]> {
    let eps = if flip { -1.0 } else { 1.0 };
    let mut total = [C64::new(0.0, 0.0); N];
    for (i, seg) in lifted.segs.iter().enumerate() {
        let s = seg.seg;
        let v = adaptive_gl_n(
            |sv| {
                let (_, xi, y) = lifted.eval(i, sv);
                let dxi = -s.deriv(sv) / (xi * 2.0);
                let mut out = f(xi * eps, y);
                for o in out.iter_mut() {
                    *o *= dxi * eps;
                }
                out
            },
            0.0,
            1.0,
            settings,
        )?;
        for k in 0..N {
            total[k] += v[k];
        }
    }
    Ok(total)
}

/// `N1..N4`: integrals of `ω` over `a1, a2, b1, b2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodVector {
    pub n: [C64; 4],
}

/// Periods of `dξ/y` and `ξdξ/y` on the four cycles: `a[(i, j)] = ∫_{a_j} ω_i`
/// and `b[(i, j)] = ∫_{b_j} ω_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolomorphicPeriods {
    pub a: Mat2,
    pub b: Mat2,
}

impl HolomorphicPeriods {
    /// Normalized period matrix `A⁻¹ B`.
    pub fn normalized(&self) -> Result<Mat2> {
        let ai = self
            .a
            .inverse()
            .ok_or_else(|| Error::Numerical("singular a-period block".into()))?;
        Ok(ai * self.b)
    }
}

/// The cycles of `C`: `a1`, `b1` lift the loops `a`, `b` from
/// `(ξ_b, y_b)`; `a2`, `b2` from `(-ξ_b, y_b)`.
pub struct Cycles {
    pub loops: LoopSpec,
    pub a: LiftedPath,
    pub b: LiftedPath,
}

pub fn cycles(cover: &BiellipticCover, extra: &[C64]) -> Result<Cycles> {
    let loops = standard_loops(cover, extra)?;
    let (xi_b, y_b) = base_lift(cover, loops.base);
    let a = lift(cover, &loops.a, xi_b, y_b)?;
    let b = lift(cover, &loops.b, xi_b, y_b)?;
    Ok(Cycles { loops, a, b })
}

impl Cycles {
    /// `[∫_{a1}, ∫_{a2}, ∫_{b1}, ∫_{b2}]` of a form given by its `dξ`
    /// coefficient.
    pub fn periods<const N: usize, F: Fn(C64, C64) -> [C64; N] + Copy>(
        &self,
        f: F,
        settings: &QuadratureSettings,
    ) -> Result<[[C64; N]; 4]> {
        Ok([
            integrate_on_lift(&self.a, false, f, settings)?,
            integrate_on_lift(&self.a, true, f, settings)?,
            integrate_on_lift(&self.b, false, f, settings)?,
            integrate_on_lift(&self.b, true, f, settings)?,
        ])
    }

    pub fn holomorphic(&self, settings: &QuadratureSettings) -> Result<HolomorphicPeriods> {
        let p = self.periods(|xi, y| [y.inv(), xi / y], settings)?;
        Ok(HolomorphicPeriods {
            a: Mat2::new(p[0][0], p[1][0], p[0][1], p[1][1]),
            b: Mat2::new(p[2][0], p[3][0], p[2][1], p[3][1]),
        })
    }
}

fn divisor_abscissae(conn: &Rank1Connection, cover: &BiellipticCover) -> Result<Vec<C64>> {
    Ok(conn
        .qdata(cover)?
        .map(|qs| qs.iter().map(|q| q.x).collect())
        .unwrap_or_default())
}

/// `N1..N4` by integrating `ω` along the lifted standard loops.
pub fn omega_periods(
    conn: &Rank1Connection,
    cover: &BiellipticCover,
    settings: &QuadratureSettings,
) -> Result<PeriodVector> {
    settings.validate()?;
    let extra = divisor_abscissae(conn, cover)?;
    let cyc = cycles(cover, &extra)?;
    let q = conn.qdata(cover)?;
    let p = cyc.periods(|xi, y| [conn.omega_coeff(xi, y, &q)], settings)?;
    Ok(PeriodVector { n: [p[0][0], p[1][0], p[2][0], p[3][0]] })
}

/// Output of the reciprocity computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReciprocityResult {
    /// `2πi σ Σ_k r_k z(s_k)`: the b-periods of the normalized third-kind
    /// part `ω0` (zero a-periods).
    pub divisor_part: [C64; 2],
    /// `(μ1, μ2)` with `ν + μ1 ω1 + μ2 ω2` having zero a-periods.
    pub mu: [C64; 2],
    /// `N3`, `N4` reassembled as `∫_{b_j} ω0 + Σ_i (λ_i - μ_i) B_ij`.
    pub n3: C64,
    pub n4: C64,
    /// Orientation sign `σ = sign(Im Z)` of the cycle basis.
    pub sigma: f64,
}

/// Continuous branch of `sqrt(g(s))` on `[0, 1]` starting from the value
/// `root0` at `s = 0`, sampled on a uniform grid.
struct TrackedSqrt {
    vals: Vec<C64>,
}

impl TrackedSqrt {
    fn new<G: Fn(f64) -> C64>(g: &G, root0: C64, n: usize) -> Self {
        let mut vals = Vec::with_capacity(n + 1);
        vals.push(root0);
        for k in 1..=n {
            let s = k as f64 / n as f64;
            let r = g(s).sqrt();
            let pred = if k >= 2 { vals[k - 1] * 2.0 - vals[k - 2] } else { vals[k - 1] };
            vals.push(if (r - pred).norm() <= (r + pred).norm() { r } else { -r });
        }
        TrackedSqrt { vals }
    }

    fn eval<G: Fn(f64) -> C64>(&self, g: &G, s: f64) -> C64 {
        let n = self.vals.len() - 1;
        let pos = (s * n as f64).clamp(0.0, n as f64);
        let k = (pos.floor() as usize).min(n - 1);
        let w = pos - k as f64;
        let pred = self.vals[k] * (1.0 - w) + self.vals[k + 1] * w;
        let r = g(s).sqrt();
        if (r - pred).norm() <= (r + pred).norm() {
            r
        } else {
            -r
        }
    }
}

/// `(∫ dξ/y, ∫ ξdξ/y)` along the ray `ξ = e/s`, `s ∈ (0, 1]`, from the
/// point at infinity labelled `label` (`y/ξ³ → label·i`) to `ξ = e`.
/// Returns the integrals and the value of `y` on arrival. With
/// `branch_end` the endpoint is the branch point `e² = t'`.
fn ray_integrals(
    cover: &BiellipticCover,
    e: C64,
    label: f64,
    branch_end: bool,
    settings: &QuadratureSettings,
) -> Result<([C64; 2], C64)> {
    let tp = cover.tp;
    let t = cover.t;
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    // y = label · i · ξ³ · u, u² = h(w) with w = 1/ξ² = s²/e².
    let h_rest = move |s: f64| {
        let w = (e * e).inv() * (s * s);
        (one - (tp - 1.0) * w) * (one - (tp - t) * w)
    };
    if branch_end {
        // (1 - t'w) = 1 - s² is split off as (1-s)(1+s).
        let g = move |s: f64| h_rest(s) * (1.0 + s);
        let tr = TrackedSqrt::new(&g, one, 8192);
        let ts = tanh_sinh(
            |s, _dl, dr| {
                let u = tr.eval(&g, s) * dr.sqrt();
                let c = -(i * label * e * e * u).inv();
                c * s
            },
            0.0,
            1.0,
            settings,
        )?;
        let ts2 = tanh_sinh(
            |s, _dl, dr| {
                let u = tr.eval(&g, s) * dr.sqrt();
                -(i * label * e * u).inv()
            },
            0.0,
            1.0,
            settings,
        )?;
        return Ok(([ts, ts2], C64::new(0.0, 0.0)));
    }
    let g = move |s: f64| {
        let w = (e * e).inv() * (s * s);
        (one - tp * w) * h_rest(s)
    };
    let tr = TrackedSqrt::new(&g, one, 8192);
    let v = adaptive_gl_n(
        |s| {
            let u = tr.eval(&g, s);
            let base = -(i * label * e * e * u).inv();
            [base * s, base * e]
        },
        0.0,
        1.0,
        settings,
    )?;
    let y_end = i * label * e * e * e * tr.eval(&g, 1.0);
    Ok((v, y_end))
}

fn segments_cross(p1: C64, p2: C64, q1: C64, q2: C64) -> bool {
    let cross = |a: C64, b: C64| a.re * b.im - a.im * b.re;
    let d1 = cross(p2 - p1, q1 - p1);
    let d2 = cross(p2 - p1, q2 - p1);
    let d3 = cross(q2 - q1, p1 - q1);
    let d4 = cross(q2 - q1, p2 - q1);
    (d1 > 0.0) != (d2 > 0.0) && (d3 > 0.0) != (d4 > 0.0)
}

/// `ξ`-plane polylines of the a-cycles.
fn a_cycle_polylines(cyc: &Cycles) -> [Vec<C64>; 2] {
    let mut p = Vec::new();
    for (i, seg) in cyc.a.segs.iter().enumerate() {
        let n = 256.max((seg.seg.length() / cyc.loops.clearance * 64.0) as usize);
        for k in 0..n {
            p.push(cyc.a.eval(i, k as f64 / n as f64).1);
        }
    }
    p.push(cyc.a.end().1);
    let m: Vec<C64> = p.iter().map(|z| -z).collect();
    [p, m]
}

fn ray_crosses(poly: &[Vec<C64>; 2], e: C64) -> bool {
    let far = e * (1e4 / e.norm().max(1e-300)).max(10.0);
    poly.iter().any(|pl| pl.windows(2).any(|w| segments_cross(e, far, w[0], w[1])))
}

/// `N3`, `N4` by the reciprocity law for the normalized third-kind
/// differential.
///
/// With `ω = ν + λ1 ω1 + λ2 ω2` (`ν` the divisor part, residues `+1` at
/// `q̃1, q̃2` and `-1` at `∞_±`), solve for `μ` so that `ω0 = ν + μ·ω`
/// has zero a-periods. Then `∫_{b_j} ω0 = 2πi σ Σ_k r_k ∫^{s_k} ζ_j` with
/// `ζ` the a-normalized holomorphic basis; the Abel-Jacobi integrals run
/// along radial rays in the `ξ`-plane from the point at infinity on the
/// matching sheet, which must not cross the a-cycles. Values agree with
/// contour integration modulo `2πi`.
pub fn omega_periods_reciprocity(
    conn: &Rank1Connection,
    cover: &BiellipticCover,
    settings: &QuadratureSettings,
) -> Result<ReciprocityResult> {
    settings.validate()?;
    let extra = divisor_abscissae(conn, cover)?;
    let cyc = cycles(cover, &extra)?;
    let hol = cyc.holomorphic(settings)?;
    let zmat = hol.normalized()?;
    let ai = hol.a.inverse().ok_or_else(|| Error::Numerical("singular a-period block".into()))?;
    let sigma = if imaginary_part_eigenvalues(&zmat)[1] > 0.0 { 1.0 } else { -1.0 };
    let lam = [conn.lambda1, conn.lambda2];
    let q = conn.qdata(cover)?;
    let qs = match q {
        None => {
            let n3 = lam[0] * hol.b.m[0][0] + lam[1] * hol.b.m[1][0];
            let n4 = lam[0] * hol.b.m[0][1] + lam[1] * hol.b.m[1][1];
            return Ok(ReciprocityResult {
                divisor_part: [C64::new(0.0, 0.0); 2],
                mu: [C64::new(0.0, 0.0); 2],
                n3,
                n4,
                sigma,
            });
        }
        Some(qs) => qs,
    };
    // a-periods of ν.
    let nu_only = Rank1Connection::points(
        C64::new(0.0, 0.0),
        C64::new(0.0, 0.0),
        match conn.bundle {
            crate::connections::LineBundle::Points(a, _) => a,
            _ => unreachable!(),
        },
        match conn.bundle {
            crate::connections::LineBundle::Points(_, b) => b,
            _ => unreachable!(),
        },
    );
    let qn = nu_only.qdata(cover)?;
    let nu_p = cyc.periods(|xi, y| [nu_only.omega_coeff(xi, y, &qn)], settings)?;
    let nu_a = [nu_p[0][0], nu_p[1][0]];
    // μ A = -ν_a  (row vector times A, A_ij = ∫_{a_j} ω_i).
    let mu0 = -(nu_a[0] * ai.m[0][0] + nu_a[1] * ai.m[1][0]);
    let mu1 = -(nu_a[0] * ai.m[0][1] + nu_a[1] * ai.m[1][1]);
    let mu = [mu0, mu1];
    let polys = a_cycle_polylines(&cyc);
    // Abel-Jacobi integrals of (ω1, ω2) from the matching infinity.
    let mut total = [C64::new(0.0, 0.0); 2];
    let mut labels = [0.0; 2];
    for (k, qd) in qs.iter().enumerate() {
        if ray_crosses(&polys, qd.xi) {
            return Err(Error::Inconclusive(
                "Abel-Jacobi ray crosses an a-cycle; choose another divisor point".into(),
            ));
        }
        let (v, y_end) = ray_integrals(cover, qd.xi, 1.0, false, settings)?;
        let label = if (y_end - qd.y).norm() <= (y_end + qd.y).norm() { 1.0 } else { -1.0 };
        labels[k] = label;
        let v = if label > 0.0 { v } else { [-v[0], -v[1]] };
        total[0] += v[0];
        total[1] += v[1];
    }
    if labels[0] == labels[1] {
        // Add z(∞_-) - z(∞_+) (both from ∞_+) or its negative.
        let mut found = None;
        for e in [cover.tp.sqrt(), -cover.tp.sqrt()] {
            if !ray_crosses(&polys, e) {
                found = Some(e);
                break;
            }
        }
        let e = found.ok_or_else(|| {
            Error::Inconclusive("no admissible ray between the points at infinity".into())
        })?;
        let (v, _) = ray_integrals(cover, e, 1.0, true, settings)?;
        let s = if labels[0] > 0.0 { -2.0 } else { 2.0 };
        total[0] += v[0] * s;
        total[1] += v[1] * s;
    }
    // ζ_j = Σ_i (A⁻¹)_{ji} ω_i.
    let two_pi_i = C64::new(0.0, 2.0 * PI);
    let zeta = [
        ai.m[0][0] * total[0] + ai.m[0][1] * total[1],
        ai.m[1][0] * total[0] + ai.m[1][1] * total[1],
    ];
    let dp = [zeta[0] * two_pi_i * sigma, zeta[1] * two_pi_i * sigma];
    let d0 = lam[0] - mu[0];
    let d1 = lam[1] - mu[1];
    let n3 = dp[0] + d0 * hol.b.m[0][0] + d1 * hol.b.m[1][0];
    let n4 = dp[1] + d0 * hol.b.m[0][1] + d1 * hol.b.m[1][1];
    Ok(ReciprocityResult { divisor_part: dp, mu, n3, n4, sigma })
}

/// Distance of `d/(2πi)` from the nearest integer.
pub fn distance_mod_2pi_i(d: C64) -> f64 {
    let w = d / C64::new(0.0, 2.0 * PI);
    (w - C64::new(w.re.round(), 0.0)).norm()
}

/// Convenience: does a point of `C` lie on the given side of infinity?
pub fn infinity_label(p: &CPoint) -> Option<f64> {
    match p {
        CPoint::InfinityPlus => Some(1.0),
        CPoint::InfinityMinus => Some(-1.0),
        _ => None,
    }
}

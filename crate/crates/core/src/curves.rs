//! Elliptic curves in Legendre form, the bielliptic genus-2 cover, the
//! chord-tangent group law and divisor classes.
//!
//! The elliptic curve is `E: y² = x(x-1)(x-t)` and the cover is
//! `C: y² = (t'-ξ²)(t'-1-ξ²)(t'-t-ξ²)` with `f(ξ, y) = (t'-ξ², y)`.

use crate::{Error, Result, C64};

/// Default absolute+relative tolerance for point equality.
pub const POINT_TOL: f64 = 1e-9;

/// Tolerance used when checking curve membership.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

fn close(a: C64, b: C64, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm()))
}

/// `E: y² = x(x-1)(x-t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticCurve {
    pub t: C64,
}

/// Point of `E`: affine or the point at infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EPoint {
    Affine { x: C64, y: C64 },
    Infinity,
}

impl EPoint {
    pub fn affine(x: C64, y: C64) -> Self {
        EPoint::Affine { x, y }
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, EPoint::Infinity)
    }

    pub fn xy(&self) -> Option<(C64, C64)> {
        match *self {
            EPoint::Affine { x, y } => Some((x, y)),
            EPoint::Infinity => None,
        }
    }

    /// Equality up to `tol` (absolute plus relative, per coordinate).
    pub fn approx_eq(&self, other: &EPoint, tol: f64) -> bool {
        match (self, other) {
            (EPoint::Infinity, EPoint::Infinity) => true,
            (EPoint::Affine { x: x1, y: y1 }, EPoint::Affine { x: x2, y: y2 }) => {
                close(*x1, *x2, tol) && close(*y1, *y2, tol)
            }
            _ => false,
        }
    }
}

impl EllipticCurve {
    pub fn new(t: C64) -> Result<Self> {
        if !t.is_finite() || t.norm() < 1e-12 || (t - 1.0).norm() < 1e-12 {
            return Err(Error::InvalidInput(format!(
                "Legendre parameter t = {t} must avoid 0 and 1"
            )));
        }
        Ok(EllipticCurve { t })
    }

    /// `x(x-1)(x-t)`.
    pub fn rhs(&self, x: C64) -> C64 {
        x * (x - 1.0) * (x - self.t)
    }

    /// Derivative of the cubic.
    pub fn rhs_deriv(&self, x: C64) -> C64 {
        let t = self.t;
        x * x * 3.0 - x * (t + 1.0) * 2.0 + t
    }

    /// Scaled equation residual of an affine point.
    pub fn residual(&self, x: C64, y: C64) -> f64 {
        (y * y - self.rhs(x)).norm() / (1.0 + x.norm().powi(3))
    }

    pub fn contains(&self, p: &EPoint, tol: f64) -> bool {
        match *p {
            EPoint::Infinity => true,
            EPoint::Affine { x, y } => self.residual(x, y) <= tol,
        }
    }

    /// Validated affine point.
    pub fn point(&self, x: C64, y: C64) -> Result<EPoint> {
        let r = self.residual(x, y);
        if r > MEMBERSHIP_TOL || !r.is_finite() {
            return Err(Error::NotOnCurve { residual: r });
        }
        Ok(EPoint::Affine { x, y })
    }

    /// Point with abscissa `x`, principal square root for `y`.
    pub fn point_at(&self, x: C64) -> EPoint {
        EPoint::Affine { x, y: self.rhs(x).sqrt() }
    }

    pub fn neg(&self, p: &EPoint) -> EPoint {
        match *p {
            EPoint::Infinity => EPoint::Infinity,
            EPoint::Affine { x, y } => EPoint::Affine { x, y: -y },
        }
    }

    /// Chord-tangent addition with `∞` as identity.
    pub fn add(&self, p: &EPoint, q: &EPoint) -> EPoint {
        let (x1, y1) = match p.xy() {
            None => return *q,
            Some(v) => v,
        };
        let (x2, y2) = match q.xy() {
            None => return *p,
            Some(v) => v,
        };
        let same_x = close(x1, x2, POINT_TOL);
        let slope = if same_x {
            if close(y1, -y2, POINT_TOL) {
                return EPoint::Infinity;
            }
            // Tangent line.
            self.rhs_deriv(x1) / (y1 * 2.0)
        } else {
            (y2 - y1) / (x2 - x1)
        };
        // y² = x³ - (1+t)x² + t x, so x1 + x2 + x3 = slope² + 1 + t.
        let x3 = slope * slope + 1.0 + self.t - x1 - x2;
        let y3 = -(y1 + slope * (x3 - x1));
        EPoint::Affine { x: x3, y: y3 }
    }

    /// `[n]P`.
    pub fn mul(&self, n: i64, p: &EPoint) -> EPoint {
        let mut base = if n < 0 { self.neg(p) } else { *p };
        let mut e = n.unsigned_abs();
        let mut acc = EPoint::Infinity;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.add(&acc, &base);
            }
            base = self.add(&base, &base);
            e >>= 1;
        }
        acc
    }

    /// The nontrivial 2-torsion points (0,0), (1,0), (t,0).
    pub fn two_torsion(&self) -> [EPoint; 3] {
        let z = C64::new(0.0, 0.0);
        [
            EPoint::affine(z, z),
            EPoint::affine(C64::new(1.0, 0.0), z),
            EPoint::affine(self.t, z),
        ]
    }
}

/// j-invariant of the Legendre curve with parameter `t`.
pub fn j_invariant(t: C64) -> Result<C64> {
    EllipticCurve::new(t)?;
    let num = (t * t - t + 1.0).powu(3) * 256.0;
    let den = t * t * (t - 1.0) * (t - 1.0);
    Ok(num / den)
}

/// Point of the genus-2 curve `C`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CPoint {
    Affine { xi: C64, y: C64 },
    /// The point over `ξ = ∞` with `y/ξ³ → +i`.
    InfinityPlus,
    /// The point over `ξ = ∞` with `y/ξ³ → -i`.
    InfinityMinus,
}

impl CPoint {
    pub fn affine(xi: C64, y: C64) -> Self {
        CPoint::Affine { xi, y }
    }

    pub fn is_infinite(&self) -> bool {
        !matches!(self, CPoint::Affine { .. })
    }

    pub fn coords(&self) -> Option<(C64, C64)> {
        match *self {
            CPoint::Affine { xi, y } => Some((xi, y)),
            _ => None,
        }
    }

    pub fn approx_eq(&self, other: &CPoint, tol: f64) -> bool {
        match (self, other) {
            (CPoint::InfinityPlus, CPoint::InfinityPlus) => true,
            (CPoint::InfinityMinus, CPoint::InfinityMinus) => true,
            (CPoint::Affine { xi: a, y: b }, CPoint::Affine { xi: c, y: d }) => {
                close(*a, *c, tol) && close(*b, *d, tol)
            }
            _ => false,
        }
    }
}

/// The double cover `f: C → E` of the Legendre curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiellipticCover {
    pub t: C64,
    pub tp: C64,
    /// Fixed principal square root of `t'(t'-1)(t'-t)`.
    pub y0: C64,
}

impl BiellipticCover {
    pub fn new(t: C64, tp: C64) -> Result<Self> {
        EllipticCurve::new(t)?;
        if !tp.is_finite() || tp.norm() < 1e-12 || (tp - 1.0).norm() < 1e-12 {
            return Err(Error::InvalidInput(format!("t' = {tp} must avoid 0 and 1")));
        }
        if (t - tp).norm() < 1e-12 {
            return Err(Error::InvalidInput("t and t' must differ".into()));
        }
        let y0 = (tp * (tp - 1.0) * (tp - t)).sqrt();
        Ok(BiellipticCover { t, tp, y0 })
    }

    pub fn from_real(t: f64, tp: f64) -> Result<Self> {
        Self::new(C64::new(t, 0.0), C64::new(tp, 0.0))
    }

    pub fn curve(&self) -> EllipticCurve {
        EllipticCurve { t: self.t }
    }

    /// Sextic `(t'-ξ²)(t'-1-ξ²)(t'-t-ξ²)`.
    pub fn sextic(&self, xi: C64) -> C64 {
        let x = self.tp - xi * xi;
        x * (x - 1.0) * (x - self.t)
    }

    pub fn residual_c(&self, xi: C64, y: C64) -> f64 {
        (y * y - self.sextic(xi)).norm() / (1.0 + xi.norm().powi(6))
    }

    pub fn contains(&self, p: &CPoint, tol: f64) -> bool {
        match *p {
            CPoint::Affine { xi, y } => self.residual_c(xi, y) <= tol,
            _ => true,
        }
    }

    /// Validated affine point of `C`.
    pub fn point(&self, xi: C64, y: C64) -> Result<CPoint> {
        let r = self.residual_c(xi, y);
        if r > MEMBERSHIP_TOL || !r.is_finite() {
            return Err(Error::NotOnCurve { residual: r });
        }
        Ok(CPoint::Affine { xi, y })
    }

    /// Point with coordinate `ξ` on the sheet selected by `sign` (±1) of the
    /// principal square root.
    pub fn point_at(&self, xi: C64, sign: f64) -> CPoint {
        CPoint::Affine { xi, y: self.sextic(xi).sqrt() * sign }
    }

    /// `p_+ = (t', y0)`.
    pub fn p_plus(&self) -> EPoint {
        EPoint::affine(self.tp, self.y0)
    }

    /// `p_- = (t', -y0)`.
    pub fn p_minus(&self) -> EPoint {
        EPoint::affine(self.tp, -self.y0)
    }

    /// Ramification point over `p_+`.
    pub fn p_tilde_plus(&self) -> CPoint {
        CPoint::affine(C64::new(0.0, 0.0), self.y0)
    }

    pub fn p_tilde_minus(&self) -> CPoint {
        CPoint::affine(C64::new(0.0, 0.0), -self.y0)
    }

    /// Branch values of `x` on `E` together with `t'`: `[0, 1, t, t']`.
    pub fn special_x(&self) -> [C64; 4] {
        [C64::new(0.0, 0.0), C64::new(1.0, 0.0), self.t, self.tp]
    }

    /// `f(ξ, y) = (t'-ξ², y)`; `∞_± ↦ ∞`.
    pub fn cover_map(&self, p: &CPoint) -> Result<EPoint> {
        match *p {
            CPoint::Affine { xi, y } => {
                let r = self.residual_c(xi, y);
                if r > MEMBERSHIP_TOL {
                    return Err(Error::NotOnCurve { residual: r });
                }
                Ok(EPoint::affine(self.tp - xi * xi, y))
            }
            _ => Ok(EPoint::Infinity),
        }
    }

    /// Galois involution `ι(ξ, y) = (-ξ, y)` and hyperelliptic involution
    /// `(ξ, y) ↦ (ξ, -y)`. Both exchange `∞_+` and `∞_-`, since
    /// `y/ξ³` changes sign under either map.
    pub fn involutions(&self, p: &CPoint) -> Result<(CPoint, CPoint)> {
        if !self.contains(p, MEMBERSHIP_TOL) {
            let (xi, y) = p.coords().unwrap();
            return Err(Error::NotOnCurve { residual: self.residual_c(xi, y) });
        }
        Ok(match *p {
            CPoint::Affine { xi, y } => (CPoint::affine(-xi, y), CPoint::affine(xi, -y)),
            CPoint::InfinityPlus => (CPoint::InfinityMinus, CPoint::InfinityMinus),
            CPoint::InfinityMinus => (CPoint::InfinityPlus, CPoint::InfinityPlus),
        })
    }

    /// Both lifts of an affine point of `E` off the branch locus of `f`:
    /// `(ξ, y)` with principal `ξ = sqrt(t'-x)` and its Galois conjugate.
    pub fn lifts(&self, p: &EPoint) -> Option<(CPoint, CPoint)> {
        let (x, y) = p.xy()?;
        let xi = (self.tp - x).sqrt();
        Some((CPoint::affine(xi, y), CPoint::affine(-xi, y)))
    }
}

/// Divisor class `[rep + (degree-1)∞]` on `E`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivisorClassE {
    pub degree: i64,
    pub rep: EPoint,
}

impl DivisorClassE {
    /// The class of `O_E(d∞)`.
    pub fn multiple_of_infinity(d: i64) -> Self {
        DivisorClassE { degree: d, rep: EPoint::Infinity }
    }

    pub fn trivial() -> Self {
        Self::multiple_of_infinity(0)
    }

    /// Reduce `Σ nᵢ Pᵢ` to `(Σ nᵢ, ⊕ [nᵢ] Pᵢ)`.
    pub fn from_divisor(curve: &EllipticCurve, terms: &[(i64, EPoint)]) -> Result<Self> {
        let mut degree = 0;
        let mut rep = EPoint::Infinity;
        for (n, p) in terms {
            if !curve.contains(p, MEMBERSHIP_TOL) {
                let (x, y) = p.xy().unwrap();
                return Err(Error::NotOnCurve { residual: curve.residual(x, y) });
            }
            degree += n;
            rep = curve.add(&rep, &curve.mul(*n, p));
        }
        Ok(DivisorClassE { degree, rep })
    }

    pub fn add(&self, curve: &EllipticCurve, other: &Self) -> Self {
        DivisorClassE {
            degree: self.degree + other.degree,
            rep: curve.add(&self.rep, &other.rep),
        }
    }

    pub fn neg(&self, curve: &EllipticCurve) -> Self {
        DivisorClassE { degree: -self.degree, rep: curve.neg(&self.rep) }
    }

    pub fn sub(&self, curve: &EllipticCurve, other: &Self) -> Self {
        self.add(curve, &other.neg(curve))
    }

    /// Twist by `n·[p]`.
    pub fn twist(&self, curve: &EllipticCurve, n: i64, p: &EPoint) -> Self {
        DivisorClassE {
            degree: self.degree + n,
            rep: curve.add(&self.rep, &curve.mul(n, p)),
        }
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.degree == other.degree && self.rep.approx_eq(&other.rep, tol)
    }
}

/// Normal form of a bielliptic genus-2 curve with subcovers onto `E_1` and
/// `E_2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiellipticNormalization {
    pub t1: C64,
    pub t2: C64,
    /// `t2/t1`.
    pub a: C64,
    /// `(1-t2)/(1-t1)`.
    pub b: C64,
}

impl BiellipticNormalization {
    /// The six branch points `±1, ±sqrt(b), ±sqrt(a)` of `η² = (ξ²-a)(ξ²-b)(ξ²-1)`.
    pub fn branch_points(&self) -> [C64; 6] {
        let one = C64::new(1.0, 0.0);
        let sb = self.b.sqrt();
        let sa = self.a.sqrt();
        [one, -one, sb, -sb, sa, -sa]
    }

    pub fn sextic(&self, xi: C64) -> C64 {
        let s = xi * xi;
        (s - self.a) * (s - self.b) * (s - 1.0)
    }

    pub fn residual_c(&self, xi: C64, eta: C64) -> f64 {
        (eta * eta - self.sextic(xi)).norm() / (1.0 + xi.norm().powi(6))
    }

    /// `E_1: y² = (x-a)(x-b)(x-1)`.
    pub fn residual_e1(&self, x: C64, y: C64) -> f64 {
        (y * y - (x - self.a) * (x - self.b) * (x - 1.0)).norm() / (1.0 + x.norm().powi(3))
    }

    /// `E_2: y² = (1-ax)(1-bx)(1-x)`.
    pub fn residual_e2(&self, x: C64, y: C64) -> f64 {
        let one = C64::new(1.0, 0.0);
        (y * y - (one - self.a * x) * (one - self.b * x) * (one - x)).norm()
            / (1.0 + x.norm().powi(3))
    }

    /// `π_1(ξ, η) = (ξ², η)`.
    pub fn pi1(&self, xi: C64, eta: C64) -> (C64, C64) {
        (xi * xi, eta)
    }

    /// `π_2(ξ, η) = (1/ξ², η/ξ³)`.
    pub fn pi2(&self, xi: C64, eta: C64) -> Result<(C64, C64)> {
        if xi.norm() < 1e-300 {
            return Err(Error::InvalidInput("π_2 is undefined at ξ = 0".into()));
        }
        Ok((C64::new(1.0, 0.0) / (xi * xi), eta / (xi * xi * xi)))
    }
}

/// Put the curve with parameters `(t1, t2)` into the symmetric sextic form.
pub fn normalize_bielliptic(t1: C64, t2: C64) -> Result<BiellipticNormalization> {
    for (name, v) in [("t1", t1), ("t2", t2)] {
        if !v.is_finite() || v.norm() < 1e-12 || (v - 1.0).norm() < 1e-12 {
            return Err(Error::InvalidInput(format!("{name} = {v} must avoid 0 and 1")));
        }
    }
    let a = t2 / t1;
    let b = (C64::new(1.0, 0.0) - t2) / (C64::new(1.0, 0.0) - t1);
    let n = BiellipticNormalization { t1, t2, a, b };
    let bp = n.branch_points();
    for i in 0..6 {
        for j in (i + 1)..6 {
            if (bp[i] - bp[j]).norm() < 1e-9 {
                return Err(Error::Degenerate(format!(
                    "coincident branch points {} and {}",
                    bp[i], bp[j]
                )));
            }
        }
    }
    Ok(n)
}

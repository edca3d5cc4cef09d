//! Rank-1 connections on `C`, the direct-image connection matrix on `E` in
//! the basis `(1, ξ)`, its residues (closed form and by contour
//! integration), and the scalar second-order equation.

use crate::bundles::{classify_points, CaseLabel};
use crate::curves::{BiellipticCover, CPoint, EPoint, POINT_TOL};
use crate::linalg::Mat2;
use crate::{Error, Result, C64};
use std::f64::consts::PI;

/// Line-bundle data of a rank-1 connection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LineBundle {
    /// `O_C`.
    Trivial,
    /// `O_C(q̃1 + q̃2 - ∞_+ - ∞_-)`.
    Points(CPoint, CPoint),
}

/// `∇_L = d + ω` on `C`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rank1Connection {
    pub lambda1: C64,
    pub lambda2: C64,
    pub bundle: LineBundle,
}

/// Finite data `(ξ, y, x = t'-ξ²)` of a divisor point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct QData {
    pub xi: C64,
    pub y: C64,
    pub x: C64,
}

impl Rank1Connection {
    pub fn trivial(lambda1: C64, lambda2: C64) -> Self {
        Rank1Connection { lambda1, lambda2, bundle: LineBundle::Trivial }
    }

    pub fn points(lambda1: C64, lambda2: C64, q1: CPoint, q2: CPoint) -> Self {
        Rank1Connection { lambda1, lambda2, bundle: LineBundle::Points(q1, q2) }
    }

    pub fn is_trivial(&self) -> bool {
        matches!(self.bundle, LineBundle::Trivial)
    }

    pub(crate) fn qdata(&self, cover: &BiellipticCover) -> Result<Option<[QData; 2]>> {
        match self.bundle {
            LineBundle::Trivial => Ok(None),
            LineBundle::Points(a, b) => {
                let mut out = [QData { xi: C64::default(), y: C64::default(), x: C64::default() }; 2];
                for (k, q) in [a, b].iter().enumerate() {
                    let (xi, y) = q.coords().ok_or_else(|| {
                        Error::NotImplemented(
                            "connection forms with a divisor point at infinity".into(),
                        )
                    })?;
                    if !cover.contains(q, crate::curves::MEMBERSHIP_TOL) {
                        return Err(Error::NotOnCurve { residual: cover.residual_c(xi, y) });
                    }
                    out[k] = QData { xi, y, x: cover.tp - xi * xi };
                }
                Ok(Some(out))
            }
        }
    }

    /// Coefficient of `ω` with respect to `dξ` at an affine point of `C`.
    pub(crate) fn omega_coeff(&self, xi: C64, y: C64, q: &Option<[QData; 2]>) -> C64 {
        let mut w = (self.lambda1 + self.lambda2 * xi) / y;
        if let Some(qs) = q {
            let mut div = C64::new(0.0, 0.0);
            for qd in qs {
                div += (y + qd.y) / (xi - qd.xi);
            }
            w += div * 0.5 / y;
        }
        w
    }
}

/// `ω` as a multiple of `dξ` at `p`.
pub fn omega_eval(conn: &Rank1Connection, cover: &BiellipticCover, p: &CPoint) -> Result<C64> {
    let (xi, y) = p
        .coords()
        .ok_or_else(|| Error::InvalidInput("ω has a pole at the points over ∞".into()))?;
    if !cover.contains(p, crate::curves::MEMBERSHIP_TOL) {
        return Err(Error::NotOnCurve { residual: cover.residual_c(xi, y) });
    }
    if y.norm() < 1e-12 {
        return Err(Error::InvalidInput("dξ is not a local coordinate where y = 0".into()));
    }
    let q = conn.qdata(cover)?;
    if let Some(qs) = &q {
        for qd in qs {
            if (xi - qd.xi).norm() < POINT_TOL && (y - qd.y).norm() < POINT_TOL * (1.0 + y.norm()) {
                return Err(Error::InvalidInput("evaluation at a pole of ω".into()));
            }
        }
    }
    Ok(conn.omega_coeff(xi, y, &q))
}

/// The direct-image connection matrix: `∇ = d + A(x, y) dx` in the basis
/// `(1, ξ)`; flat sections satisfy `dΦ/dx = -A Φ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConnectionMatrix {
    pub cover: BiellipticCover,
    pub lambda1: C64,
    pub lambda2: C64,
    pub(crate) q: Option<[QData; 2]>,
    /// Configuration of the divisor points; `None` for the trivial bundle.
    pub case: Option<CaseLabel>,
}

/// Anything that can be transported: a coefficient matrix of `dx` on `E`
/// together with the abscissae where it may be singular.
pub trait MatrixField: Sync {
    fn cover(&self) -> &BiellipticCover;
    fn eval(&self, x: C64, y: C64) -> Mat2;
    fn avoid_x(&self) -> Vec<C64>;
}

impl MatrixField for ConnectionMatrix {
    fn cover(&self) -> &BiellipticCover {
        &self.cover
    }
    fn eval(&self, x: C64, y: C64) -> Mat2 {
        ConnectionMatrix::eval(self, x, y)
    }
    fn avoid_x(&self) -> Vec<C64> {
        ConnectionMatrix::avoid_x(self)
    }
}

/// Build the matrix for the connection, dispatching on the configuration.
pub fn direct_image_matrix(
    conn: &Rank1Connection,
    cover: &BiellipticCover,
) -> Result<ConnectionMatrix> {
    let case = match conn.bundle {
        LineBundle::Trivial => None,
        LineBundle::Points(a, b) => Some(classify_points(cover, &a, &b)?),
    };
    if case == Some(CaseLabel::C) {
        return Err(Error::NotImplemented(
            "connection matrix with a divisor point at infinity".into(),
        ));
    }
    if let LineBundle::Points(a, b) = conn.bundle {
        if a.is_infinite() || b.is_infinite() {
            return Err(Error::NotImplemented(
                "connection matrix with a divisor point at infinity".into(),
            ));
        }
    }
    Ok(ConnectionMatrix {
        cover: *cover,
        lambda1: conn.lambda1,
        lambda2: conn.lambda2,
        q: conn.qdata(cover)?,
        case,
    })
}

impl ConnectionMatrix {
    /// Coefficient matrix of `dx` at an affine point `(x, y)` of `E`.
    pub fn eval(&self, x: C64, y: C64) -> Mat2 {
        let tp = self.cover.tp;
        let (l1, l2) = (self.lambda1, self.lambda2);
        let u = tp - x;
        let mut s11 = l2;
        let mut s12 = l1;
        let mut s21 = l1 / u;
        let mut s22 = l2 + y / u;
        if let Some(qs) = &self.q {
            let mut d = C64::new(0.0, 0.0);
            let mut dxi = C64::new(0.0, 0.0);
            for qd in qs {
                let w = (y + qd.y) / (qd.x - x);
                d += w;
                dxi += w * qd.xi;
            }
            s11 += d * 0.5;
            s12 += dxi * 0.5;
            s21 += dxi * 0.5 / u;
            s22 += d * 0.5;
        }
        let k = C64::new(-0.5, 0.0) / y;
        Mat2::new(s11 * k, s12 * k, s21 * k, s22 * k)
    }

    /// Evaluate through a point of `C` (both lifts of a point of `E` give the
    /// same matrix).
    pub fn eval_c(&self, p: &CPoint) -> Result<Mat2> {
        let e = self.cover.cover_map(p)?;
        let (x, y) = e.xy().ok_or_else(|| Error::InvalidInput("point is at infinity".into()))?;
        Ok(self.eval(x, y))
    }

    pub fn is_trivial(&self) -> bool {
        self.q.is_none()
    }

    /// Finite poles on `E`: `p_±` and the images of the divisor points.
    pub fn finite_poles(&self) -> Vec<EPoint> {
        let mut v = vec![self.cover.p_plus(), self.cover.p_minus()];
        if let Some(qs) = &self.q {
            for qd in qs {
                let p = EPoint::affine(qd.x, qd.y);
                if !v.iter().any(|o| o.approx_eq(&p, POINT_TOL)) {
                    v.push(p);
                }
            }
        }
        v
    }

    /// Abscissae the transport paths must avoid: branch values of `y`, `t'`
    /// and the divisor abscissae.
    pub fn avoid_x(&self) -> Vec<C64> {
        let mut v = self.cover.special_x().to_vec();
        if let Some(qs) = &self.q {
            for qd in qs {
                v.push(qd.x);
            }
        }
        v
    }
}

/// Residues of `A dx` at all its poles. Absent entries are `None`; points
/// that coincide on `E` are merged into the first slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidueSet {
    pub at_p_plus: Option<Mat2>,
    pub at_p_minus: Option<Mat2>,
    pub at_q1: Option<Mat2>,
    pub at_q2: Option<Mat2>,
    pub at_infinity: Option<Mat2>,
}

impl ResidueSet {
    pub fn iter(&self) -> impl Iterator<Item = (&'static str, Mat2)> + '_ {
        [
            ("p+", self.at_p_plus),
            ("p-", self.at_p_minus),
            ("q1", self.at_q1),
            ("q2", self.at_q2),
            ("inf", self.at_infinity),
        ]
        .into_iter()
        .filter_map(|(n, m)| m.map(|m| (n, m)))
    }

    /// Entry-wise sum over the present poles.
    pub fn sum(&self) -> Mat2 {
        self.iter().fold(Mat2::zero(), |acc, (_, m)| acc + m)
    }

    /// Largest entry-wise difference over poles present in both sets.
    pub fn max_diff(&self, other: &ResidueSet) -> f64 {
        let pairs = [
            (self.at_p_plus, other.at_p_plus),
            (self.at_p_minus, other.at_p_minus),
            (self.at_q1, other.at_q1),
            (self.at_q2, other.at_q2),
            (self.at_infinity, other.at_infinity),
        ];
        pairs
            .iter()
            .filter_map(|(a, b)| match (a, b) {
                (Some(a), Some(b)) => Some(a.max_diff(b)),
                _ => None,
            })
            .fold(0.0, f64::max)
    }
}

/// `Res_{p±}` in the trivial case: `[[0, 0], [±λ1/(2y0), 1/2]]`.
fn trivial_residues(m: &ConnectionMatrix) -> ResidueSet {
    let y0 = m.cover.y0;
    let h = C64::new(0.5, 0.0);
    let z = C64::new(0.0, 0.0);
    let r = m.lambda1 / (y0 * 2.0);
    ResidueSet {
        at_p_plus: Some(Mat2::new(z, z, r, h)),
        at_p_minus: Some(Mat2::new(z, z, -r, h)),
        at_q1: None,
        at_q2: None,
        at_infinity: Some(Mat2::new(z, z, z, C64::new(-1.0, 0.0))),
    }
}

/// Closed-form residues.
///
/// At `q_i = (x_i, y_i)`: `[[1/2, ξ_i/2], [1/(2ξ_i), 1/2]]`. At `∞`:
/// `[[-1, -(ξ1+ξ2)/2], [0, -2]]`. At `p_± = (t', ±y0)` the (2,1) entry is
/// `(λ1/2 - (1/4) Σ_i (±y0 + y_i)/ξ_i) / (±y0)`; the first row vanishes and
/// the (2,2) entry is `1/2`. When a divisor point lies over `t'` its term
/// moves into the residue at the matching `p`.
pub fn analytic_residues(m: &ConnectionMatrix) -> Result<ResidueSet> {
    let qs = match &m.q {
        None => return Ok(trivial_residues(m)),
        Some(q) => q,
    };
    let y0 = m.cover.y0;
    let l1 = m.lambda1;
    let half = C64::new(0.5, 0.0);
    let z = C64::new(0.0, 0.0);
    for qd in qs {
        if qd.y.norm() < 1e-9 {
            return Err(Error::Degenerate(
                "divisor point over a branch value of y; x is not a local parameter".into(),
            ));
        }
    }
    let at_tp: Vec<bool> = qs.iter().map(|q| q.xi.norm() < 1e-9).collect();
    if at_tp[0] && at_tp[1] {
        return Err(Error::NotImplemented(
            "both divisor points at ramification points".into(),
        ));
    }
    let mut res = ResidueSet {
        at_p_plus: None,
        at_p_minus: None,
        at_q1: None,
        at_q2: None,
        at_infinity: None,
    };
    let mut p_res = [Mat2::zero(); 2];
    for (k, sgn) in [1.0, -1.0].iter().enumerate() {
        let ys = y0 * *sgn;
        let mut c = l1 * 0.5;
        let mut m11 = z;
        let mut m22 = half;
        for (i, qd) in qs.iter().enumerate() {
            if at_tp[i] {
                if (qd.y - ys).norm() < 1e-9 * (1.0 + ys.norm()) {
                    m11 += half;
                    m22 += half;
                }
            } else {
                c -= (ys + qd.y) / qd.xi * 0.25;
            }
        }
        p_res[k] = Mat2::new(m11, z, c / ys, m22);
    }
    res.at_p_plus = Some(p_res[0]);
    res.at_p_minus = Some(p_res[1]);
    let mut q_mats = Vec::new();
    for (i, qd) in qs.iter().enumerate() {
        if at_tp[i] {
            continue;
        }
        let r = Mat2::new(half, qd.xi * 0.5, half / qd.xi, half);
        q_mats.push((EPoint::affine(qd.x, qd.y), r));
    }
    if q_mats.len() == 2 && q_mats[0].0.approx_eq(&q_mats[1].0, POINT_TOL) {
        res.at_q1 = Some(q_mats[0].1 + q_mats[1].1);
    } else {
        res.at_q1 = q_mats.first().map(|x| x.1);
        res.at_q2 = q_mats.get(1).map(|x| x.1);
    }
    let sxi = qs[0].xi + qs[1].xi;
    res.at_infinity = Some(Mat2::new(C64::new(-1.0, 0.0), -sxi * 0.5, z, C64::new(-2.0, 0.0)));
    Ok(res)
}

/// Where to take a contour residue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ResidueCenter {
    /// A finite point of `E` that is not a branch value of `x`; local
    /// parameter `x - x0`.
    Finite(EPoint),
    /// The point at infinity; local parameter `u = x/y`.
    Infinity,
}

/// Settings for the contour oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourSettings {
    pub tol: f64,
    pub max_points: usize,
}

impl Default for ContourSettings {
    fn default() -> Self {
        ContourSettings { tol: 1e-14, max_points: 1 << 16 }
    }
}

/// Point of `E` near `∞` with local parameter `u = x/y`.
pub fn infinity_chart(t: C64, u: C64) -> (C64, C64, C64) {
    // x/u² = (x-1)(x-t)  ⇔  x² - (1 + t + u⁻²) x + t = 0; take the large root.
    let b = -(C64::new(1.0, 0.0) + t + (u * u).inv());
    let disc = (b * b - t * 4.0).sqrt();
    let r1 = (-b + disc) * 0.5;
    let r2 = (-b - disc) * 0.5;
    let x = if r1.norm() >= r2.norm() { r1 } else { r2 };
    let y = x / u;
    let dxdu = -(x * 2.0) / (u * u * u) / (x * 2.0 + b);
    (x, y, dxdu)
}

/// `(1/2πi) ∮ A` on a positively oriented circle of `radius` in the local
/// parameter, by the periodic trapezoidal rule with doubling.
pub fn numeric_residue(
    a: &ConnectionMatrix,
    center: ResidueCenter,
    radius: f64,
    settings: &ContourSettings,
) -> Result<Mat2> {
    let t = a.cover.t;
    let sample: Box<dyn Fn(f64) -> Mat2> = match center {
        ResidueCenter::Finite(p) => {
            let (x0, y0) = p.xy().unwrap();
            if y0.norm() < 1e-12 {
                return Err(Error::InvalidInput(
                    "x is not a local parameter at a branch value".into(),
                ));
            }
            let curve = a.cover.curve();
            Box::new(move |th: f64| {
                let e = C64::from_polar(radius, th);
                let x = x0 + e;
                let r = curve.rhs(x).sqrt();
                let y = if (r - y0).norm() <= (r + y0).norm() { r } else { -r };
                a.eval(x, y).scale(e)
            })
        }
        ResidueCenter::Infinity => Box::new(move |th: f64| {
            let u = C64::from_polar(radius, th);
            let (x, y, dxdu) = infinity_chart(t, u);
            a.eval(x, y).scale(dxdu * u)
        }),
    };
    let mut n = 32usize;
    let trap = |n: usize| -> Mat2 {
        let mut s = Mat2::zero();
        for k in 0..n {
            s = s + sample(2.0 * PI * k as f64 / n as f64);
        }
        s.scale(C64::new(1.0 / n as f64, 0.0))
    };
    let mut prev = trap(n);
    loop {
        n *= 2;
        let cur = trap(n);
        if !cur.is_finite() {
            return Err(Error::PoleOnPath("contour passes through a pole".into()));
        }
        if cur.max_diff(&prev) <= settings.tol * (1.0 + cur.max_abs()) {
            return Ok(cur);
        }
        if n >= settings.max_points {
            return Err(Error::Numerical("contour residue did not converge".into()));
        }
        prev = cur;
    }
}

/// Radius used for contour residues: a quarter of the distance from each
/// center abscissa to the nearest other special abscissa, and for `∞` a
/// matching radius in the `u` chart.
pub fn default_radii(a: &ConnectionMatrix) -> (f64, f64) {
    let xs = a.avoid_x();
    let mut dmin = f64::INFINITY;
    for i in 0..xs.len() {
        for j in (i + 1)..xs.len() {
            let d = (xs[i] - xs[j]).norm();
            if d > 1e-9 {
                dmin = dmin.min(d);
            }
        }
    }
    let rmax = xs.iter().map(|x| x.norm()).fold(1.0, f64::max);
    (0.25 * dmin, 0.25 / (1.0 + rmax).sqrt())
}

/// Contour residues at every pole, mirroring [`analytic_residues`].
pub fn numeric_residues(a: &ConnectionMatrix, settings: &ContourSettings) -> Result<ResidueSet> {
    let (r, ru) = default_radii(a);
    let mut out = ResidueSet {
        at_p_plus: Some(numeric_residue(a, ResidueCenter::Finite(a.cover.p_plus()), r, settings)?),
        at_p_minus: Some(numeric_residue(
            a,
            ResidueCenter::Finite(a.cover.p_minus()),
            r,
            settings,
        )?),
        at_q1: None,
        at_q2: None,
        at_infinity: Some(numeric_residue(a, ResidueCenter::Infinity, ru, settings)?),
    };
    if let Some(qs) = &a.q {
        let mut pts: Vec<EPoint> = Vec::new();
        for qd in qs {
            if qd.xi.norm() < 1e-9 {
                continue;
            }
            let p = EPoint::affine(qd.x, qd.y);
            if !pts.iter().any(|o| o.approx_eq(&p, POINT_TOL)) {
                pts.push(p);
            }
        }
        if let Some(p) = pts.first() {
            out.at_q1 = Some(numeric_residue(a, ResidueCenter::Finite(*p), r, settings)?);
        }
        if let Some(p) = pts.get(1) {
            out.at_q2 = Some(numeric_residue(a, ResidueCenter::Finite(*p), r, settings)?);
        }
    }
    Ok(out)
}

/// Coefficients `(p, q)` of `Φ1'' + p Φ1' + q Φ1 = 0` (derivatives in `x`)
/// for the trivial-bundle connection.
pub fn scalar_ode_coeffs(
    conn: &Rank1Connection,
    cover: &BiellipticCover,
    x: C64,
    y: C64,
) -> Result<(C64, C64)> {
    if !conn.is_trivial() {
        return Err(Error::InvalidInput("scalar equation is for the trivial bundle".into()));
    }
    let curve = cover.curve();
    let p3 = curve.rhs(x);
    if p3.norm() < 1e-14 || (x - cover.tp).norm() < 1e-14 {
        return Err(Error::InvalidInput("singular point of the scalar equation".into()));
    }
    let (l1, l2) = (conn.lambda1, conn.lambda2);
    let xt = x - cover.tp;
    let p = curve.rhs_deriv(x) / (p3 * 2.0) - l2 / y + (xt * 2.0).inv();
    let q = l1 * l1 / (p3 * xt * 4.0) + l2 * l2 / (p3 * 4.0) - l2 / (xt * y * 4.0);
    Ok((p, q))
}

/// Recover `Φ2` from `Φ1` using the first row of the system,
/// `Φ2 = (2y/λ1) Φ1' - (λ2/λ1) Φ1` (requires `λ1 ≠ 0`).
pub fn eliminate_phi2(conn: &Rank1Connection, y: C64, phi1: C64, dphi1: C64) -> Result<C64> {
    if conn.lambda1.norm() < 1e-300 {
        return Err(Error::InvalidInput(
            "λ1 = 0: the system is triangular and is solved directly".into(),
        ));
    }
    Ok((y * 2.0 * dphi1 - conn.lambda2 * phi1) / conn.lambda1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn cover() -> BiellipticCover {
        BiellipticCover::from_real(2.0, 3.0).unwrap()
    }

    #[test]
    fn trivial_zero_lambda_matrix() {
        let cov = cover();
        let m = direct_image_matrix(&Rank1Connection::trivial(c(0.0, 0.0), c(0.0, 0.0)), &cov)
            .unwrap();
        let x = c(0.4, 0.7);
        let y = cov.curve().rhs(x).sqrt();
        let a = m.eval(x, y);
        let expect = Mat2::new(c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), -(cov.tp - x).inv() * 0.5);
        assert!(a.max_diff(&expect) < 1e-15);
    }

    #[test]
    fn trivial_trace() {
        let cov = cover();
        let (l1, l2) = (c(0.3, 0.1), c(-0.2, 0.5));
        let m = direct_image_matrix(&Rank1Connection::trivial(l1, l2), &cov).unwrap();
        let x = c(-0.7, 0.2);
        let y = cov.curve().rhs(x).sqrt();
        let tr = m.eval(x, y).trace();
        let expect = -l2 / y - (cov.tp - x).inv() * 0.5;
        assert!((tr - expect).norm() < 1e-14);
    }

    #[test]
    fn trivial_residue_at_p_plus() {
        let cov = cover();
        let m = direct_image_matrix(&Rank1Connection::trivial(c(1.0, 0.0), c(0.0, 0.0)), &cov)
            .unwrap();
        let r = analytic_residues(&m).unwrap();
        let exp = Mat2::new(c(0.0, 0.0), c(0.0, 0.0), c(1.0 / (2.0 * 6f64.sqrt()), 0.0), c(0.5, 0.0));
        assert!(r.at_p_plus.unwrap().max_diff(&exp) < 1e-15);
        let s = r.at_p_plus.unwrap() + r.at_p_minus.unwrap();
        assert!((s + r.at_infinity.unwrap()).max_abs() < 1e-15);
    }

    #[test]
    fn omega_trivial_value() {
        let cov = cover();
        let conn = Rank1Connection::trivial(c(1.0, 0.0), c(0.0, 0.0));
        let p = cov.point_at(c(1.0, 0.0), 1.0);
        let (_, y) = p.coords().unwrap();
        // At ξ = 1 the sextic vanishes: (3-1)(2-1)(1-1) = 0, so pick ξ = 1.2.
        assert!(y.norm() < 1e-15);
        let p = cov.point_at(c(1.2, 0.0), 1.0);
        let (_, y) = p.coords().unwrap();
        assert!((omega_eval(&conn, &cov, &p).unwrap() - y.inv()).norm() < 1e-15);
    }
}

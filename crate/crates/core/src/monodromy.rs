//! Loops on `E ∖ {p_±}`, monodromy by closed forms and by transport of the
//! system `dΦ = -A Φ dx`, fundamental matrices, Riemann-Hilbert image tests
//! and isomonodromy invariants.
//!
//! Convention: continuing a fundamental matrix `Φ` along a loop gives
//! `Φ · M`. Consequently the matrix of a composite loop `αβ` (first `α`) is
//! `M_β M_α`.

use crate::connections::{direct_image_matrix, MatrixField, Rank1Connection};
use crate::curves::BiellipticCover;
use crate::linalg::Mat2;
use crate::ode::{integrate, OdeSettings};
use crate::paths::{lift, LiftedPath, Seg, XPath};
use crate::periods::{
    in_period_locus, integrate_on_lift, omega_periods, HyperellipticConstants, PeriodVector,
};
use crate::quadrature::QuadratureSettings;
use crate::{par, Error, Result, C64};
use std::f64::consts::PI;

/// Base point and the four generators, all closed at the base.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopSpec {
    pub base: C64,
    pub clearance: f64,
    pub a: XPath,
    pub b: XPath,
    pub g1: XPath,
    pub g2: XPath,
    /// Tails of `γ1`, `γ2`: paths from the base to the start of the small
    /// circles around `t'`.
    pub d1: XPath,
    pub d2: XPath,
}

impl LoopSpec {
    pub fn loops(&self) -> [&XPath; 4] {
        [&self.a, &self.b, &self.g1, &self.g2]
    }
}

fn wrap_0_2pi(a: f64) -> f64 {
    a.rem_euclid(2.0 * PI)
}

/// Closed capsule around the segment `[p, q]` at distance `r`, starting at
/// the point of angle `psi` on the half circle around `p` facing away from
/// `q`, counterclockwise unless `ccw` is false.
fn capsule(p: C64, q: C64, r: f64, psi: f64, ccw: bool) -> XPath {
    let u = (q - p) / (q - p).norm();
    let phi = u.arg();
    let n = u * C64::new(0.0, 1.0);
    let mut segs = Vec::new();
    let d1 = wrap_0_2pi(phi + 1.5 * PI - psi);
    if d1 > 1e-15 && d1 < 2.0 * PI - 1e-12 {
        segs.push(Seg::Arc { c: p, r, th0: psi, dth: d1 });
    }
    segs.push(Seg::Line { a: p - n * r, b: q - n * r });
    segs.push(Seg::Arc { c: q, r, th0: phi - 0.5 * PI, dth: PI });
    segs.push(Seg::Line { a: q + n * r, b: p + n * r });
    let d2 = wrap_0_2pi(psi - (phi + 0.5 * PI));
    if d2 > 1e-15 && d2 < 2.0 * PI - 1e-12 {
        segs.push(Seg::Arc { c: p, r, th0: phi + 0.5 * PI, dth: d2 });
    }
    let path = XPath::new(segs);
    if ccw {
        path
    } else {
        path.reversed()
    }
}

/// `d · (circle of radius r around c, starting at d.end()) · d⁻¹`.
fn lasso(d: &XPath, c: C64, r: f64) -> XPath {
    let th0 = (d.end() - c).arg();
    let circle = XPath::new(vec![Seg::Arc { c, r, th0, dth: 2.0 * PI }]);
    d.then(&circle).then(&d.reversed())
}

/// Arc of the circle `|x - c| = r` from angle `from` to angle `to` that
/// does not cross the ray at angle `cut`. Empty when the angles agree.
fn arc_avoiding(c: C64, r: f64, from: f64, to: f64, cut: f64) -> XPath {
    let mut dth = wrap_0_2pi(to - from);
    if dth < 1e-15 || dth > 2.0 * PI - 1e-15 {
        return XPath::new(Vec::new());
    }
    if wrap_0_2pi(cut - from) < dth {
        dth -= 2.0 * PI;
    }
    XPath::new(vec![Seg::Arc { c, r, th0: from, dth }])
}

/// Replace each chord of a straight segment that cuts the circle of
/// radius `1.5 r` around one of `free` by the minor arc of that circle.
/// The arc lies on the far side of the chord, so the path keeps its class
/// in the plane minus that point.
fn detour(path: &XPath, free: &[C64], r: f64) -> XPath {
    let rad = 1.5 * r;
    let mut segs = Vec::new();
    for seg in &path.segs {
        let Seg::Line { a, b } = *seg else {
            segs.push(*seg);
            continue;
        };
        let d = b - a;
        let len = d.norm();
        let u = d / len;
        let mut cuts: Vec<(f64, f64, C64)> = Vec::new();
        for p in free {
            let s0 = ((p - a) * u.conj()).re;
            let h = ((p - a) * u.conj()).im.abs();
            if h >= rad {
                continue;
            }
            let w = (rad * rad - h * h).sqrt();
            if s0 - w > 0.0 && s0 + w < len {
                cuts.push((s0 - w, s0 + w, *p));
            }
        }
        cuts.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        let mut cur = a;
        for (s1, s2, p) in cuts {
            let e1 = a + u * s1;
            let e2 = a + u * s2;
            segs.push(Seg::Line { a: cur, b: e1 });
            let th0 = (e1 - p).arg();
            let dth = ((e2 - p).arg() - th0 + PI).rem_euclid(2.0 * PI) - PI;
            segs.push(Seg::Arc { c: p, r: rad, th0, dth });
            cur = e2;
        }
        segs.push(Seg::Line { a: cur, b });
    }
    XPath::new(segs)
}

/// Standard generators. `extra` lists further abscissae to avoid (the
/// images of divisor points).
///
/// All loops start at a point `r` away from `1`, in the middle of the angle
/// swept counterclockwise from the direction of `t` to the direction of
/// `0`. Near `1` the loops move along the circle of radius `r` and never
/// cross the opposite ray. `a` is a counterclockwise capsule around
/// `[1, t]` and `b` a clockwise capsule around `[0, 1]`. `γ1` runs along
/// the `+i(t-1)` side of `[1, t]`, turns clockwise around `t` and heads
/// to a circle around `t'`; `γ2` crosses `[1, t]` at its midpoint, runs
/// along the other side and turns counterclockwise around `t`, and is
/// conjugated by `b`. Around `t` neither turn crosses the ray pointing
/// back at `1`. For real `1 < t < t'` the base is `1 + ir`.
pub fn standard_loops(cover: &BiellipticCover, extra: &[C64]) -> Result<LoopSpec> {
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let (t, tp) = (cover.t, cover.tp);
    let mut pts: Vec<C64> = cover.special_x().to_vec();
    for e in extra {
        if !pts.iter().any(|p| (p - e).norm() < 1e-14) {
            pts.push(*e);
        }
    }
    let mut dmin = f64::INFINITY;
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            dmin = dmin.min((pts[i] - pts[j]).norm());
        }
    }
    if !(dmin > 1e-8) {
        return Err(Error::Degenerate(format!(
            "special abscissae nearly coincide (min distance {dmin:e})"
        )));
    }
    let r = dmin / 4.0;
    let u_a = (t - one) / (t - one).norm();
    let n_a = u_a * C64::new(0.0, 1.0);
    let phi_t = u_a.arg();
    let sweep = wrap_0_2pi(PI - phi_t);
    let psi = phi_t + 0.5 * sweep;
    let cut1 = psi + PI;
    let base = one + C64::from_polar(r, psi);

    let start_a = phi_t + 0.5 * PI;
    let to_a = arc_avoiding(one, r, psi, start_a, cut1);
    let a = to_a.then(&capsule(one, t, r, start_a, true)).then(&to_a.reversed());
    let start_b = 0.5 * PI;
    let to_b = arc_avoiding(one, r, psi, start_b, cut1);
    let b = to_b.then(&capsule(one, zero, r, start_b, false)).then(&to_b.reversed());

    let th_p = (tp - t).arg();
    let cut_t = phi_t + PI;
    let u_p = C64::from_polar(1.0, th_p);
    let tail = XPath::polyline(&[t + u_p * r, tp - u_p * r]);
    // Cross `[1, t]` where the crossing stays clear of the divisor abscissae.
    let free: Vec<C64> = pts[4..].to_vec();
    let clear = |m: C64| {
        let cross = Seg::Line { a: m + n_a * r, b: m - n_a * r };
        free.iter().map(|e| cross.distance_to(*e)).fold(f64::INFINITY, f64::min)
    };
    let candidates = [0.5, 0.4, 0.6, 0.3, 0.7, 0.2, 0.8].map(|s| one + (t - one) * s);
    let m = candidates
        .iter()
        .copied()
        .find(|m| clear(*m) >= 2.0 * r)
        .unwrap_or(candidates[0]);
    let d1 = to_a
        .then(&XPath::polyline(&[one + n_a * r, t + n_a * r]))
        .then(&arc_avoiding(t, r, start_a, th_p, cut_t))
        .then(&tail);
    let d2 = to_a
        .then(&XPath::polyline(&[one + n_a * r, m + n_a * r, m - n_a * r, t - n_a * r]))
        .then(&arc_avoiding(t, r, phi_t - 0.5 * PI, th_p, cut_t))
        .then(&tail);
    let (a, b) = (detour(&a, &free, r), detour(&b, &free, r));
    let (d1, d2) = (detour(&d1, &free, r), detour(&d2, &free, r));
    let g1 = lasso(&d1, tp, r);
    // Conjugated by `b` so that the surface relation holds with the
    // other three generators as drawn.
    let g2 = b.reversed().then(&lasso(&d2, tp, r)).then(&b);
    let spec = LoopSpec { base, clearance: r, a, b, g1, g2, d1, d2 };
    validate_loops(&spec, cover, &pts)?;
    Ok(spec)
}

fn validate_loops(spec: &LoopSpec, cover: &BiellipticCover, pts: &[C64]) -> Result<()> {
    let tol = spec.clearance * (1.0 - 1e-6);
    for (name, path) in [("a", &spec.a), ("b", &spec.b), ("g1", &spec.g1), ("g2", &spec.g2)] {
        if !path.is_closed(1e-12) {
            return Err(Error::Degenerate(format!("loop {name} is not closed")));
        }
        for p in pts {
            let d = path.distance_to(*p);
            if d < tol {
                return Err(Error::Degenerate(format!(
                    "loop {name} passes within {d:e} of the special abscissa {p}"
                )));
            }
        }
    }
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let expect_inside = |path: &XPath, inside: &[C64]| -> bool {
        pts.iter().all(|p| {
            let w = path.winding_number(*p);
            let want = inside.iter().any(|q| (q - p).norm() < 1e-12);
            (w != 0) == want
        })
    };
    let ok = expect_inside(&spec.a, &[one, cover.t])
        && expect_inside(&spec.b, &[zero, one])
        && expect_inside(&spec.g1, &[cover.tp])
        && expect_inside(&spec.g2, &[cover.tp]);
    if !ok {
        return Err(Error::Degenerate(
            "could not build loops with the required clearance for these parameters".into(),
        ));
    }
    Ok(())
}

/// Monodromy matrices of the four generators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonodromyRep {
    pub m_a: Mat2,
    pub m_b: Mat2,
    pub m_g1: Mat2,
    pub m_g2: Mat2,
    /// Fundamental matrix at the base in which the matrices are expressed.
    pub frame: Mat2,
}

impl MonodromyRep {
    pub fn matrices(&self) -> [Mat2; 4] {
        [self.m_a, self.m_b, self.m_g1, self.m_g2]
    }

    /// `max |M_b M_a - M_a M_b M_γ1⁻¹ M_γ2⁻¹|`, which vanishes exactly when
    /// the loop relation `[a, b] γ1 γ2 = 1` is respected.
    pub fn relation_residual(&self) -> f64 {
        let (g1i, g2i) = match (self.m_g1.inverse(), self.m_g2.inverse()) {
            (Some(a), Some(b)) => (a, b),
            _ => return f64::INFINITY,
        };
        let lhs = self.m_b * self.m_a;
        let rhs = self.m_a * self.m_b * g1i * g2i;
        lhs.max_diff(&rhs)
    }

    /// `max_i |M_γi² - I|`.
    pub fn order2_residual(&self) -> f64 {
        let i = Mat2::identity();
        (self.m_g1 * self.m_g1)
            .max_diff(&i)
            .max((self.m_g2 * self.m_g2).max_diff(&i))
    }

    pub fn max_diff(&self, other: &MonodromyRep) -> f64 {
        self.matrices()
            .iter()
            .zip(other.matrices().iter())
            .map(|(a, b)| a.max_diff(b))
            .fold(0.0, f64::max)
    }
}

fn sheet_pair_matrix(e1: C64, e2: C64) -> Mat2 {
    let p = (e1 + e2) * 0.5;
    let m = (e1 - e2) * 0.5;
    Mat2::new(p, m, m, p)
}

/// Closed form from the periods of `ω`:
/// `M_a = ½[[e^{-N1}+e^{-N2}, e^{-N1}-e^{-N2}], [e^{-N1}-e^{-N2}, e^{-N1}+e^{-N2}]]`,
/// `M_b` likewise with `N3, N4`, and `M_γi = diag(1, -1)`.
pub fn closed_form_monodromy(periods: &PeriodVector) -> MonodromyRep {
    let n = periods.n;
    let g = Mat2::sigma3();
    MonodromyRep {
        m_a: sheet_pair_matrix((-n[0]).exp(), (-n[1]).exp()),
        m_b: sheet_pair_matrix((-n[2]).exp(), (-n[3]).exp()),
        m_g1: g,
        m_g2: g,
        frame: Mat2::identity(),
    }
}

/// Closed form for the trivial bundle in terms of `K, K', L, L'`:
/// `M_a = e^{-2iλ2K'} [[cos 2λ1K, -i sin 2λ1K], [-i sin 2λ1K, cos 2λ1K]]`,
/// `M_b = e^{2λ2L'} [[cosh 2λ1L, sinh 2λ1L], [sinh 2λ1L, cosh 2λ1L]]`.
pub fn closed_form_trivial(lambda1: C64, lambda2: C64, k: &HyperellipticConstants) -> MonodromyRep {
    let i = C64::new(0.0, 1.0);
    let ea = (-i * lambda2 * 2.0 * k.kp).exp();
    let th = lambda1 * 2.0 * k.k;
    let ca = th.cos() * ea;
    let sa = -i * th.sin() * ea;
    let eb = (lambda2 * 2.0 * k.lp).exp();
    let hb = lambda1 * 2.0 * k.l;
    let cb = hb.cosh() * eb;
    let sb = hb.sinh() * eb;
    let g = Mat2::sigma3();
    MonodromyRep {
        m_a: Mat2::new(ca, sa, sa, ca),
        m_b: Mat2::new(cb, sb, sb, cb),
        m_g1: g,
        m_g2: g,
        frame: Mat2::identity(),
    }
}

/// Settings for ODE transport.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransportSettings {
    pub ode: OdeSettings,
    /// Steps are capped at this fraction of the distance to the nearest
    /// singular abscissa.
    pub step_fraction: f64,
    pub quadrature: QuadratureSettings,
}

impl Default for TransportSettings {
    fn default() -> Self {
        TransportSettings {
            ode: OdeSettings { tol: 1e-10, ..OdeSettings::default() },
            step_fraction: 0.5,
            quadrature: QuadratureSettings::default(),
        }
    }
}

impl TransportSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.ode.tol > 0.0 && self.ode.max_step > 0.0 && self.step_fraction > 0.0) {
            return Err(Error::InvalidInput("transport settings must be positive".into()));
        }
        self.quadrature.validate()
    }
}

fn mat_from(v: &[C64; 4]) -> Mat2 {
    Mat2::new(v[0], v[1], v[2], v[3])
}

/// Solution `Y` of `dY = -A Y dx` along `path` with `Y(start) = I`, the
/// branch of `y` continued from `y0` (and `ξ` from `xi0`).
pub fn transport_along<A: MatrixField + ?Sized>(
    a: &A,
    path: &XPath,
    xi0: C64,
    y0: C64,
    settings: &TransportSettings,
) -> Result<Mat2> {
    let lifted = lift(a.cover(), path, xi0, y0)?;
    transport_lifted(a, &lifted, settings)
}

fn transport_lifted<A: MatrixField + ?Sized>(
    a: &A,
    lifted: &LiftedPath,
    settings: &TransportSettings,
) -> Result<Mat2> {
    let avoid = a.avoid_x();
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let mut y = [one, zero, zero, one];
    for (i, seg) in lifted.segs.iter().enumerate() {
        let s = seg.seg;
        let f = |sv: f64, v: &[C64; 4]| -> [C64; 4] {
            let (x, _, yy) = lifted.eval(i, sv);
            let m = a.eval(x, yy).scale(-s.deriv(sv));
            let r = m * mat_from(v);
            [r.m[0][0], r.m[0][1], r.m[1][0], r.m[1][1]]
        };
        let cap = |sv: f64| -> f64 {
            let x = s.point(sv);
            let d = avoid.iter().map(|p| (x - p).norm()).fold(f64::INFINITY, f64::min);
            settings.step_fraction * d / s.deriv(sv).norm().max(1e-300)
        };
        y = integrate(f, cap, 0.0, 1.0, y, &settings.ode)?;
    }
    Ok(mat_from(&y))
}

/// `P(r) = ½[[1+r, 1-r], [1-r, 1+r]]`.
fn pair_frame(r: C64) -> Mat2 {
    let one = C64::new(1.0, 0.0);
    Mat2::new((one + r) * 0.5, (one - r) * 0.5, (one - r) * 0.5, (one + r) * 0.5)
}

/// Base fiber data: principal `ξ_b`, `y_b` at the base point.
pub fn base_lift(cover: &BiellipticCover, base: C64) -> (C64, C64) {
    ((cover.tp - base).sqrt(), cover.curve().rhs(base).sqrt())
}

/// Fundamental matrix at the base used to express transported monodromy:
/// `diag(1, 1/ξ_b) · P(r)` with `r = exp(-∫_δ ω)`, `δ` the lift of `γ1`
/// from `(ξ_b, y_b)`. In this frame `M_γ1 = diag(1, -1)` and the sheet
/// structure of `M_a`, `M_b` matches the closed forms.
pub fn transport_frame(
    conn: &Rank1Connection,
    cover: &BiellipticCover,
    loops: &LoopSpec,
    settings: &QuadratureSettings,
) -> Result<Mat2> {
    let (xi_b, y_b) = base_lift(cover, loops.base);
    let q = conn.qdata(cover)?;
    let lifted = lift(cover, &loops.g1, xi_b, y_b)?;
    let w = integrate_on_lift(&lifted, false, |xi, y| [conn.omega_coeff(xi, y, &q)], settings)?;
    let r = (-w[0]).exp();
    Ok(Mat2::diag(C64::new(1.0, 0.0), xi_b.inv()) * pair_frame(r))
}

/// Monodromy by numerical transport along the four generators, expressed
/// in [`transport_frame`]. The loops are transported concurrently when the
/// `parallel` feature is on.
pub fn transport_monodromy(
    conn: &Rank1Connection,
    cover: &BiellipticCover,
    loops: &LoopSpec,
    settings: &TransportSettings,
) -> Result<MonodromyRep> {
    settings.validate()?;
    let a = direct_image_matrix(conn, cover)?;
    let (xi_b, y_b) = base_lift(cover, loops.base);
    let paths: Vec<&XPath> = loops.loops().to_vec();
    let raw: Vec<Result<Mat2>> = par::map(&paths, |p| transport_along(&a, p, xi_b, y_b, settings));
    let raw: Vec<Mat2> = raw.into_iter().collect::<Result<_>>()?;
    let frame = transport_frame(conn, cover, loops, &settings.quadrature)?;
    let fi = frame
        .inverse()
        .ok_or_else(|| Error::Numerical("singular transport frame".into()))?;
    let conj = |m: &Mat2| fi * *m * frame;
    Ok(MonodromyRep {
        m_a: conj(&raw[0]),
        m_b: conj(&raw[1]),
        m_g1: conj(&raw[2]),
        m_g2: conj(&raw[3]),
        frame,
    })
}

/// Same as [`transport_monodromy`] but strictly sequential (benchmarks).
pub fn transport_monodromy_seq(
    conn: &Rank1Connection,
    cover: &BiellipticCover,
    loops: &LoopSpec,
    settings: &TransportSettings,
) -> Result<MonodromyRep> {
    settings.validate()?;
    let a = direct_image_matrix(conn, cover)?;
    let (xi_b, y_b) = base_lift(cover, loops.base);
    let paths: Vec<&XPath> = loops.loops().to_vec();
    let raw: Vec<Mat2> = par::map_seq(&paths, |p| transport_along(&a, p, xi_b, y_b, settings))
        .into_iter()
        .collect::<Result<_>>()?;
    let frame = transport_frame(conn, cover, loops, &settings.quadrature)?;
    let fi = frame.inverse().ok_or_else(|| Error::Numerical("singular transport frame".into()))?;
    Ok(MonodromyRep {
        m_a: fi * raw[0] * frame,
        m_b: fi * raw[1] * frame,
        m_g1: fi * raw[2] * frame,
        m_g2: fi * raw[3] * frame,
        frame,
    })
}

/// Closed-form monodromy of a connection: periods `N1..N4` computed by
/// contour integration along the same loops.
pub fn closed_form_for(
    conn: &Rank1Connection,
    cover: &BiellipticCover,
    settings: &QuadratureSettings,
) -> Result<MonodromyRep> {
    Ok(closed_form_monodromy(&omega_periods(conn, cover, settings)?))
}

/// Transport of the scalar equation `dφ = -ω φ` on `C` along the lift of a
/// loop starting at `(ξ0, y0)`; returns `φ(end)/φ(start)`.
pub fn rank1_transport(
    conn: &Rank1Connection,
    cover: &BiellipticCover,
    path: &XPath,
    xi0: C64,
    y0: C64,
    settings: &TransportSettings,
) -> Result<C64> {
    let lifted = lift(cover, path, xi0, y0)?;
    let q = conn.qdata(cover)?;
    let mut avoid = cover.special_x().to_vec();
    if let Some(qs) = &q {
        avoid.extend(qs.iter().map(|d| d.x));
    }
    let mut phi = [C64::new(1.0, 0.0)];
    for (i, seg) in lifted.segs.iter().enumerate() {
        let s = seg.seg;
        let f = |sv: f64, v: &[C64; 1]| -> [C64; 1] {
            let (_, xi, y) = lifted.eval(i, sv);
            let dxi = -s.deriv(sv) / (xi * 2.0);
            [-conn.omega_coeff(xi, y, &q) * dxi * v[0]]
        };
        let cap = |sv: f64| -> f64 {
            let x = s.point(sv);
            let d = avoid.iter().map(|p| (x - p).norm()).fold(f64::INFINITY, f64::min);
            settings.step_fraction * d / s.deriv(sv).norm().max(1e-300)
        };
        phi = integrate(f, cap, 0.0, 1.0, phi, &settings.ode)?;
    }
    Ok(phi[0])
}

/// Fundamental matrix at the end of a path from the base.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FundamentalMatrix {
    pub phi: Mat2,
    /// `(∫ dξ/y, ∫ ξ dξ/y)` along the sheet-1 lift.
    pub z: [C64; 2],
    /// `∫ ω` along the sheet-1 and sheet-2 lifts.
    pub int_omega: [C64; 2],
    /// `(x, ξ, y)` at the end of the sheet-1 lift.
    pub end: (C64, C64, C64),
}

/// `𝚽 = ½[[e + e*, e - e*], [(e - e*)/ξ, (e + e*)/ξ]]`, where `e`, `e*` are
/// `exp(-∫ω)` along the lifts of `path` from `(ξ_b, y_b)` and from
/// `(-ξ_b, y_b)`. At the base this is `diag(1, 1/ξ_b)`.
pub fn fundamental_matrix(
    conn: &Rank1Connection,
    cover: &BiellipticCover,
    path: &XPath,
    settings: &QuadratureSettings,
) -> Result<FundamentalMatrix> {
    let (xi_b, y_b) = base_lift(cover, path.start());
    let q = conn.qdata(cover)?;
    let lifted = lift(cover, path, xi_b, y_b)?;
    let v = integrate_on_lift(
        &lifted,
        false,
        |xi, y| [conn.omega_coeff(xi, y, &q), y.inv(), xi / y],
        settings,
    )?;
    let w2 = integrate_on_lift(&lifted, true, |xi, y| [conn.omega_coeff(xi, y, &q)], settings)?;
    let end = lifted.end();
    let e = (-v[0]).exp();
    let es = (-w2[0]).exp();
    let xi = end.1;
    let phi = Mat2::new((e + es) * 0.5, (e - es) * 0.5, (e - es) / (xi * 2.0), (e + es) / (xi * 2.0));
    Ok(FundamentalMatrix { phi, z: [v[1], v[2]], int_omega: [v[0], w2[0]], end })
}

const RH_TOL: f64 = 1e-9;

/// `RH(C_triv) = (ℂ* × ℂ* ∖ S¹ × S¹) ∪ {(1, 1)}`.
pub fn rh_image_elliptic(w1: C64, w2: C64) -> Result<bool> {
    if w1.norm() < 1e-300 || w2.norm() < 1e-300 {
        return Err(Error::InvalidInput("monodromy scalars must be nonzero".into()));
    }
    let on_torus = (w1.norm() - 1.0).abs() <= RH_TOL && (w2.norm() - 1.0).abs() <= RH_TOL;
    let unit = (w1 - 1.0).norm() <= RH_TOL && (w2 - 1.0).norm() <= RH_TOL;
    Ok(!on_torus || unit)
}

/// Genus-2 criterion: `(w1 w2, w3 w4)` and `(w1/w2, w3/w4)` both lie in the
/// elliptic image.
pub fn rh_image_genus2(w: [C64; 4]) -> Result<bool> {
    if w.iter().any(|z| z.norm() < 1e-300) {
        return Err(Error::InvalidInput("monodromy scalars must be nonzero".into()));
    }
    Ok(rh_image_elliptic(w[0] * w[1], w[2] * w[3])?
        && rh_image_elliptic(w[0] / w[1], w[2] / w[3])?)
}

/// Invariants of an isomonodromy surface: `(λ1, λ2)` and `z[L] + Z λ`
/// reduced modulo the lattice spanned by the columns of `(1 | Z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsomonodromyInvariants {
    pub lambda: [C64; 2],
    pub w: [C64; 2],
    /// Real coordinates `(p, q)` with `w = p + Z q`, both in `[0, 1)²`.
    pub pq: [f64; 4],
}

/// Compute the invariants. `Z` must lie in the period locus.
pub fn isomonodromy_invariants(
    lambda: [C64; 2],
    z_l: [C64; 2],
    z: &Mat2,
) -> Result<IsomonodromyInvariants> {
    if !in_period_locus(z) {
        return Err(Error::InvalidInput("period matrix is outside the period locus".into()));
    }
    let w = [
        z_l[0] + z.m[0][0] * lambda[0] + z.m[0][1] * lambda[1],
        z_l[1] + z.m[1][0] * lambda[0] + z.m[1][1] * lambda[1],
    ];
    // Solve Im w = Im Z q, then p = Re w - Re Z q.
    let (a, b, d) = (z.m[0][0].im, z.m[0][1].im, z.m[1][1].im);
    let det = a * d - b * b;
    let q0 = (d * w[0].im - b * w[1].im) / det;
    let q1 = (-b * w[0].im + a * w[1].im) / det;
    let p0 = w[0].re - z.m[0][0].re * q0 - z.m[0][1].re * q1;
    let p1 = w[1].re - z.m[1][0].re * q0 - z.m[1][1].re * q1;
    let fr = |v: f64| {
        let f = v - v.floor();
        if f >= 1.0 - 1e-12 {
            0.0
        } else {
            f
        }
    };
    let (p0, p1, q0, q1) = (fr(p0), fr(p1), fr(q0), fr(q1));
    let wr = [
        C64::new(p0, 0.0) + z.m[0][0] * q0 + z.m[0][1] * q1,
        C64::new(p1, 0.0) + z.m[1][0] * q0 + z.m[1][1] * q1,
    ];
    Ok(IsomonodromyInvariants { lambda, w: wr, pq: [p0, p1, q0, q1] })
}

impl IsomonodromyInvariants {
    /// Same surface: equal `λ` and equal reduced `w` (torus coordinates
    /// compared with wrap-around).
    pub fn same_surface(&self, other: &IsomonodromyInvariants, tol: f64) -> bool {
        let lam = (0..2).all(|i| (self.lambda[i] - other.lambda[i]).norm() <= tol);
        let tor = (0..4).all(|i| {
            let d = (self.pq[i] - other.pq[i]).abs();
            d.min(1.0 - d) <= tol
        });
        lam && tor
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_base_point() {
        let cov = BiellipticCover::from_real(2.0, 3.0).unwrap();
        let l = standard_loops(&cov, &[]).unwrap();
        assert!((l.base - C64::new(1.0, 0.25)).norm() < 1e-14);
        assert_eq!(l.g1.winding_number(cov.tp), 1);
        assert_eq!(l.a.winding_number(cov.tp), 0);
        assert_eq!(l.b.winding_number(cov.tp), 0);
        assert_eq!(l.a.winding_number(C64::new(1.5, 0.0)), 1);
        assert_eq!(l.b.winding_number(C64::new(0.5, 0.0)), -1);
    }

    #[test]
    fn rh_examples() {
        let c = |a: f64, b: f64| C64::new(a, b);
        assert!(rh_image_elliptic(c(1.0, 0.0), c(1.0, 0.0)).unwrap());
        assert!(!rh_image_elliptic(c(0.0, 1.0), c(-1.0, 0.0)).unwrap());
        assert!(rh_image_elliptic(c(2.0, 0.0), c(0.0, 5.0)).unwrap());
        assert!(rh_image_elliptic(c(0.0, 0.0), c(1.0, 0.0)).is_err());
    }
}

//! Elementary transforms of rank-2 bundles on `E`, tracked sections of the
//! associated ruled surfaces, identification of the direct image bundle and
//! the Gabber transform at `p_+`.

use crate::connections::{direct_image_matrix, ConnectionMatrix, MatrixField, Rank1Connection, ResidueSet};
use crate::curves::{BiellipticCover, CPoint, DivisorClassE, EPoint, EllipticCurve, MEMBERSHIP_TOL, POINT_TOL};
use crate::linalg::{projective_distance, Mat2};
use crate::monodromy::{base_lift, transport_along, transport_frame, LoopSpec, MonodromyRep, TransportSettings};
use crate::{par, Error, Result, C64};

/// Incidence tolerance for projective directions.
pub const DIRECTION_TOL: f64 = 1e-9;

/// Configuration of the divisor points `q̃1, q̃2` on `C`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseLabel {
    Generic,
    /// `q̃1 + q̃2` in the hyperelliptic series.
    A,
    /// `q̃1 = q̃2` away from `∞_±` and `p̃_±`.
    B,
    /// Some `q̃_i` at infinity.
    C,
    /// Exactly one `q̃_i` at a ramification point `p̃_±`.
    D,
}

impl CaseLabel {
    pub fn name(&self) -> &'static str {
        match self {
            CaseLabel::Generic => "generic",
            CaseLabel::A => "a",
            CaseLabel::B => "b",
            CaseLabel::C => "c",
            CaseLabel::D => "d",
        }
    }
}

fn close(a: C64, b: C64) -> bool {
    (a - b).norm() <= POINT_TOL * (1.0 + a.norm().max(b.norm()))
}

fn check_on(cover: &BiellipticCover, p: &CPoint) -> Result<()> {
    if let CPoint::Affine { xi, y } = *p {
        let r = cover.residual_c(xi, y);
        if !(r <= MEMBERSHIP_TOL) {
            return Err(Error::NotOnCurve { residual: r });
        }
    }
    Ok(())
}

/// Decide which configuration `q̃1, q̃2` fall into. Predicates are checked in
/// the order (a), (c), (b), (d).
pub fn classify_points(cover: &BiellipticCover, q1: &CPoint, q2: &CPoint) -> Result<CaseLabel> {
    check_on(cover, q1)?;
    check_on(cover, q2)?;
    match (q1.coords(), q2.coords()) {
        (None, None) => {
            if q1 != q2 {
                Ok(CaseLabel::A)
            } else {
                Ok(CaseLabel::C)
            }
        }
        (None, Some(_)) | (Some(_), None) => Ok(CaseLabel::C),
        (Some((xi1, y1)), Some((xi2, y2))) => {
            if close(xi1, xi2) && close(y1, -y2) {
                return Ok(CaseLabel::A);
            }
            let ram1 = xi1.norm() <= POINT_TOL;
            let ram2 = xi2.norm() <= POINT_TOL;
            if close(xi1, xi2) && close(y1, y2) {
                if ram1 {
                    return Err(Error::NotImplemented(
                        "both divisor points at the same ramification point".into(),
                    ));
                }
                return Ok(CaseLabel::B);
            }
            if ram1 ^ ram2 {
                return Ok(CaseLabel::D);
            }
            Ok(CaseLabel::Generic)
        }
    }
}

/// A rank-2 bundle on `E` up to isomorphism.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BundleDescriptor {
    DirectSum(DivisorClassE, DivisorClassE),
    /// The unique stable bundle with the given determinant (odd degree).
    AtiyahStable(DivisorClassE),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Stable,
    StrictlySemistable,
    Unstable,
}

impl Stability {
    pub fn name(&self) -> &'static str {
        match self {
            Stability::Stable => "stable",
            Stability::StrictlySemistable => "strictly_semistable",
            Stability::Unstable => "unstable",
        }
    }
}

impl BundleDescriptor {
    pub fn atiyah(det: DivisorClassE) -> Result<Self> {
        if det.degree % 2 == 0 {
            return Err(Error::InvalidInput(format!(
                "an indecomposable stable bundle needs odd degree, got {}",
                det.degree
            )));
        }
        Ok(BundleDescriptor::AtiyahStable(det))
    }

    pub fn degree(&self) -> i64 {
        match self {
            BundleDescriptor::DirectSum(a, b) => a.degree + b.degree,
            BundleDescriptor::AtiyahStable(d) => d.degree,
        }
    }

    pub fn det(&self, curve: &EllipticCurve) -> DivisorClassE {
        match self {
            BundleDescriptor::DirectSum(a, b) => a.add(curve, b),
            BundleDescriptor::AtiyahStable(d) => *d,
        }
    }

    /// Index of the ruled surface: `-|deg L1 - deg L2|` for a direct sum,
    /// `1` for the stable odd-degree bundle.
    pub fn index(&self) -> i64 {
        match self {
            BundleDescriptor::DirectSum(a, b) => -(a.degree - b.degree).abs(),
            BundleDescriptor::AtiyahStable(_) => 1,
        }
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        match (self, other) {
            (BundleDescriptor::DirectSum(a, b), BundleDescriptor::DirectSum(c, d)) => {
                (a.approx_eq(c, tol) && b.approx_eq(d, tol))
                    || (a.approx_eq(d, tol) && b.approx_eq(c, tol))
            }
            (BundleDescriptor::AtiyahStable(a), BundleDescriptor::AtiyahStable(b)) => {
                a.approx_eq(b, tol)
            }
            _ => false,
        }
    }
}

pub fn stability(b: &BundleDescriptor) -> Stability {
    match b {
        BundleDescriptor::DirectSum(l1, l2) => {
            if l1.degree == l2.degree {
                Stability::StrictlySemistable
            } else {
                Stability::Unstable
            }
        }
        BundleDescriptor::AtiyahStable(_) => Stability::Stable,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElmSign {
    Plus,
    Minus,
}

impl ElmSign {
    fn sign(&self) -> i64 {
        match self {
            ElmSign::Plus => 1,
            ElmSign::Minus => -1,
        }
    }
}

/// Center `(p, v)` of an elementary transform; `v` is a direction in the
/// fiber over `p` in the basis `(1, ξ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElmCenter {
    pub p: EPoint,
    pub v: [C64; 2],
}

impl ElmCenter {
    pub fn new(p: EPoint, v: [C64; 2]) -> Result<Self> {
        if v[0].norm() + v[1].norm() == 0.0 || !(v[0].is_finite() && v[1].is_finite()) {
            return Err(Error::InvalidInput("elm direction must be a nonzero vector".into()));
        }
        Ok(ElmCenter { p, v })
    }
}

/// `deg ± 1`, `det ⊗ O(±p)`.
pub fn elm_degree_det(
    curve: &EllipticCurve,
    det: &DivisorClassE,
    center: &ElmCenter,
    sign: ElmSign,
) -> DivisorClassE {
    det.twist(curve, sign.sign(), &center.p)
}

/// Ordered elementary transforms with the running determinant.
#[derive(Debug, Clone, PartialEq)]
pub struct ElmHistory {
    pub start: DivisorClassE,
    pub steps: Vec<(ElmCenter, ElmSign)>,
    pub det: DivisorClassE,
}

impl ElmHistory {
    pub fn new(start: DivisorClassE) -> Self {
        ElmHistory { start, steps: Vec::new(), det: start }
    }

    pub fn push(&mut self, curve: &EllipticCurve, center: ElmCenter, sign: ElmSign) {
        self.det = elm_degree_det(curve, &self.det, &center, sign);
        self.steps.push((center, sign));
    }

    pub fn degree(&self) -> i64 {
        self.det.degree
    }
}

/// A section of a ruled surface `P(E)`, recorded through the line subbundle
/// it corresponds to.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackedSection {
    pub label: String,
    pub class: DivisorClassE,
    pub self_int: i64,
    /// Fiber direction in the basis `(1, ξ)`, valid away from `∞` and from
    /// the points already modified.
    pub direction: [C64; 2],
    /// For each point where the fibers differ from the starting model, an
    /// identifier of the fiber point the section passes through.
    marks: Vec<(EPoint, u64)>,
}

impl TrackedSection {
    pub fn new(label: &str, class: DivisorClassE, self_int: i64, direction: [C64; 2]) -> Self {
        TrackedSection { label: label.into(), class, self_int, direction, marks: Vec::new() }
    }

    /// Direction at `p`, or `None` where the starting trivialisation no
    /// longer applies.
    pub fn direction_at(&self, p: &EPoint) -> Option<[C64; 2]> {
        if p.is_infinity() || self.mark_at(p).is_some() {
            None
        } else {
            Some(self.direction)
        }
    }

    fn mark_at(&self, p: &EPoint) -> Option<u64> {
        self.marks.iter().find(|(q, _)| q.approx_eq(p, POINT_TOL)).map(|m| m.1)
    }

    fn set_mark(&mut self, p: &EPoint, id: u64) {
        if let Some(m) = self.marks.iter_mut().find(|(q, _)| q.approx_eq(p, POINT_TOL)) {
            m.1 = id;
        } else {
            self.marks.push((*p, id));
        }
    }

    /// True when the two sections never meet.
    pub fn disjoint_from(&self, other: &TrackedSection) -> bool {
        if projective_distance(self.direction, other.direction) < DIRECTION_TOL {
            return false;
        }
        !self
            .marks
            .iter()
            .any(|(p, id)| other.mark_at(p) == Some(*id))
    }
}

/// Self-intersection and line class after an elementary transform.
pub fn elm_update_section(
    curve: &EllipticCurve,
    s: &TrackedSection,
    center: &ElmCenter,
    sign: ElmSign,
    incident: bool,
) -> TrackedSection {
    let mut out = s.clone();
    match (sign, incident) {
        (ElmSign::Plus, true) => {
            out.self_int -= 1;
            out.class = s.class.twist(curve, 1, &center.p);
        }
        (ElmSign::Plus, false) => out.self_int += 1,
        (ElmSign::Minus, true) => out.self_int -= 1,
        (ElmSign::Minus, false) => {
            out.self_int += 1;
            out.class = s.class.twist(curve, -1, &center.p);
        }
    }
    out
}

/// How a step of a ruled-model run names its center in the fiber.
#[derive(Debug, Clone, PartialEq)]
pub enum StepDirection {
    /// Explicit direction in the basis `(1, ξ)` (only at untouched points).
    Vector([C64; 2]),
    /// The point where the named tracked section meets the fiber.
    OnSection(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunStep {
    pub p: EPoint,
    pub sign: ElmSign,
    pub direction: StepDirection,
}

/// Outcome of a ruled-model run.
#[derive(Debug, Clone, PartialEq)]
pub struct RuledRun {
    pub sections: Vec<TrackedSection>,
    /// Minimum self-intersection over the tracked sections.
    pub index_bound: i64,
    pub det: DivisorClassE,
    /// Line classes of a disjoint pair of tracked sections, when one exists.
    pub decomposition: Option<(DivisorClassE, DivisorClassE)>,
    /// `self_int = deg det - 2 deg class` held for every section after every step.
    pub consistent: bool,
}

const GENERIC_PENCIL_C: C64 = C64::new(0.317_243, 0.271_419);

/// Run elementary transforms on `P(E0(-∞))`, `E0(-∞) = O(-∞) ⊕ O(-2∞)`, and
/// track `s̄1`, `s̄2`, a generic member of the pencil `|s̄1 + f_∞|` and the
/// pencil member through each explicitly given center (labelled `p1`,
/// `p2`, ... by step). All pencil members meet `s̄2` over `∞`.
pub fn ruled_model_run(curve: &EllipticCurve, steps: &[RunStep]) -> Result<RuledRun> {
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let minus_inf = DivisorClassE::multiple_of_infinity(-1);
    let minus_2inf = DivisorClassE::multiple_of_infinity(-2);
    let mut sections = vec![
        TrackedSection::new("s1", minus_inf, -1, [one, zero]),
        TrackedSection::new("s2", minus_2inf, 1, [zero, one]),
        TrackedSection::new("generic", minus_2inf, 1, [GENERIC_PENCIL_C, one]),
    ];
    for (k, st) in steps.iter().enumerate() {
        if let StepDirection::Vector(v) = &st.direction {
            if v[1].norm() > DIRECTION_TOL * v[0].norm() {
                let c = v[0] / v[1];
                sections.push(TrackedSection::new(&format!("p{}", k + 1), minus_2inf, 1, [c, one]));
            }
        }
    }
    let inf = EPoint::Infinity;
    for s in sections.iter_mut() {
        let id = if s.label == "s1" { 1 } else { 0 };
        s.set_mark(&inf, id);
    }
    let mut det = DivisorClassE::multiple_of_infinity(-3);
    let mut consistent = true;
    for (k, st) in steps.iter().enumerate() {
        let touched = sections[0].mark_at(&st.p).is_some();
        let incident: Vec<bool> = match &st.direction {
            StepDirection::Vector(v) => {
                if touched {
                    return Err(Error::InvalidInput(format!(
                        "step {}: center at a previously modified point needs a section-relative direction",
                        k + 1
                    )));
                }
                sections
                    .iter()
                    .map(|s| projective_distance(s.direction, *v) < DIRECTION_TOL)
                    .collect()
            }
            StepDirection::OnSection(label) => {
                let target = sections
                    .iter()
                    .find(|s| &s.label == label)
                    .ok_or_else(|| Error::InvalidInput(format!("no tracked section {label}")))?
                    .clone();
                match target.mark_at(&st.p) {
                    Some(id) => sections.iter().map(|s| s.mark_at(&st.p) == Some(id)).collect(),
                    None => sections
                        .iter()
                        .map(|s| projective_distance(s.direction, target.direction) < DIRECTION_TOL)
                        .collect(),
                }
            }
        };
        let center = ElmCenter { p: st.p, v: [one, zero] };
        det = elm_degree_det(curve, &det, &center, st.sign);
        let (id_in, id_out) = (2 * k as u64 + 2, 2 * k as u64 + 3);
        for (s, inc) in sections.iter_mut().zip(&incident) {
            let mut u = elm_update_section(curve, s, &center, st.sign, *inc);
            u.set_mark(&st.p, if *inc { id_in } else { id_out });
            if u.self_int != det.degree - 2 * u.class.degree {
                consistent = false;
            }
            *s = u;
        }
    }
    let index_bound = sections.iter().map(|s| s.self_int).min().unwrap();
    let mut best: Option<(i64, usize, usize)> = None;
    for i in 0..sections.len() {
        for j in i + 1..sections.len() {
            if sections[i].disjoint_from(&sections[j]) {
                let w = sections[i].self_int.abs().max(sections[j].self_int.abs());
                if best.is_none_or(|b| w < b.0) {
                    best = Some((w, i, j));
                }
            }
        }
    }
    let decomposition = best.map(|(_, i, j)| (sections[i].class, sections[j].class));
    Ok(RuledRun { sections, index_bound, det, decomposition, consistent })
}

/// The two `elm⁺` steps building the direct image from `E0(-∞)`: centers
/// `[q_i, (-ξ_i, 1)]`. When `q̃1 = q̃2` the second center is the point where
/// the pencil member through the first center meets the new fiber.
pub fn two_elm_steps(cover: &BiellipticCover, q1: &CPoint, q2: &CPoint) -> Result<Vec<RunStep>> {
    let case = classify_points(cover, q1, q2)?;
    let (xi1, _) = q1
        .coords()
        .ok_or_else(|| Error::NotImplemented("ruled-model run with a point at infinity".into()))?;
    let (xi2, _) = q2
        .coords()
        .ok_or_else(|| Error::NotImplemented("ruled-model run with a point at infinity".into()))?;
    let one = C64::new(1.0, 0.0);
    let p1 = cover.cover_map(q1)?;
    let p2 = cover.cover_map(q2)?;
    let first = RunStep { p: p1, sign: ElmSign::Plus, direction: StepDirection::Vector([-xi1, one]) };
    let second = if case == CaseLabel::B {
        RunStep { p: p2, sign: ElmSign::Plus, direction: StepDirection::OnSection("p1".into()) }
    } else if p1.approx_eq(&p2, POINT_TOL) {
        // Galois-conjugate lifts over one point of E: the second center is
        // the other eigendirection, which lies on no tracked section.
        return Err(Error::NotImplemented(
            "ruled-model run with both centers over one point and distinct directions".into(),
        ));
    } else {
        RunStep { p: p2, sign: ElmSign::Plus, direction: StepDirection::Vector([-xi2, one]) }
    };
    Ok(vec![first, second])
}

/// Identify `f_* L` for `L = O_C(q̃1 + q̃2 - ∞_+ - ∞_-)`.
pub fn identify_direct_image(
    cover: &BiellipticCover,
    q1: &CPoint,
    q2: &CPoint,
) -> Result<(BundleDescriptor, CaseLabel)> {
    let case = classify_points(cover, q1, q2)?;
    let curve = cover.curve();
    let e1 = cover.cover_map(q1)?;
    let e2 = cover.cover_map(q2)?;
    let desc = match case {
        CaseLabel::A => BundleDescriptor::DirectSum(
            DivisorClassE::trivial(),
            DivisorClassE::multiple_of_infinity(-1),
        ),
        CaseLabel::B => BundleDescriptor::DirectSum(
            DivisorClassE::multiple_of_infinity(-1),
            DivisorClassE::from_divisor(&curve, &[(2, e1), (-2, EPoint::Infinity)])?,
        ),
        CaseLabel::C => {
            let other = if q1.is_infinite() { e2 } else { e1 };
            BundleDescriptor::DirectSum(
                DivisorClassE::from_divisor(&curve, &[(1, other), (-2, EPoint::Infinity)])?,
                DivisorClassE::trivial(),
            )
        }
        CaseLabel::D | CaseLabel::Generic => {
            let mut h = ElmHistory::new(DivisorClassE::multiple_of_infinity(-3));
            let one = C64::new(1.0, 0.0);
            for (q, e) in [(q1, e1), (q2, e2)] {
                let xi = q.coords().unwrap().0;
                h.push(&curve, ElmCenter::new(e, [-xi, one])?, ElmSign::Plus);
            }
            BundleDescriptor::atiyah(h.det)?
        }
    };
    Ok((desc, case))
}

/// The point `q1 ⊕ q2` representing `[q1 + q2 - 2∞]` in `Pic⁰(E) ≅ E`.
pub fn moduli_image(cover: &BiellipticCover, q1: &CPoint, q2: &CPoint) -> Result<EPoint> {
    let case = classify_points(cover, q1, q2)?;
    match case {
        CaseLabel::Generic | CaseLabel::D => {
            let curve = cover.curve();
            Ok(curve.add(&cover.cover_map(q1)?, &cover.cover_map(q2)?))
        }
        _ => Err(Error::Degenerate(format!(
            "case ({}) gives an unstable bundle; no point of the moduli space",
            case.name()
        ))),
    }
}

/// Local comparison of a bundle with the lattice of flat sections at an
/// apparent singularity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StalkChange {
    /// Eigenvalues `(1, 0)`: `elm⁺` along the eigenvector of `1`.
    ElmPlus { v: [C64; 2] },
    /// Eigenvalues `(-1, 0)`: `elm⁻` along the eigenvector of `0`.
    ElmMinus { v: [C64; 2] },
    /// Scalar residue `n`: twist by `n·p`.
    Twist { n: i64 },
    /// Other integer pairs, a composite of the above.
    Composite { n: [i64; 2], v: [[C64; 2]; 2] },
}

pub fn stalk_change_from_residues(r: &Mat2) -> Result<StalkChange> {
    let tol = 1e-8 * (1.0 + r.max_abs());
    let ev = r.eigenvalues();
    let mut n = [0i64; 2];
    for (k, e) in ev.iter().enumerate() {
        let rn = e.re.round();
        if (e - C64::new(rn, 0.0)).norm() > tol {
            return Err(Error::Degenerate(format!(
                "residue eigenvalue {e} is not an integer; the pole is not apparent"
            )));
        }
        n[k] = rn as i64;
    }
    if n[0] == n[1] {
        let scalar = Mat2::identity().scale(C64::new(n[0] as f64, 0.0));
        if r.max_diff(&scalar) > tol {
            return Err(Error::Degenerate("residue is not diagonalizable".into()));
        }
        return Ok(StalkChange::Twist { n: n[0] });
    }
    let vec_for = |k: i64| r.eigenvector(C64::new(k as f64, 0.0));
    let pair = (n[0].max(n[1]), n[0].min(n[1]));
    Ok(match pair {
        (1, 0) => StalkChange::ElmPlus { v: vec_for(1) },
        (0, -1) => StalkChange::ElmMinus { v: vec_for(0) },
        (a, b) => StalkChange::Composite { n: [a, b], v: [vec_for(a), vec_for(b)] },
    })
}

/// Result of the Gabber transform at `p_+`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GabberResult {
    pub bundle: BundleDescriptor,
    /// `det E + [p_+]` obtained from the elm history of the stable bundle.
    pub det_from_history: DivisorClassE,
    /// Eigenvector of `Res_{p+}` for the eigenvalue `1/2`.
    pub v: [C64; 2],
    pub eigen_before: [C64; 2],
    pub eigen_after: [C64; 2],
    /// Residues after the transform; only the entry at `p_+` changes.
    pub residues_after: ResidueSet,
}

/// `elm⁺_{p+, v}` of the stable direct image, `v` the `1/2`-eigenvector of
/// `Res_{p+}`.
pub fn gabber_transform(
    cover: &BiellipticCover,
    q1: &CPoint,
    q2: &CPoint,
    residues: &ResidueSet,
) -> Result<GabberResult> {
    let (desc, case) = identify_direct_image(cover, q1, q2)?;
    if case != CaseLabel::Generic {
        return Err(Error::InvalidInput(format!(
            "the Gabber transform needs the generic configuration, got case ({})",
            case.name()
        )));
    }
    let r = residues
        .at_p_plus
        .ok_or_else(|| Error::InvalidInput("missing residue at p+".into()))?;
    let ev = r.eigenvalues();
    let half = C64::new(0.5, 0.0);
    let k = (0..2)
        .find(|&k| (ev[k] - half).norm() < 1e-8)
        .ok_or_else(|| Error::InvalidInput("Res_{p+} has no eigenvalue 1/2".into()))?;
    let v = r.eigenvector(half);
    let other = ev[1 - k];
    // In a basis (v, w) with w an eigenvector of the other eigenvalue the
    // transform replaces 1/2 by -1/2; the spectral projector onto v is
    // (R - other)/(1/2 - other).
    let proj = (r - Mat2::identity().scale(other)).scale((half - other).inv());
    let r_after = r - proj;
    let curve = cover.curve();
    let mut h = ElmHistory::new(desc.det(&curve));
    h.push(&curve, ElmCenter::new(cover.p_plus(), v)?, ElmSign::Plus);
    let e1 = cover.cover_map(q1)?;
    let e2 = cover.cover_map(q2)?;
    let bundle = BundleDescriptor::DirectSum(
        DivisorClassE::from_divisor(&curve, &[(1, cover.p_plus()), (-1, EPoint::Infinity)])?,
        DivisorClassE::from_divisor(&curve, &[(1, e1), (1, e2), (-2, EPoint::Infinity)])?,
    );
    let mut residues_after = *residues;
    residues_after.at_p_plus = Some(r_after);
    Ok(GabberResult {
        bundle,
        det_from_history: h.det,
        v,
        eigen_before: ev,
        eigen_after: r_after.eigenvalues(),
        residues_after,
    })
}

/// The direct-image connection in the rational frame `(e1, e2/h)` with
/// `h = (x - t')/(y + y0)`, which vanishes simply at `p_+`. The frame change
/// performs `elm⁺` at `p_+` along `e2`; it also has a zero at `∞` and poles
/// at the two points `r1, r2` with `y = -y0`, where the new matrix acquires
/// apparent singularities with integer residues.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GabberGauge {
    pub base: ConnectionMatrix,
    /// Abscissae of `r1, r2`.
    pub r_x: [C64; 2],
}

impl GabberGauge {
    pub fn new(base: ConnectionMatrix) -> Self {
        let (t, tp) = (base.cover.t, base.cover.tp);
        // x(x-1)(x-t) - y0² = (x - t')(x² + b x + c).
        let b = tp - 1.0 - t;
        let c = tp * tp - (t + 1.0) * tp + t;
        let d = (b * b - c * 4.0).sqrt();
        GabberGauge { base, r_x: [(-b + d) * 0.5, (-b - d) * 0.5] }
    }

    pub fn h(&self, x: C64, y: C64) -> C64 {
        (x - self.base.cover.tp) / (y + self.base.cover.y0)
    }

    fn dh_dx(&self, x: C64, y: C64) -> C64 {
        let cov = &self.base.cover;
        let dy = cov.curve().rhs_deriv(x) / (y * 2.0);
        let den = y + cov.y0;
        (den - (x - cov.tp) * dy) / (den * den)
    }
}

impl MatrixField for GabberGauge {
    fn cover(&self) -> &BiellipticCover {
        &self.base.cover
    }

    /// `g⁻¹ A g + g⁻¹ dg/dx` with `g = diag(1, 1/h)`.
    fn eval(&self, x: C64, y: C64) -> Mat2 {
        let a = self.base.eval(x, y);
        let h = self.h(x, y);
        let dh = self.dh_dx(x, y);
        Mat2::new(a.m[0][0], a.m[0][1] / h, a.m[1][0] * h, a.m[1][1] - dh / h)
    }

    fn avoid_x(&self) -> Vec<C64> {
        let mut v = self.base.avoid_x();
        v.extend_from_slice(&self.r_x);
        v
    }
}

/// Extra abscissae the loops must avoid when transporting the gauged matrix.
pub fn gabber_extra_x(cover: &BiellipticCover) -> Vec<C64> {
    let m = ConnectionMatrix {
        cover: *cover,
        lambda1: C64::new(0.0, 0.0),
        lambda2: C64::new(0.0, 0.0),
        q: None,
        case: None,
    };
    GabberGauge::new(m).r_x.to_vec()
}

/// Monodromy of the Gabber-transformed connection, transported in the frame
/// `g(b)⁻¹ F` where `F` is the usual transport frame.
pub fn gabber_monodromy(
    conn: &Rank1Connection,
    cover: &BiellipticCover,
    loops: &LoopSpec,
    settings: &TransportSettings,
) -> Result<MonodromyRep> {
    settings.validate()?;
    let gauge = GabberGauge::new(direct_image_matrix(conn, cover)?);
    let (xi_b, y_b) = base_lift(cover, loops.base);
    let paths = loops.loops().to_vec();
    let raw: Vec<Mat2> = par::map(&paths, |p| transport_along(&gauge, p, xi_b, y_b, settings))
        .into_iter()
        .collect::<Result<_>>()?;
    let f = transport_frame(conn, cover, loops, &settings.quadrature)?;
    let hb = gauge.h(loops.base, y_b);
    let frame = Mat2::diag(C64::new(1.0, 0.0), hb) * f;
    let fi = frame
        .inverse()
        .ok_or_else(|| Error::Numerical("singular transport frame".into()))?;
    Ok(MonodromyRep {
        m_a: fi * raw[0] * frame,
        m_b: fi * raw[1] * frame,
        m_g1: fi * raw[2] * frame,
        m_g2: fi * raw[3] * frame,
        frame,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cov() -> BiellipticCover {
        BiellipticCover::from_real(2.0, 3.0).unwrap()
    }

    #[test]
    fn elm_plus_then_minus_restores_det() {
        let c = cov().curve();
        let p = c.point_at(C64::new(0.5, 0.3));
        let e = ElmCenter::new(p, [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]).unwrap();
        let d0 = DivisorClassE::multiple_of_infinity(-3);
        let d1 = elm_degree_det(&c, &d0, &e, ElmSign::Plus);
        let d2 = elm_degree_det(&c, &d1, &e, ElmSign::Minus);
        assert_eq!(d1.degree, -2);
        assert!(d2.approx_eq(&d0, 1e-9));
    }

    #[test]
    fn stalk_cases() {
        let z = C64::new(0.0, 0.0);
        let h = C64::new(0.5, 0.0);
        let xi = C64::new(0.7, 0.2);
        let r = Mat2::new(h, xi * 0.5, h / xi, h).scale(C64::new(2.0, 0.0));
        match stalk_change_from_residues(&Mat2::new(h, xi * 0.5, h / xi, h)).unwrap() {
            StalkChange::ElmPlus { v } => assert!(projective_distance(v, [xi, C64::new(1.0, 0.0)]) < 1e-9),
            o => panic!("{o:?}"),
        }
        assert!(matches!(
            stalk_change_from_residues(&r).unwrap(),
            StalkChange::Composite { n: [2, 0], .. }
        ));
        assert!(matches!(
            stalk_change_from_residues(&Mat2::diag(C64::new(-1.0, 0.0), z)).unwrap(),
            StalkChange::ElmMinus { .. }
        ));
        assert!(stalk_change_from_residues(&Mat2::diag(h, z)).is_err());
        assert!(stalk_change_from_residues(&Mat2::new(z, C64::new(1.0, 0.0), z, z)).is_err());
    }
}

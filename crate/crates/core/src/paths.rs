//! Piecewise paths in the `x`-plane and their lifts to `E` and `C` by
//! continuous tracking of `y = sqrt(x(x-1)(x-t))` and `ξ = sqrt(t'-x)`.

use crate::curves::BiellipticCover;
use crate::{Error, Result, C64};
use std::f64::consts::PI;

/// A line segment or circular arc, parametrised by `s ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Seg {
    Line { a: C64, b: C64 },
    Arc { c: C64, r: f64, th0: f64, dth: f64 },
}

impl Seg {
    pub fn point(&self, s: f64) -> C64 {
        match *self {
            Seg::Line { a, b } => a + (b - a) * s,
            Seg::Arc { c, r, th0, dth } => c + C64::from_polar(r, th0 + dth * s),
        }
    }

    pub fn deriv(&self, s: f64) -> C64 {
        match *self {
            Seg::Line { a, b } => b - a,
            Seg::Arc { r, th0, dth, .. } => {
                C64::from_polar(r, th0 + dth * s) * C64::new(0.0, dth)
            }
        }
    }

    pub fn length(&self) -> f64 {
        match *self {
            Seg::Line { a, b } => (b - a).norm(),
            Seg::Arc { r, dth, .. } => r * dth.abs(),
        }
    }

    pub fn reversed(&self) -> Seg {
        match *self {
            Seg::Line { a, b } => Seg::Line { a: b, b: a },
            Seg::Arc { c, r, th0, dth } => Seg::Arc { c, r, th0: th0 + dth, dth: -dth },
        }
    }

    /// Minimum distance from the segment to `z`, estimated on a fine sample.
    pub fn distance_to(&self, z: C64) -> f64 {
        match *self {
            Seg::Line { a, b } => {
                let d = b - a;
                let l2 = d.norm_sqr();
                let s = if l2 == 0.0 { 0.0 } else { (((z - a) * d.conj()).re / l2).clamp(0.0, 1.0) };
                (a + d * s - z).norm()
            }
            Seg::Arc { .. } => (0..=256)
                .map(|k| (self.point(k as f64 / 256.0) - z).norm())
                .fold(f64::INFINITY, f64::min),
        }
    }
}

/// A concatenation of segments.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct XPath {
    pub segs: Vec<Seg>,
}

impl XPath {
    pub fn new(segs: Vec<Seg>) -> Self {
        XPath { segs }
    }

    pub fn start(&self) -> C64 {
        self.segs[0].point(0.0)
    }

    pub fn end(&self) -> C64 {
        self.segs[self.segs.len() - 1].point(1.0)
    }

    pub fn reversed(&self) -> XPath {
        XPath { segs: self.segs.iter().rev().map(|s| s.reversed()).collect() }
    }

    pub fn then(&self, other: &XPath) -> XPath {
        let mut segs = self.segs.clone();
        segs.extend_from_slice(&other.segs);
        XPath { segs }
    }

    /// Polyline through consecutive vertices.
    pub fn polyline(pts: &[C64]) -> XPath {
        XPath {
            segs: pts.windows(2).map(|w| Seg::Line { a: w[0], b: w[1] }).collect(),
        }
    }

    pub fn length(&self) -> f64 {
        self.segs.iter().map(|s| s.length()).sum()
    }

    pub fn is_closed(&self, tol: f64) -> bool {
        (self.start() - self.end()).norm() <= tol
    }

    pub fn distance_to(&self, z: C64) -> f64 {
        self.segs.iter().map(|s| s.distance_to(z)).fold(f64::INFINITY, f64::min)
    }

    /// Winding number of a closed path around `z`.
    pub fn winding_number(&self, z: C64) -> i64 {
        let mut total = 0.0;
        for seg in &self.segs {
            let n = 512;
            let mut prev = seg.point(0.0) - z;
            for k in 1..=n {
                let cur = seg.point(k as f64 / n as f64) - z;
                total += (cur / prev).arg();
                prev = cur;
            }
        }
        (total / (2.0 * PI)).round() as i64
    }

    /// Sample points along the path (endpoints included), `per_seg` per segment.
    pub fn sample(&self, per_seg: usize) -> Vec<C64> {
        let mut out = Vec::new();
        for seg in &self.segs {
            for k in 0..per_seg {
                out.push(seg.point(k as f64 / per_seg as f64));
            }
        }
        out.push(self.end());
        out
    }
}

/// Values of `(ξ, y)` on one lifted segment at grid parameters.
#[derive(Debug, Clone)]
pub struct LiftedSeg {
    pub seg: Seg,
    grid: Vec<f64>,
    xi: Vec<C64>,
    y: Vec<C64>,
}

/// A path in the `x`-plane together with continuous branches of `ξ` and `y`.
#[derive(Debug, Clone)]
pub struct LiftedPath {
    pub segs: Vec<LiftedSeg>,
    pub tp: C64,
    pub t: C64,
}

fn nearest(root: C64, pred: C64) -> C64 {
    if (root - pred).norm() <= (root + pred).norm() {
        root
    } else {
        -root
    }
}

/// Continue `y` and `ξ` along `path` from the initial values `(xi0, y0)` at
/// `path.start()`. The path must stay away from `{0, 1, t, t'}`.
pub fn lift(cover: &BiellipticCover, path: &XPath, xi0: C64, y0: C64) -> Result<LiftedPath> {
    let curve = cover.curve();
    let branch = cover.special_x();
    let mut xi_prev = xi0;
    let mut y_prev = y0;
    let x_start = path.start();
    if (xi0 * xi0 - (cover.tp - x_start)).norm() > 1e-8 * (1.0 + x_start.norm())
        || curve.residual(x_start, y0) > 1e-8
    {
        return Err(Error::InvalidInput("initial lift values do not match the start point".into()));
    }
    let mut out = Vec::with_capacity(path.segs.len());
    for seg in &path.segs {
        let clearance = branch.iter().map(|&b| seg.distance_to(b)).fold(f64::INFINITY, f64::min);
        if clearance < 1e-6 {
            return Err(Error::PoleOnPath(format!(
                "segment passes within {clearance:e} of a branch value"
            )));
        }
        let n = ((seg.length() / (clearance / 16.0)).ceil() as usize).clamp(16, 200_000);
        let mut grid = Vec::with_capacity(n + 1);
        let mut xs = Vec::with_capacity(n + 1);
        let mut ys = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let s = k as f64 / n as f64;
            let x = seg.point(s);
            let (pxi, py) = if k >= 2 {
                (xs[k - 1] * 2.0 - xs[k - 2], ys[k - 1] * 2.0 - ys[k - 2])
            } else if k == 1 {
                (xs[0], ys[0])
            } else {
                (xi_prev, y_prev)
            };
            let xi = nearest((cover.tp - x).sqrt(), pxi);
            let y = nearest(curve.rhs(x).sqrt(), py);
            grid.push(s);
            xs.push(xi);
            ys.push(y);
        }
        xi_prev = *xs.last().unwrap();
        y_prev = *ys.last().unwrap();
        out.push(LiftedSeg { seg: *seg, grid, xi: xs, y: ys });
    }
    Ok(LiftedPath { segs: out, tp: cover.tp, t: cover.t })
}

impl LiftedSeg {
    /// `(x, ξ, y)` at parameter `s`, branches chosen next to the tracked grid.
    pub fn eval(&self, s: f64) -> (C64, C64, C64) {
        let x = self.seg.point(s);
        let n = self.grid.len() - 1;
        let pos = (s * n as f64).clamp(0.0, n as f64);
        let k = (pos.floor() as usize).min(n.saturating_sub(1));
        let w = pos - k as f64;
        let pxi = self.xi[k] * (1.0 - w) + self.xi[k + 1] * w;
        let py = self.y[k] * (1.0 - w) + self.y[k + 1] * w;
        (x, pxi, py)
    }
}

impl LiftedPath {
    /// `(x, ξ, y)` on segment `i` at parameter `s`.
    pub fn eval(&self, i: usize, s: f64) -> (C64, C64, C64) {
        let (x, pxi, py) = self.segs[i].eval(s);
        let xi = nearest((self.tp - x).sqrt(), pxi);
        let y = nearest((x * (x - 1.0) * (x - self.t)).sqrt(), py);
        (x, xi, y)
    }

    pub fn start(&self) -> (C64, C64, C64) {
        self.eval(0, 0.0)
    }

    pub fn end(&self) -> (C64, C64, C64) {
        self.eval(self.segs.len() - 1, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_winding_and_sheet_change() {
        let cov = BiellipticCover::from_real(2.0, 3.0).unwrap();
        let c = C64::new(2.0, 0.0);
        let path = XPath::new(vec![Seg::Arc { c, r: 0.4, th0: 0.0, dth: 2.0 * PI }]);
        assert_eq!(path.winding_number(c), 1);
        assert_eq!(path.winding_number(C64::new(3.0, 0.0)), 0);
        let x0 = path.start();
        let y0 = cov.curve().rhs(x0).sqrt();
        let xi0 = (cov.tp - x0).sqrt();
        let l = lift(&cov, &path, xi0, y0).unwrap();
        let (_, xi1, y1) = l.end();
        // A loop around one branch value of y flips y but not ξ.
        assert!((y1 + y0).norm() < 1e-10);
        assert!((xi1 - xi0).norm() < 1e-10);
    }
}

//! One-dimensional quadrature.
//!
//! Two independent rules for integrals with inverse square-root endpoint
//! behaviour: double-exponential (tanh-sinh) quadrature applied directly, and
//! the substitution `ξ = m + h cos θ` followed by adaptive Gauss-Legendre.
//! Smooth path integrals use adaptive Gauss-Legendre.

use crate::{Error, Result, C64};
use std::f64::consts::{FRAC_PI_2, PI};

/// Which endpoint-singular rule to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    TanhSinh,
    /// Cosine substitution plus Gauss-Legendre.
    ChebyshevGauss,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::TanhSinh => "tanh-sinh",
            Method::ChebyshevGauss => "chebyshev-gauss",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSettings {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    pub method: Method,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        QuadratureSettings {
            abs_tol: 1e-14,
            rel_tol: 1e-13,
            max_subdivisions: 4000,
            method: Method::TanhSinh,
        }
    }
}

impl QuadratureSettings {
    pub fn with_method(self, method: Method) -> Self {
        QuadratureSettings { method, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0 && self.max_subdivisions > 0) {
            return Err(Error::InvalidInput("quadrature tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p1 = z;
                p0 = 1.0;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Fixed-order rule cache for the adaptive integrator.
struct Rule {
    x: Vec<f64>,
    w: Vec<f64>,
}

thread_local! {
    static RULES: (Rule, Rule) = {
        let (x, w) = gauss_legendre_rule(15);
        let (x2, w2) = gauss_legendre_rule(30);
        (Rule { x, w }, Rule { x: x2, w: w2 })
    };
}

fn apply_rule<const N: usize, F: Fn(f64) -> [C64; N]>(rule: &Rule, f: &F, a: f64, b: f64) -> [C64; N] {
    let h = 0.5 * (b - a);
    let m = 0.5 * (a + b);
    let mut s = [C64::new(0.0, 0.0); N];
    for (xi, wi) in rule.x.iter().zip(&rule.w) {
        let v = f(m + h * xi);
        for k in 0..N {
            s[k] += v[k] * *wi;
        }
    }
    for v in s.iter_mut() {
        *v *= h;
    }
    s
}

fn vnorm<const N: usize>(v: &[C64; N]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Adaptive Gauss-Legendre on [a, b] for a smooth complex integrand.
/// Each panel compares a 15-point and a 30-point rule and is bisected until
/// they agree.
pub fn adaptive_gl<F: Fn(f64) -> C64>(
    f: F,
    a: f64,
    b: f64,
    settings: &QuadratureSettings,
) -> Result<C64> {
    adaptive_gl_n(|x| [f(x)], a, b, settings).map(|v| v[0])
}

/// Vector-valued [`adaptive_gl`]; panels are refined until every component
/// converges.
pub fn adaptive_gl_n<const N: usize, F: Fn(f64) -> [C64; N]>(
    f: F,
    a: f64,
    b: f64,
    settings: &QuadratureSettings,
) -> Result<[C64; N]> {
    RULES.with(|(lo, hi)| {
        let mut stack = vec![(a, b)];
        let mut total = [C64::new(0.0, 0.0); N];
        let mut panels = 0usize;
        let whole = vnorm(&apply_rule(hi, &f, a, b));
        while let Some((l, r)) = stack.pop() {
            let c = apply_rule(lo, &f, l, r);
            let fine = apply_rule(hi, &f, l, r);
            if !fine.iter().all(|z| z.is_finite()) {
                return Err(Error::Numerical("non-finite integrand".into()));
            }
            let share = (r - l) / (b - a);
            let tol = (settings.abs_tol + settings.rel_tol * whole) * share.max(1e-3);
            let mut diff: f64 = 0.0;
            for k in 0..N {
                diff = diff.max((fine[k] - c[k]).norm());
            }
            if diff <= tol || (r - l) < 1e-14 * (b - a).abs() {
                for k in 0..N {
                    total[k] += fine[k];
                }
            } else {
                panels += 1;
                if panels > settings.max_subdivisions {
                    return Err(Error::Numerical(format!(
                        "adaptive Gauss-Legendre exceeded {} subdivisions",
                        settings.max_subdivisions
                    )));
                }
                let mid = 0.5 * (l + r);
                stack.push((mid, r));
                stack.push((l, mid));
            }
        }
        Ok(total)
    })
}

/// Tanh-sinh quadrature on [a, b]. The integrand receives the abscissa
/// together with its distances to both endpoints, computed without
/// cancellation, so endpoint singularities can be evaluated accurately.
pub fn tanh_sinh<F: Fn(f64, f64, f64) -> C64>(
    f: F,
    a: f64,
    b: f64,
    settings: &QuadratureSettings,
) -> Result<C64> {
    let h = 0.5 * (b - a);
    let u_max = 6.5;
    let eval = |u: f64| -> C64 {
        let v = FRAC_PI_2 * u.sinh();
        let ch = v.cosh();
        let w = h * FRAC_PI_2 * u.cosh() / (ch * ch);
        let dl = 2.0 * h / (1.0 + (-2.0 * v).exp());
        let dr = 2.0 * h / (1.0 + (2.0 * v).exp());
        if dl <= 0.0 || dr <= 0.0 || w == 0.0 {
            return C64::new(0.0, 0.0);
        }
        let x = if dl < dr { a + dl } else { b - dr };
        let val = f(x, dl, dr) * w;
        if val.is_finite() {
            val
        } else {
            C64::new(0.0, 0.0)
        }
    };
    let mut step = 1.0;
    let mut sum = eval(0.0);
    let mut k = 1;
    while k as f64 * step <= u_max {
        let u = k as f64 * step;
        sum += eval(u) + eval(-u);
        k += 1;
    }
    let mut estimate = sum * step;
    for _level in 0..12 {
        step *= 0.5;
        let mut add = C64::new(0.0, 0.0);
        let mut j = 1;
        while j as f64 * step <= u_max {
            let u = j as f64 * step;
            add += eval(u) + eval(-u);
            j += 2;
        }
        sum += add;
        let next = sum * step;
        let diff = (next - estimate).norm();
        estimate = next;
        if diff <= settings.abs_tol + settings.rel_tol * estimate.norm() {
            return Ok(estimate);
        }
    }
    Err(Error::Numerical("tanh-sinh did not converge".into()))
}

/// `∫_a^b g(ξ) / sqrt((ξ-a)(b-ξ)) dξ = ∫_0^π g(m + h cos θ) dθ`, evaluated by
/// adaptive Gauss-Legendre in θ.
pub fn chebyshev_gauss<G: Fn(f64) -> C64>(
    g: G,
    a: f64,
    b: f64,
    settings: &QuadratureSettings,
) -> Result<C64> {
    let h = 0.5 * (b - a);
    let m = 0.5 * (a + b);
    adaptive_gl(|th: f64| g(m + h * th.cos()), 0.0, PI, settings)
}

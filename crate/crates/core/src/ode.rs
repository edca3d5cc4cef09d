//! Adaptive Dormand-Prince 5(4) integration of complex linear systems along a
//! real parameter.

use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeSettings {
    /// Per-step error tolerance (mixed absolute/relative).
    pub tol: f64,
    /// Largest allowed step in the path parameter.
    pub max_step: f64,
    /// Smallest allowed step before giving up.
    pub min_step: f64,
    pub max_steps: usize,
}

impl Default for OdeSettings {
    fn default() -> Self {
        OdeSettings { tol: 1e-11, max_step: 0.05, min_step: 1e-12, max_steps: 2_000_000 }
    }
}

// Dormand-Prince coefficients.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn comb<const N: usize>(y: &[C64; N], terms: &[(f64, &[C64; N])], h: f64) -> [C64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += k[i] * (c * h);
        }
    }
    out
}

/// Integrate `dy/ds = f(s, y)` from `s0` to `s1`. `step_cap(s)` bounds the
/// step size locally (used to stay well inside the disc of convergence
/// around nearby singularities).
pub fn integrate<const N: usize, F, G>(
    f: F,
    step_cap: G,
    s0: f64,
    s1: f64,
    y0: [C64; N],
    settings: &OdeSettings,
) -> Result<[C64; N]>
where
    F: Fn(f64, &[C64; N]) -> [C64; N],
    G: Fn(f64) -> f64,
{
    let dir = if s1 >= s0 { 1.0 } else { -1.0 };
    let span = (s1 - s0).abs();
    let mut s = s0;
    let mut y = y0;
    let mut h = (settings.max_step.min(span)).max(settings.min_step) * 0.25;
    let mut k1 = f(s, &y);
    let mut steps = 0usize;
    while (s1 - s) * dir > 0.0 {
        steps += 1;
        if steps > settings.max_steps {
            return Err(Error::Numerical("ODE step budget exhausted".into()));
        }
        let cap = step_cap(s).min(settings.max_step);
        h = h.min(cap).min((s1 - s).abs());
        if h < settings.min_step && (s1 - s).abs() > settings.min_step {
            return Err(Error::Numerical(format!("ODE step size collapsed at s = {s}")));
        }
        let hh = h * dir;
        let k2 = f(s + C2 * hh, &comb(&y, &[(A21, &k1)], hh));
        let k3 = f(s + C3 * hh, &comb(&y, &[(A31, &k1), (A32, &k2)], hh));
        let k4 = f(s + C4 * hh, &comb(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], hh));
        let k5 = f(
            s + C5 * hh,
            &comb(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], hh),
        );
        let k6 = f(
            s + hh,
            &comb(&y, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], hh),
        );
        let y_new = comb(&y, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)], hh);
        let k7 = f(s + hh, &y_new);
        let mut err: f64 = 0.0;
        for i in 0..N {
            let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7)
                * hh;
            let scale = settings.tol * (1.0 + y[i].norm().max(y_new[i].norm()));
            err = err.max(e.norm() / scale);
        }
        if !err.is_finite() {
            h *= 0.25;
            continue;
        }
        if err <= 1.0 {
            s += hh;
            y = y_new;
            k1 = k7;
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h *= fac;
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
        }
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_growth() {
        let lam = C64::new(0.3, 2.0);
        let y = integrate(
            |_, y: &[C64; 1]| [y[0] * lam],
            |_| 1.0,
            0.0,
            2.0,
            [C64::new(1.0, 0.0)],
            &OdeSettings::default(),
        )
        .unwrap();
        assert!((y[0] - (lam * 2.0).exp()).norm() < 1e-9);
    }
}

//! Flat `key = value` job configuration.
//!
//! Grammar: one assignment per line, `#` starts a comment, blank lines are
//! ignored. Keys are case-sensitive. Complex values are written `re`,
//! `re,im`, or in the usual `a+bi` form (`i`, `-2.5i`, `1-0.3i`).

use ellconn::curves::{BiellipticCover, CPoint};
use ellconn::monodromy::TransportSettings;
use ellconn::ode::OdeSettings;
use ellconn::quadrature::{Method, QuadratureSettings};
use ellconn::{Error, Result, C64};
use std::collections::BTreeMap;
use std::str::FromStr;

/// Defaults, in the order printed by `--show-config`.
pub const DEFAULTS: &[(&str, &str, &str)] = &[
    ("t", "2", "branch point of E: y^2 = x(x-1)(x-t)"),
    ("tp", "3", "t', the image of the fixed points of the cover"),
    ("lambda1", "0.3", "coefficient of xi dxi / y in the connection form"),
    ("lambda2", "0.2", "coefficient of dxi / y"),
    ("bundle", "trivial", "trivial | points"),
    ("q1", "0.7,0.4", "xi of the first divisor point, or inf+ | inf- | p+ | p-"),
    ("q1_sheet", "1", "+1 or -1: sign of the principal square root for y"),
    ("q2", "-0.5,0.9", "xi of the second divisor point, or inf+ | inf- | p+ | p-"),
    ("q2_sheet", "-1", "+1 or -1"),
    ("quad_method", "tanh-sinh", "tanh-sinh | chebyshev-gauss"),
    ("quad_abs_tol", "1e-14", "absolute quadrature tolerance"),
    ("quad_rel_tol", "1e-13", "relative quadrature tolerance"),
    ("ode_tol", "1e-10", "per-step tolerance of the transport integrator"),
    ("ode_max_step", "0.05", "largest step in the path parameter"),
    ("step_fraction", "0.5", "step cap as a fraction of the distance to a singularity"),
    ("compare_tol", "1e-6", "tolerance for dual-method comparisons"),
    ("samples", "4", "number of random sample points for `connection`"),
    ("seed", "0", "random seed"),
    ("oracle", "exact", "exact | numeric (classify)"),
    ("symbols", "a1,a2,b1,b2", "symbol basis for exact exponents"),
    ("exponents", "generic", "generic | four `;`-separated values: exact with oracle = exact, complex with oracle = numeric"),
    ("tau1", "", "optional: first elliptic period ratio for isomonodromy"),
    ("tau2", "", "optional: second elliptic period ratio"),
    ("zl1", "0", "Abel-Jacobi coordinates of the line bundle (isomonodromy)"),
    ("zl2", "0", ""),
];

#[derive(Debug, Clone, PartialEq)]
pub struct RawConfig {
    values: BTreeMap<String, String>,
}

impl Default for RawConfig {
    fn default() -> Self {
        RawConfig {
            values: DEFAULTS.iter().map(|(k, v, _)| (k.to_string(), v.to_string())).collect(),
        }
    }
}

impl RawConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if !DEFAULTS.iter().any(|(k, _, _)| *k == key) {
            return Err(Error::InvalidInput(format!("unknown config key `{key}`")));
        }
        self.values.insert(key.to_string(), value.trim().to_string());
        Ok(())
    }

    /// Apply one `key=value` assignment.
    pub fn assign(&mut self, line: &str) -> Result<()> {
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::InvalidInput(format!("expected key = value, got `{line}`")))?;
        self.set(k.trim(), v)
    }

    pub fn merge_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            self.assign(line)
                .map_err(|e| Error::InvalidInput(format!("line {}: {e}", n + 1)))?;
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).unwrap_or("")
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, _, doc) in DEFAULTS {
            if !doc.is_empty() {
                out.push_str(&format!("# {doc}\n"));
            }
            out.push_str(&format!("{k} = {}\n", self.get(k)));
        }
        out
    }
}

pub fn parse_complex(s: &str) -> Result<C64> {
    let s = s.trim();
    let bad = || Error::InvalidInput(format!("cannot parse complex number `{s}`"));
    if let Some((a, b)) = s.split_once(',') {
        let re = a.trim().parse::<f64>().map_err(|_| bad())?;
        let im = b.trim().parse::<f64>().map_err(|_| bad())?;
        return Ok(C64::new(re, im));
    }
    let z = C64::from_str(&s.replace(' ', "")).map_err(|_| bad())?;
    if z.is_finite() {
        Ok(z)
    } else {
        Err(bad())
    }
}

fn parse_f64(key: &str, s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::InvalidInput(format!("`{key}` must be a finite number, got `{s}`")))
}

fn positive(key: &str, s: &str) -> Result<f64> {
    let v = parse_f64(key, s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(Error::InvalidInput(format!("`{key}` must be positive")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Oracle {
    Exact,
    Numeric,
}

/// Point description before it is placed on a cover.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PointSpec {
    Xi(C64, f64),
    InfPlus,
    InfMinus,
    PTildePlus,
    PTildeMinus,
}

impl PointSpec {
    fn parse(s: &str, sheet: &str, key: &str) -> Result<Self> {
        Ok(match s.trim() {
            "inf+" => PointSpec::InfPlus,
            "inf-" => PointSpec::InfMinus,
            "p+" => PointSpec::PTildePlus,
            "p-" => PointSpec::PTildeMinus,
            other => {
                let sign = match sheet.trim() {
                    "1" | "+1" | "+" => 1.0,
                    "-1" | "-" => -1.0,
                    _ => return Err(Error::InvalidInput(format!("`{key}_sheet` must be +1 or -1"))),
                };
                PointSpec::Xi(parse_complex(other)?, sign)
            }
        })
    }

    pub fn place(&self, cover: &BiellipticCover) -> CPoint {
        match *self {
            PointSpec::Xi(xi, s) => cover.point_at(xi, s),
            PointSpec::InfPlus => CPoint::InfinityPlus,
            PointSpec::InfMinus => CPoint::InfinityMinus,
            PointSpec::PTildePlus => cover.p_tilde_plus(),
            PointSpec::PTildeMinus => cover.p_tilde_minus(),
        }
    }
}

/// Validated job configuration.
#[derive(Debug, Clone)]
pub struct JobConfig {
    pub t: C64,
    pub tp: C64,
    pub lambda1: C64,
    pub lambda2: C64,
    pub points: Option<(PointSpec, PointSpec)>,
    pub quadrature: QuadratureSettings,
    pub transport: TransportSettings,
    pub compare_tol: f64,
    pub samples: usize,
    pub seed: u64,
    pub oracle: Oracle,
    pub symbols: Vec<String>,
    pub exponents: Option<[String; 4]>,
    pub taus: Option<(C64, C64)>,
    pub zl: [C64; 2],
}

impl JobConfig {
    pub fn from_raw(raw: &RawConfig) -> Result<Self> {
        let cx = |k: &str| {
            parse_complex(raw.get(k)).map_err(|e| Error::InvalidInput(format!("`{k}`: {e}")))
        };
        let points = match raw.get("bundle") {
            "trivial" => None,
            "points" => Some((
                PointSpec::parse(raw.get("q1"), raw.get("q1_sheet"), "q1")?,
                PointSpec::parse(raw.get("q2"), raw.get("q2_sheet"), "q2")?,
            )),
            other => return Err(Error::InvalidInput(format!("`bundle` must be trivial or points, got `{other}`"))),
        };
        let method = match raw.get("quad_method") {
            "tanh-sinh" => Method::TanhSinh,
            "chebyshev-gauss" => Method::ChebyshevGauss,
            other => return Err(Error::InvalidInput(format!("unknown quadrature method `{other}`"))),
        };
        let quadrature = QuadratureSettings {
            abs_tol: positive("quad_abs_tol", raw.get("quad_abs_tol"))?,
            rel_tol: positive("quad_rel_tol", raw.get("quad_rel_tol"))?,
            method,
            ..QuadratureSettings::default()
        };
        let transport = TransportSettings {
            ode: OdeSettings {
                tol: positive("ode_tol", raw.get("ode_tol"))?,
                max_step: positive("ode_max_step", raw.get("ode_max_step"))?,
                ..OdeSettings::default()
            },
            step_fraction: positive("step_fraction", raw.get("step_fraction"))?,
            quadrature,
        };
        let oracle = match raw.get("oracle") {
            "exact" => Oracle::Exact,
            "numeric" => Oracle::Numeric,
            other => return Err(Error::InvalidInput(format!("`oracle` must be exact or numeric, got `{other}`"))),
        };
        let symbols: Vec<String> = raw
            .get("symbols")
            .split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect();
        let exponents = match raw.get("exponents") {
            "generic" | "" => None,
            list => {
                let parts: Vec<String> = list.split(';').map(|s| s.trim().to_string()).collect();
                let arr: [String; 4] = parts
                    .try_into()
                    .map_err(|_| Error::InvalidInput("`exponents` needs four `;`-separated values".into()))?;
                Some(arr)
            }
        };
        let taus = match (raw.get("tau1"), raw.get("tau2")) {
            ("", "") => None,
            (a, b) => Some((cx_str("tau1", a)?, cx_str("tau2", b)?)),
        };
        let samples = raw
            .get("samples")
            .parse::<usize>()
            .ok()
            .filter(|n| (1..=1000).contains(n))
            .ok_or_else(|| Error::InvalidInput("`samples` must be an integer in 1..=1000".into()))?;
        let seed = raw
            .get("seed")
            .parse::<u64>()
            .map_err(|_| Error::InvalidInput("`seed` must be a non-negative integer".into()))?;
        let cfg = JobConfig {
            t: cx("t")?,
            tp: cx("tp")?,
            lambda1: cx("lambda1")?,
            lambda2: cx("lambda2")?,
            points,
            quadrature,
            transport,
            compare_tol: positive("compare_tol", raw.get("compare_tol"))?,
            samples,
            seed,
            oracle,
            symbols,
            exponents,
            taus,
            zl: [cx("zl1")?, cx("zl2")?],
        };
        cfg.cover()?;
        Ok(cfg)
    }

    pub fn cover(&self) -> Result<BiellipticCover> {
        BiellipticCover::new(self.t, self.tp)
    }

    /// `(t, t')` when both are real, as needed by the real period constants.
    pub fn real_pair(&self) -> Option<(f64, f64)> {
        (self.t.im == 0.0 && self.tp.im == 0.0).then_some((self.t.re, self.tp.re))
    }
}

fn cx_str(key: &str, s: &str) -> Result<C64> {
    parse_complex(s).map_err(|e| Error::InvalidInput(format!("`{key}`: {e}")))
}

//! Exact scalars: rational combinations of declared-independent symbols and
//! `πi`.

use crate::{Error, Result};
use num_rational::Ratio;
use std::fmt;

pub type Q = Ratio<i128>;

/// Named symbols assumed linearly independent over `ℚ` together with `πi`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolBasis {
    pub names: Vec<String>,
}

impl SymbolBasis {
    pub fn new<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        let names: Vec<String> = names.iter().map(|s| s.as_ref().trim().to_string()).collect();
        for (i, n) in names.iter().enumerate() {
            if n.is_empty() || n == "pi_i" || names[..i].contains(n) {
                return Err(Error::InvalidInput(format!("bad or repeated symbol name '{n}'")));
            }
        }
        Ok(SymbolBasis { names })
    }

    /// Coordinate slots: one per symbol plus the trailing `πi`.
    pub fn dim(&self) -> usize {
        self.names.len() + 1
    }

    pub fn zero(&self) -> ExactScalar {
        ExactScalar { coords: vec![Q::from_integer(0); self.dim()] }
    }

    pub fn pi_i(&self, q: Q) -> ExactScalar {
        let mut z = self.zero();
        *z.coords.last_mut().unwrap() = q;
        z
    }

    pub fn symbol(&self, name: &str, q: Q) -> Result<ExactScalar> {
        let k = self
            .names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::InvalidInput(format!("unknown symbol '{name}'")))?;
        let mut z = self.zero();
        z.coords[k] = q;
        Ok(z)
    }

    /// Parse `r1*name1 + r2*name2 - ...`, where each `r` is an integer or
    /// `p/q` (default 1) and `name` is a declared symbol or `pi_i`. A bare
    /// rational with no name is rejected: rationals are not in the span.
    pub fn parse(&self, s: &str) -> Result<ExactScalar> {
        let mut out = self.zero();
        let cleaned = s.replace(' ', "");
        if cleaned.is_empty() || cleaned == "0" {
            return Ok(out);
        }
        let mut terms = Vec::new();
        let mut cur = String::new();
        for (i, ch) in cleaned.char_indices() {
            if (ch == '+' || ch == '-') && i > 0 && !cur.ends_with('*') && !cur.ends_with('/') {
                terms.push(std::mem::take(&mut cur));
            }
            cur.push(ch);
        }
        terms.push(cur);
        for term in terms {
            let (sign, body) = match term.strip_prefix('-') {
                Some(b) => (-1, b),
                None => (1, term.strip_prefix('+').unwrap_or(&term)),
            };
            let (coef, name) = match body.rsplit_once('*') {
                Some((c, n)) => (parse_rational(c)?, n),
                None => (Q::from_integer(1), body),
            };
            let coef = coef * Q::from_integer(sign);
            let add = if name == "pi_i" { self.pi_i(coef) } else { self.symbol(name, coef)? };
            out = out.add(&add);
        }
        Ok(out)
    }
}

fn parse_rational(s: &str) -> Result<Q> {
    let bad = || Error::InvalidInput(format!("bad rational '{s}'"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: i128 = n.parse().map_err(|_| bad())?;
            let d: i128 = d.parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(bad());
            }
            Ok(Q::new(n, d))
        }
        None => Ok(Q::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// Element of the `ℚ`-span of the basis symbols and `πi`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactScalar {
    pub coords: Vec<Q>,
}

impl ExactScalar {
    pub fn add(&self, o: &ExactScalar) -> ExactScalar {
        ExactScalar { coords: self.coords.iter().zip(&o.coords).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, o: &ExactScalar) -> ExactScalar {
        ExactScalar { coords: self.coords.iter().zip(&o.coords).map(|(a, b)| a - b).collect() }
    }

    pub fn scale(&self, q: Q) -> ExactScalar {
        ExactScalar { coords: self.coords.iter().map(|a| a * q).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| *c == Q::from_integer(0))
    }

    /// Coefficient of `πi`.
    pub fn pi_coeff(&self) -> Q {
        *self.coords.last().unwrap()
    }
}

impl fmt::Display for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .coords
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != Q::from_integer(0))
            .map(|(k, c)| {
                if k + 1 == self.coords.len() {
                    format!("{c}*pi_i")
                } else {
                    format!("{c}*s{k}")
                }
            })
            .collect();
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

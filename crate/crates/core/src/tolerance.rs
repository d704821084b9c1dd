//! Numerical tolerances shared by every certificate.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Relative/absolute tolerance pair.
///
/// The textual form accepted by [`FromStr`] is either a bare number (taken as
/// the relative tolerance) or a comma-separated list of `rel=<x>` / `abs=<y>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub rel: f64,
    pub abs: f64,
}

impl Tolerances {
    pub const DEFAULT_REL: f64 = 1e-9;
    pub const DEFAULT_ABS: f64 = 1e-12;

    pub fn new(rel: f64, abs: f64) -> Self {
        Self { rel, abs }
    }

    /// Allowed deviation for a quantity whose largest contributing magnitude is `scale`.
    pub fn allowed(&self, scale: f64) -> f64 {
        self.abs + self.rel * scale.abs()
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::new(Self::DEFAULT_REL, Self::DEFAULT_ABS)
    }
}

impl FromStr for Tolerances {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || Error::InvalidParameter(format!("tolerance spec '{s}'"));
        let parse = |v: &str| -> Result<f64, Error> {
            let x: f64 = v.trim().parse().map_err(|_| bad())?;
            if x.is_finite() && x >= 0.0 {
                Ok(x)
            } else {
                Err(bad())
            }
        };

        let mut tol = Tolerances::default();
        let s_trim = s.trim();
        if !s_trim.contains('=') {
            tol.rel = parse(s_trim)?;
            return Ok(tol);
        }
        for part in s_trim.split(',') {
            let (key, value) = part.split_once('=').ok_or_else(bad)?;
            match key.trim() {
                "rel" => tol.rel = parse(value)?,
                "abs" => tol.abs = parse(value)?,
                _ => return Err(bad()),
            }
        }
        Ok(tol)
    }
}

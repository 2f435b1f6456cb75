use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid `lo:hi:step`: starts at lo, keeps points below hi + step/2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Grid {
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && step.is_finite()) {
            return Err(Error::invalid("grid bounds must be finite"));
        }
        if !(step > 0.0) || hi < lo {
            return Err(Error::invalid("grid needs step > 0 and hi >= lo"));
        }
        if (hi - lo) / step > 1e7 {
            return Err(Error::invalid("grid has too many points"));
        }
        Ok(Grid { lo, hi, step })
    }

    pub fn points(&self) -> Vec<f64> {
        let limit = self.hi + self.step / 2.0;
        (0..).map(|k| self.lo + k as f64 * self.step).take_while(|&x| x < limit).collect()
    }
}

impl FromStr for Grid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::invalid(format!("grid '{s}' is not lo:hi:step")));
        }
        let num = |p: &str| p.trim().parse::<f64>().map_err(|_| Error::invalid(format!("bad grid number '{p}'")));
        Grid::new(num(parts[0])?, num(parts[1])?, num(parts[2])?)
    }
}

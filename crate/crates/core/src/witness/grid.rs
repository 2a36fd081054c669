use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

/// Inclusive sample axis `lo, lo + h, ..., hi` with `steps` subdivisions
/// (`steps + 1` samples). Written `lo:hi:steps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, steps: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo < 0.0 || hi < lo {
            return Err(Error::InvalidInput(format!("axis needs 0 <= lo <= hi, got {lo}:{hi}")));
        }
        if steps == 0 && hi != lo {
            return Err(Error::InvalidInput("axis with lo < hi needs at least one step".into()));
        }
        Ok(Self { lo, hi, steps })
    }

    /// A single sample.
    pub fn point(v: f64) -> Result<Self> {
        Self::new(v, v, 0)
    }

    /// `0:2:200`.
    pub fn default_xy() -> Self {
        Self { lo: 0.0, hi: 2.0, steps: 200 }
    }

    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn value(&self, k: usize) -> f64 {
        if self.steps == 0 {
            return self.lo;
        }
        if k == self.steps {
            return self.hi;
        }
        self.lo + (self.hi - self.lo) * k as f64 / self.steps as f64
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.value(k)).collect()
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::InvalidInput(format!("expected lo:hi:steps or a number, got '{s}'"));
        match parts.as_slice() {
            [v] => Axis::point(v.trim().parse().map_err(|_| bad())?),
            [lo, hi, steps] => Axis::new(
                lo.trim().parse().map_err(|_| bad())?,
                hi.trim().parse().map_err(|_| bad())?,
                steps.trim().parse().map_err(|_| bad())?,
            ),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.lo, self.hi, self.steps)
    }
}

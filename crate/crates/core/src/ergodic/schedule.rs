use serde::{Deserialize, Serialize};

use super::verdict::VerdictRule;
use crate::error::{Error, Result};

/// Geometric sampling `T_j = T0 * r^j` for `j = 0..count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub t0: f64,
    pub ratio: f64,
    pub count: usize,
    pub window: usize,
    pub quad_tol: f64,
    pub spread_tol: f64,
    pub zero_threshold: f64,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule {
            t0: 1.0,
            ratio: 1.5,
            count: 24,
            window: 5,
            quad_tol: 1e-10,
            spread_tol: 1e-3,
            zero_threshold: 1e-3,
        }
    }
}

impl Schedule {
    pub fn new(t0: f64, ratio: f64, count: usize, window: usize) -> Result<Self> {
        Schedule {
            t0,
            ratio,
            count,
            window,
            ..Schedule::default()
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        if !(self.t0 > 0.0 && self.t0.is_finite()) {
            return Err(Error::InvalidParameter(format!("T0 must be positive, got {}", self.t0)));
        }
        if !(self.ratio > 1.0 && self.ratio.is_finite()) {
            return Err(Error::InvalidParameter(format!("ratio must exceed 1, got {}", self.ratio)));
        }
        if self.window < 3 || self.count < self.window {
            return Err(Error::InvalidParameter(format!(
                "need count >= window >= 3, got count {} window {}",
                self.count, self.window
            )));
        }
        if !(self.quad_tol > 0.0 && self.spread_tol > 0.0 && self.zero_threshold > 0.0) {
            return Err(Error::InvalidParameter("tolerances must be positive".into()));
        }
        Ok(self)
    }

    pub fn with_count(mut self, count: usize) -> Self {
        self.count = count;
        self
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.count).map(|j| self.t0 * self.ratio.powi(j as i32)).collect()
    }

    pub fn t_max(&self) -> f64 {
        self.t0 * self.ratio.powi(self.count as i32 - 1)
    }

    pub fn rule(&self) -> VerdictRule {
        VerdictRule {
            window: self.window,
            spread_tol: self.spread_tol,
            zero_threshold: self.zero_threshold,
            ..VerdictRule::default()
        }
    }
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform time grid `0 = t_0 < t_1 < ... < t_n = t_end`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t_end: f64,
    n_steps: usize,
}

impl TimeGrid {
    /// `t_end = 0` is accepted and yields a grid whose steps all have zero length.
    pub fn new(t_end: f64, n_steps: usize) -> Result<Self> {
        if !(t_end >= 0.0 && t_end.is_finite()) {
            return Err(Error::InvalidParams(format!("t_end must be finite and >= 0, got {t_end}")));
        }
        if n_steps == 0 {
            return Err(Error::InvalidParams("n_steps must be positive".into()));
        }
        Ok(Self { t_end, n_steps })
    }

    /// Grid on `[0, t_end]` with spacing `dt`; `t_end / dt` must be an integer.
    pub fn with_step(t_end: f64, dt: f64) -> Result<Self> {
        let n = (t_end / dt).round();
        if !(n >= 1.0) || ((n * dt - t_end).abs() > 1e-12 * t_end.max(1.0)) {
            return Err(Error::InvalidParams(format!("t_end = {t_end} is not a multiple of dt = {dt}")));
        }
        Self::new(t_end, n as usize)
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn n_points(&self) -> usize {
        self.n_steps + 1
    }

    pub fn dt(&self) -> f64 {
        self.t_end / self.n_steps as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        if k == self.n_steps {
            self.t_end
        } else {
            k as f64 * self.dt()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_points()).map(|k| self.time(k)).collect()
    }

    /// Coarsen by an integer factor that divides `n_steps`.
    pub fn coarsen(&self, factor: usize) -> Result<Self> {
        if factor == 0 || self.n_steps % factor != 0 {
            return Err(Error::InvalidParams(format!(
                "factor {factor} does not divide {} steps",
                self.n_steps
            )));
        }
        Self::new(self.t_end, self.n_steps / factor)
    }
}

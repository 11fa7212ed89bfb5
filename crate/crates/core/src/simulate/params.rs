use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimulationParams {
    pub n_years: u32,
    pub seed: u64,
    /// Per-step probability of attempting a transition.
    pub jump_probability: f64,
    /// Odd number of points in the join smoothing window.
    pub smoothing_window: usize,
    /// Terminal steps held back on every track; `None` uses the library
    /// default.
    pub reserved_steps: Option<usize>,
}

impl Default for SimulationParams {
    fn default() -> Self {
        Self {
            n_years: 500,
            seed: 42,
            jump_probability: 0.1,
            smoothing_window: 5,
            reserved_steps: None,
        }
    }
}

impl SimulationParams {
    pub fn half_window(&self) -> usize {
        self.smoothing_window / 2
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.jump_probability) {
            return Err(Error::Config(format!(
                "jump_probability must lie in [0, 1], got {}",
                self.jump_probability
            )));
        }
        if self.smoothing_window < 3 || self.smoothing_window.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "smoothing_window must be odd and >= 3, got {}",
                self.smoothing_window
            )));
        }
        if let Some(r) = self.reserved_steps {
            self.check_reserved(r)?;
        }
        Ok(())
    }

    pub fn check_reserved(&self, reserved: usize) -> Result<()> {
        let min = self.smoothing_window.div_ceil(2);
        if reserved < min {
            return Err(Error::Config(format!(
                "reserved_steps {reserved} is below {min} (half the smoothing window, rounded up)"
            )));
        }
        Ok(())
    }
}

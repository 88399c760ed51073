use serde::Serialize;

use crate::error::{Error, Result};

/// Default number of skeleton recurrence iterations.
pub const DEFAULT_SKELETON_ITERS: usize = 50;

/// Weights and numerical constants of the pixel and context losses.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LossConfig {
    /// Weight of cross-entropy against Dice in the pixel loss.
    pub alpha: f64,
    /// Weight of the masked term in the context loss. Values below 0.5 keep
    /// the unmasked term dominant.
    pub gamma: f64,
    pub smooth: f64,
    pub clamp: f64,
    pub skeleton_iters: usize,
}

impl Default for LossConfig {
    fn default() -> Self {
        LossConfig {
            alpha: 0.5,
            gamma: 0.2,
            smooth: 1e-5,
            clamp: 1e-7,
            skeleton_iters: DEFAULT_SKELETON_ITERS,
        }
    }
}

impl LossConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::InvalidConfig(format!("alpha {} outside [0, 1]", self.alpha)));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::InvalidConfig(format!("gamma {} outside [0, 1]", self.gamma)));
        }
        if self.smooth.is_nan() || self.smooth <= 0.0 {
            return Err(Error::InvalidConfig(format!("smooth {} must be positive", self.smooth)));
        }
        if !(self.clamp > 0.0 && self.clamp < 0.5) {
            return Err(Error::InvalidConfig(format!("clamp {} outside (0, 0.5)", self.clamp)));
        }
        if self.skeleton_iters == 0 {
            return Err(Error::InvalidConfig("skeleton_iters must be at least 1".into()));
        }
        Ok(())
    }
}

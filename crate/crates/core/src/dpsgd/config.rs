use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// DP-SGD mechanism and optimizer settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DpConfig {
    /// Poisson sampling rate.
    pub q: f64,
    pub steps: u64,
    /// Per-example clipping norm.
    pub clip: f64,
    /// Noise multiplier; 0 disables noise (non-private baseline).
    pub sigma: f64,
    pub delta: f64,
    /// Registered optimizer name (`sgd` or `adamw`).
    pub optimizer: String,
    pub lr: f64,
    pub weight_decay: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    /// Set from the run's master seed; not read from config files.
    #[serde(skip)]
    pub seed: u64,
}

impl Default for DpConfig {
    fn default() -> Self {
        Self {
            q: 0.0016,
            steps: 12_500,
            clip: 5.0,
            sigma: 1.0,
            delta: 1e-5,
            optimizer: "adamw".into(),
            lr: 1e-3,
            weight_decay: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            adam_eps: 1e-8,
            seed: 0,
        }
    }
}

impl DpConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.clip > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "clipping norm must be positive, got {}",
                self.clip
            )));
        }
        if !(self.q > 0.0 && self.q <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "sampling rate must lie in (0, 1], got {}",
                self.q
            )));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "delta must lie in (0, 1), got {}",
                self.delta
            )));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "noise multiplier must be finite and >= 0, got {}",
                self.sigma
            )));
        }
        if !(self.lr > 0.0) || self.weight_decay < 0.0 {
            return Err(Error::InvalidConfig(
                "learning rate must be positive and weight decay >= 0".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) || !(self.adam_eps > 0.0) {
            return Err(Error::InvalidConfig(
                "Adam betas must lie in [0, 1) and eps must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Steps per epoch-equivalent, `ceil(1/q)`.
    pub fn steps_per_epoch(&self) -> u64 {
        (1.0 / self.q).ceil() as u64
    }
}

/// Batch-adaptive bounded class reweighting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AwdpConfig {
    pub eps_w: f64,
    pub w_min: f64,
    pub w_max: f64,
    pub enabled: bool,
}

impl Default for AwdpConfig {
    fn default() -> Self {
        Self {
            eps_w: 1e-6,
            w_min: 0.1,
            w_max: 10.0,
            enabled: true,
        }
    }
}

impl AwdpConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps_w > 0.0) {
            return Err(Error::InvalidConfig("eps_w must be positive".into()));
        }
        if !(self.w_min > 0.0 && self.w_min <= 1.0 && 1.0 <= self.w_max && self.w_max.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "weight bounds must satisfy 0 < w_min <= 1 <= w_max, got [{}, {}]",
                self.w_min, self.w_max
            )));
        }
        Ok(())
    }
}

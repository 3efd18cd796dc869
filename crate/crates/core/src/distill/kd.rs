use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{softmax, weighted_ce_loss, CE_LOG_FLOOR};

/// Distillation objective and student training settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KdConfig {
    /// Temperature applied to both teacher and student distributions.
    pub tau: f64,
    /// Weight of the distillation term; `1 − alpha` goes to hard-label CE.
    pub alpha: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub weight_decay: f64,
    /// Set from the run's master seed; not read from config files.
    #[serde(skip)]
    pub seed: u64,
}

impl Default for KdConfig {
    fn default() -> Self {
        Self {
            tau: 2.0,
            alpha: 0.7,
            epochs: 20,
            batch_size: 32,
            lr: 1e-3,
            weight_decay: 1e-4,
            seed: 0,
        }
    }
}

impl KdConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "temperature must be positive, got {}",
                self.tau
            )));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::InvalidConfig(format!(
                "alpha must lie in [0, 1], got {}",
                self.alpha
            )));
        }
        if self.batch_size == 0 || !(self.lr > 0.0) || self.weight_decay < 0.0 {
            return Err(Error::InvalidConfig(
                "batch size and learning rate must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// `p_i^{1/τ} / Σ_j p_j^{1/τ}` with probabilities floored at 1e-12.
///
/// For `p = softmax(z)` this equals `softmax(z/τ)` up to the floor.
pub fn temper(probs: &[f64], tau: f64) -> Vec<f64> {
    let logs: Vec<f64> = probs.iter().map(|p| p.max(CE_LOG_FLOOR).ln() / tau).collect();
    softmax(&logs)
}

fn log_softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + z.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
    z.iter().map(|v| v - lse).collect()
}

/// `KL(p ‖ softmax(z))` with `0·log 0 = 0`.
fn kl_to_logits(p: &[f64], z: &[f64]) -> f64 {
    let log_q = log_softmax(z);
    p.iter()
        .zip(&log_q)
        .filter(|(&pi, _)| pi > 0.0)
        .map(|(&pi, &lq)| pi * (pi.ln() - lq))
        .sum::<f64>()
        .max(0.0)
}

/// `(1−α)·CE(y, softmax(z)) + α·τ²·KL(p_t^τ ‖ softmax(z/τ))` and its gradient in `z`.
pub fn kd_loss_and_grad(logits: &[f64], y: usize, teacher: &[f64], cfg: &KdConfig) -> (f64, Vec<f64>) {
    let tau = cfg.tau;
    let p_s = softmax(logits);
    let ce = weighted_ce_loss(&p_s, y, 1.0);
    let pt_tau = temper(teacher, tau);
    let scaled: Vec<f64> = logits.iter().map(|z| z / tau).collect();
    let kl = kl_to_logits(&pt_tau, &scaled);
    let ps_tau = softmax(&scaled);
    let loss = (1.0 - cfg.alpha) * ce + cfg.alpha * tau * tau * kl;
    let grad = (0..logits.len())
        .map(|k| {
            let ce_grad = p_s[k] - if k == y { 1.0 } else { 0.0 };
            (1.0 - cfg.alpha) * ce_grad + cfg.alpha * tau * (ps_tau[k] - pt_tau[k])
        })
        .collect();
    (loss, grad)
}

pub fn kd_loss(logits: &[f64], y: usize, teacher: &[f64], cfg: &KdConfig) -> f64 {
    kd_loss_and_grad(logits, y, teacher, cfg).0
}

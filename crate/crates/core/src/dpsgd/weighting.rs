use super::config::AwdpConfig;
use crate::registry::Registry;

/// Per-class loss weights computed from the labels of a realized batch.
pub trait ClassWeighting: Send + Sync {
    fn name(&self) -> &'static str;
    fn weights(&self, labels: &[usize], num_classes: usize) -> Vec<f64>;
}

/// All weights 1.
pub struct Uniform;

impl ClassWeighting for Uniform {
    fn name(&self) -> &'static str {
        "uniform"
    }

    fn weights(&self, _labels: &[usize], num_classes: usize) -> Vec<f64> {
        vec![1.0; num_classes]
    }
}

pub struct Awdp(pub AwdpConfig);

impl ClassWeighting for Awdp {
    fn name(&self) -> &'static str {
        "awdp"
    }

    fn weights(&self, labels: &[usize], num_classes: usize) -> Vec<f64> {
        awdp_weights(labels, num_classes, &self.0)
    }
}

/// `w_k = clip(|B| / (K·n_k + ε_w), w_min, w_max)`, and `w_k = 1` for classes absent from the batch.
pub fn awdp_weights(labels: &[usize], num_classes: usize, cfg: &AwdpConfig) -> Vec<f64> {
    let mut counts = vec![0usize; num_classes];
    for &y in labels {
        counts[y] += 1;
    }
    let batch = labels.len() as f64;
    counts
        .iter()
        .map(|&n| {
            if n == 0 {
                1.0
            } else {
                (batch / (num_classes as f64 * n as f64 + cfg.eps_w)).clamp(cfg.w_min, cfg.w_max)
            }
        })
        .collect()
}

pub type ClassWeightingCtor = fn(&AwdpConfig) -> Box<dyn ClassWeighting>;

fn make_uniform(_: &AwdpConfig) -> Box<dyn ClassWeighting> {
    Box::new(Uniform)
}

fn make_awdp(cfg: &AwdpConfig) -> Box<dyn ClassWeighting> {
    Box::new(Awdp(cfg.clone()))
}

pub fn class_weightings() -> Registry<ClassWeightingCtor> {
    Registry::new("class weighting")
        .register("uniform", make_uniform as ClassWeightingCtor)
        .register("awdp", make_awdp)
}

/// `awdp` when enabled, `uniform` otherwise.
pub fn class_weighting(cfg: &AwdpConfig) -> Box<dyn ClassWeighting> {
    let name = if cfg.enabled { "awdp" } else { "uniform" };
    class_weightings().get(name).expect("built-in weighting")(cfg)
}

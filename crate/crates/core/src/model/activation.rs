use std::sync::Arc;

use crate::error::Result;
use crate::registry::Registry;

/// Elementwise hidden-layer nonlinearity.
pub trait Activation: Send + Sync {
    fn name(&self) -> &'static str;
    fn apply(&self, pre: f64) -> f64;
    /// Derivative at `pre`, where `post = apply(pre)`.
    fn derivative(&self, pre: f64, post: f64) -> f64;
}

pub struct Tanh;

impl Activation for Tanh {
    fn name(&self) -> &'static str {
        "tanh"
    }

    fn apply(&self, pre: f64) -> f64 {
        pre.tanh()
    }

    fn derivative(&self, _pre: f64, post: f64) -> f64 {
        1.0 - post * post
    }
}

pub struct Relu;

impl Activation for Relu {
    fn name(&self) -> &'static str {
        "relu"
    }

    fn apply(&self, pre: f64) -> f64 {
        pre.max(0.0)
    }

    fn derivative(&self, pre: f64, _post: f64) -> f64 {
        if pre > 0.0 {
            1.0
        } else {
            0.0
        }
    }
}

pub type ActivationCtor = fn() -> Arc<dyn Activation>;

fn make_tanh() -> Arc<dyn Activation> {
    Arc::new(Tanh)
}

fn make_relu() -> Arc<dyn Activation> {
    Arc::new(Relu)
}

pub fn activations() -> Registry<ActivationCtor> {
    Registry::new("activation")
        .register("tanh", make_tanh as ActivationCtor)
        .register("relu", make_relu)
}

pub fn activation(name: &str) -> Result<Arc<dyn Activation>> {
    Ok(activations().get(name)?())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_match_finite_differences() {
        for name in ["tanh", "relu"] {
            let act = activation(name).unwrap();
            assert_eq!(act.name(), name);
            for &x in &[-1.3, -0.2, 0.4, 2.0] {
                let h = 1e-6;
                let fd = (act.apply(x + h) - act.apply(x - h)) / (2.0 * h);
                assert!((fd - act.derivative(x, act.apply(x))).abs() < 1e-6);
            }
        }
        assert!(activation("gelu").is_err());
    }
}

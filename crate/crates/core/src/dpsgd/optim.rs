use super::config::DpConfig;
use crate::accountant::PrivacyLedger;
use crate::error::{Error, Result};
use crate::model::{ModelParams, ParamSet};
use crate::registry::Registry;

/// A first-order update rule. `step` writes the new parameters into `params`.
pub trait Optimizer: Send {
    fn name(&self) -> &'static str;
    fn step(&mut self, params: &mut ParamSet, grad: &ParamSet);
}

/// `θ ← θ − lr·g`; no weight decay.
pub struct Sgd {
    pub lr: f64,
}

impl Optimizer for Sgd {
    fn name(&self) -> &'static str {
        "sgd"
    }

    fn step(&mut self, params: &mut ParamSet, grad: &ParamSet) {
        params.add_scaled(-self.lr, grad);
    }
}

/// Adam with decoupled weight decay and bias correction.
pub struct AdamW {
    pub lr: f64,
    pub weight_decay: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    t: i32,
    m: Option<ParamSet>,
    v: Option<ParamSet>,
}

impl AdamW {
    pub fn new(lr: f64, weight_decay: f64, beta1: f64, beta2: f64, eps: f64) -> Self {
        Self {
            lr,
            weight_decay,
            beta1,
            beta2,
            eps,
            t: 0,
            m: None,
            v: None,
        }
    }
}

impl Optimizer for AdamW {
    fn name(&self) -> &'static str {
        "adamw"
    }

    fn step(&mut self, params: &mut ParamSet, grad: &ParamSet) {
        self.t += 1;
        let m = self.m.get_or_insert_with(|| params.zeros_like());
        let v = self.v.get_or_insert_with(|| params.zeros_like());
        let bc1 = 1.0 - self.beta1.powi(self.t);
        let bc2_sqrt = (1.0 - self.beta2.powi(self.t)).sqrt();
        let step = self.lr / bc1;
        let decay = 1.0 - self.lr * self.weight_decay;
        let grads = grad.tensors();
        for ((((_, p), (_, m)), (_, v)), (_, _, g)) in params
            .tensors_mut()
            .into_iter()
            .zip(m.tensors_mut())
            .zip(v.tensors_mut())
            .zip(grads)
        {
            for i in 0..p.len() {
                let gi = g[i];
                m[i] = self.beta1 * m[i] + (1.0 - self.beta1) * gi;
                v[i] = self.beta2 * v[i] + (1.0 - self.beta2) * gi * gi;
                p[i] = p[i] * decay - step * m[i] / (v[i].sqrt() / bc2_sqrt + self.eps);
            }
        }
    }
}

pub type OptimizerCtor = fn(&DpConfig) -> Box<dyn Optimizer>;

fn make_sgd(cfg: &DpConfig) -> Box<dyn Optimizer> {
    Box::new(Sgd { lr: cfg.lr })
}

fn make_adamw(cfg: &DpConfig) -> Box<dyn Optimizer> {
    Box::new(AdamW::new(cfg.lr, cfg.weight_decay, cfg.beta1, cfg.beta2, cfg.adam_eps))
}

pub fn optimizers() -> Registry<OptimizerCtor> {
    Registry::new("optimizer")
        .register("sgd", make_sgd as OptimizerCtor)
        .register("adamw", make_adamw)
}

pub fn optimizer(cfg: &DpConfig) -> Result<Box<dyn Optimizer>> {
    Ok(optimizers().get(&cfg.optimizer)?(cfg))
}

/// Parameters, optimizer state, step counter and privacy ledger of a run.
pub struct TrainState {
    pub params: ModelParams,
    pub optimizer: Box<dyn Optimizer>,
    pub step: u64,
    pub ledger: PrivacyLedger,
}

impl TrainState {
    pub fn new(params: ModelParams, cfg: &DpConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            params,
            optimizer: optimizer(cfg)?,
            step: 0,
            ledger: PrivacyLedger::new(cfg.q, cfg.sigma, cfg.delta)?,
        })
    }

    /// Counts a sampling event that produced an empty batch.
    pub fn skip_step(&mut self) {
        self.step += 1;
        self.ledger.record_step();
    }
}

/// Feeds `g_tilde` to the optimizer and advances the step counter and ledger.
///
/// A non-finite gradient or result leaves the state untouched and returns an error.
pub fn apply_update(state: &mut TrainState, g_tilde: &ParamSet) -> Result<()> {
    if !state.params.tensors.same_shape(g_tilde) {
        return Err(Error::ShapeMismatch("update shapes do not match parameters".into()));
    }
    if let Some(name) = g_tilde.first_non_finite() {
        return Err(Error::NonFiniteUpdate(format!(
            "gradient tensor `{name}` at step {}",
            state.step
        )));
    }
    let mut next = state.params.tensors.clone();
    state.optimizer.step(&mut next, g_tilde);
    if let Some(name) = next.first_non_finite() {
        return Err(Error::NonFiniteUpdate(format!(
            "parameter tensor `{name}` at step {}",
            state.step
        )));
    }
    state.params.tensors = next;
    state.step += 1;
    state.ledger.record_step();
    Ok(())
}

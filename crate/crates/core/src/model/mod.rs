//! Teacher and student networks, exact per-example gradients, checkpoints.

mod activation;
mod checkpoint;
mod forward;
mod grad;
pub(crate) mod linalg;
mod params;

pub use activation::{activation, activations, Activation, ActivationCtor, Relu, Tanh};
pub use checkpoint::{
    checkpoint_hash, decode_checkpoint, encode_checkpoint, load_checkpoint, meta_path, save_checkpoint, CheckpointMeta,
    CHECKPOINT_MAGIC, CHECKPOINT_VERSION,
};
pub use forward::{forward_student, forward_teacher, logits, priv_dropout, softmax, weighted_ce_loss, CE_LOG_FLOOR};
pub use grad::{factored_ce_grad, factored_logit_grad, per_example_grad, FactoredGrad, PerExampleGrad};
pub use params::{Architecture, Dense, ModelConfig, ModelParams, ParamSet};

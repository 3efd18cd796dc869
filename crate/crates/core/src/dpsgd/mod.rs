//! DP-SGD teacher training: class weighting, per-example clipping, Gaussian
//! noising, optimizer updates and the sampling loop wired to the accountant.

mod config;
mod mechanism;
mod optim;
mod train;
mod weighting;

pub use config::{AwdpConfig, DpConfig};
pub use mechanism::{clip_grad, privatize, privatize_sum};
pub use optim::{apply_update, optimizer, optimizers, AdamW, Optimizer, OptimizerCtor, Sgd, TrainState};
pub use train::{train_teacher, EpochLog, TeacherData, TeacherRun, TrainOptions};
pub use weighting::{
    awdp_weights, class_weighting, class_weightings, Awdp, ClassWeighting, ClassWeightingCtor, Uniform,
};

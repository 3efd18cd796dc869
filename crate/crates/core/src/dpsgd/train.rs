use rand::seq::SliceRandom;
use serde::Serialize;

use super::config::{AwdpConfig, DpConfig};
use super::mechanism::{clip_factor, privatize_sum};
use super::optim::{apply_update, TrainState};
use super::weighting::class_weighting;
use crate::accountant::{epsilon_or_sentinel, PrivacyLedger};
use crate::datamodel::{poisson_sample, Dataset};
use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, FrontEnd};
use crate::metrics::argmax_pred;
use crate::model::{factored_ce_grad, forward_teacher, priv_dropout, ModelConfig, ModelParams};
use crate::rng::{stream, Stream};

/// Model-ready private training data: front-end output, privileged vectors, labels.
#[derive(Debug, Clone, PartialEq)]
pub struct TeacherData {
    pub features: Vec<FeatureMatrix>,
    pub privileged: Option<Vec<Vec<f64>>>,
    pub labels: Vec<usize>,
    pub num_classes: usize,
}

impl TeacherData {
    pub fn from_dataset(data: &Dataset, frontend: &dyn FrontEnd) -> Self {
        let privileged = data.privileged_dim().map(|_| {
            data.examples()
                .iter()
                .map(|e| e.privileged.clone().expect("dataset validates privileged presence"))
                .collect()
        });
        Self {
            features: data.features(frontend),
            privileged,
            labels: data.labels(),
            num_classes: data.num_classes(),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.features.first().map_or(0, |f| f.dim())
    }

    pub fn privileged_dim(&self) -> Option<usize> {
        self.privileged.as_ref().and_then(|p| p.first()).map(|m| m.len())
    }
}

/// Diagnostics that do not affect the trained parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainOptions {
    /// Size of the fixed probe subset used for logged accuracy.
    pub probe_size: usize,
    /// Re-measure every clipped gradient and fail if its norm exceeds `C + 1e-9`.
    pub check_clipping: bool,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self {
            probe_size: 1000,
            check_clipping: false,
        }
    }
}

/// One training-log record, written at the end of every epoch-equivalent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpochLog {
    pub step: u64,
    pub epoch: u64,
    /// Mean weighted cross-entropy over the examples sampled since the previous record.
    pub loss: f64,
    pub probe_acc: f64,
    #[serde(serialize_with = "epsilon_or_sentinel")]
    pub epsilon: Option<f64>,
}

pub struct TeacherRun {
    pub params: ModelParams,
    pub ledger: PrivacyLedger,
    pub log: Vec<EpochLog>,
    /// Largest re-measured clipped norm when clipping checks are on.
    pub max_clipped_norm: Option<f64>,
}

fn probe_indices(n: usize, size: usize, seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    if n > size {
        idx.shuffle(&mut stream(seed, Stream::Probe));
        idx.truncate(size);
        idx.sort_unstable();
    }
    idx
}

fn probe_accuracy(params: &ModelParams, data: &TeacherData, probe: &[usize]) -> Result<f64> {
    if probe.is_empty() {
        return Ok(0.0);
    }
    let mut correct = 0usize;
    for &i in probe {
        let m = data
            .privileged
            .as_ref()
            .filter(|_| params.is_multimodal())
            .map(|p| p[i].as_slice());
        let probs = forward_teacher(params, &data.features[i], m)?;
        correct += usize::from(argmax_pred(&probs) == data.labels[i]);
    }
    Ok(correct as f64 / probe.len() as f64)
}

/// DP-SGD training of the teacher.
///
/// Each step Poisson-samples a batch, weights the loss by the batch's class
/// weights, applies privileged dropout, clips every per-example gradient to
/// `C`, adds Gaussian noise to the sum and hands the result to the optimizer.
/// The noisy sum is divided by the expected batch size `q·N`. Empty batches
/// skip the update but still count as a step. `on_epoch` is called after each
/// log record with the current parameters.
pub fn train_teacher(
    data: &TeacherData,
    model: &ModelConfig,
    dp: &DpConfig,
    awdp: &AwdpConfig,
    dropout: f64,
    options: &TrainOptions,
    on_epoch: &mut dyn FnMut(&EpochLog, &ModelParams) -> Result<()>,
) -> Result<TeacherRun> {
    dp.validate()?;
    awdp.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyInput("private training set".into()));
    }
    if !(0.0..=1.0).contains(&dropout) {
        return Err(Error::InvalidConfig(format!(
            "dropout probability {dropout} outside [0, 1]"
        )));
    }
    let arch = model.teacher_arch(data.input_dim(), data.privileged_dim(), data.num_classes)?;
    let multimodal = arch.is_multimodal();
    let mut state = TrainState::new(ModelParams::init(arch, dp.seed)?, dp)?;
    let weighting = class_weighting(awdp);
    let mut sample_rng = stream(dp.seed, Stream::Sampling);
    let mut dropout_rng = stream(dp.seed, Stream::Dropout);
    let mut noise_rng = stream(dp.seed, Stream::Noise);
    let probe = probe_indices(data.len(), options.probe_size, dp.seed);
    let divisor = dp.q * data.len() as f64;
    let per_epoch = dp.steps_per_epoch();

    let mut log = Vec::new();
    let mut max_clipped: Option<f64> = None;
    let (mut loss_sum, mut loss_count) = (0.0, 0usize);
    for t in 0..dp.steps {
        let batch = poisson_sample(data.len(), dp.q, &mut sample_rng);
        if batch.is_empty() {
            state.skip_step();
        } else {
            let labels: Vec<usize> = batch.iter().map(|&i| data.labels[i]).collect();
            let weights = weighting.weights(&labels, data.num_classes);
            let mut sum = state.params.tensors.zeros_like();
            for &i in &batch {
                let m = match (&data.privileged, multimodal) {
                    (Some(p), true) => Some(priv_dropout(&p[i], dropout, &mut dropout_rng)),
                    _ => None,
                };
                let y = data.labels[i];
                let g = factored_ce_grad(&state.params, data.features[i].as_slice(), m.as_deref(), y, weights[y])?;
                let factor = clip_factor(g.l2_norm(), dp.clip);
                if options.check_clipping {
                    let mut clipped = g.materialize(&state.params).grads;
                    clipped.scale(factor);
                    let norm = clipped.l2_norm();
                    if norm > dp.clip + 1e-9 {
                        return Err(Error::ClippingViolation { norm, clip: dp.clip });
                    }
                    max_clipped = Some(max_clipped.map_or(norm, |v: f64| v.max(norm)));
                }
                g.accumulate(&mut sum, factor);
                loss_sum += g.loss;
                loss_count += 1;
            }
            let g_tilde = privatize_sum(sum, divisor, dp.clip, dp.sigma, &mut noise_rng)?;
            apply_update(&mut state, &g_tilde)?;
        }
        let done = t + 1;
        if done % per_epoch == 0 || done == dp.steps {
            let spent = state.ledger.epsilon()?;
            let record = EpochLog {
                step: done,
                epoch: done.div_ceil(per_epoch),
                loss: if loss_count == 0 {
                    0.0
                } else {
                    loss_sum / loss_count as f64
                },
                probe_acc: probe_accuracy(&state.params, data, &probe)?,
                epsilon: spent.is_private().then_some(spent.epsilon),
            };
            on_epoch(&record, &state.params)?;
            log.push(record);
            loss_sum = 0.0;
            loss_count = 0;
        }
    }
    Ok(TeacherRun {
        params: state.params,
        ledger: state.ledger,
        log,
        max_clipped_norm: max_clipped,
    })
}

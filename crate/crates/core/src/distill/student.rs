use rand::seq::SliceRandom;
use serde::Serialize;

use super::kd::{kd_loss_and_grad, KdConfig};
use super::probfile::{ProbRow, QueryMode, TeacherProbFile};
use crate::datamodel::Dataset;
use crate::dpsgd::{AdamW, Optimizer};
use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, FrontEnd};
use crate::model::{factored_logit_grad, forward_teacher, ModelConfig, ModelParams};
use crate::rng::{stream, Stream};

/// Queries the teacher once per auxiliary example.
///
/// In `AudioOnly` mode a multimodal teacher sees the zero privileged vector.
/// An audio-only teacher ignores the mode and the file records `audio_only`.
pub fn label_aux(
    teacher: &ModelParams,
    teacher_hash: &str,
    aux: &Dataset,
    frontend: &dyn FrontEnd,
    mode: QueryMode,
) -> Result<TeacherProbFile> {
    let priv_dim = teacher.arch().privileged_dim;
    let mode = if priv_dim.is_none() { QueryMode::AudioOnly } else { mode };
    if let (QueryMode::Privileged, Some(d)) = (mode, priv_dim) {
        if aux.privileged_dim() != Some(d) {
            return Err(Error::ModeMismatch {
                mode: mode.to_string(),
                reason: format!(
                    "teacher expects {d}-dimensional privileged vectors, auxiliary set has {:?}",
                    aux.privileged_dim()
                ),
            });
        }
    }
    let zeros = priv_dim.map(|d| vec![0.0; d]);
    let mut rows = Vec::with_capacity(aux.len());
    for ex in aux.examples() {
        let x = frontend.apply(&ex.features);
        let m = match mode {
            QueryMode::Privileged => ex.privileged.as_deref(),
            QueryMode::AudioOnly => zeros.as_deref(),
        };
        rows.push(ProbRow {
            id: ex.id.clone(),
            label: ex.label,
            probs: forward_teacher(teacher, &x, m)?,
        });
    }
    Ok(TeacherProbFile {
        num_classes: teacher.num_classes(),
        mode,
        teacher_hash: teacher_hash.to_string(),
        rows,
    })
}

/// Auxiliary features, hard labels and stored teacher probabilities, aligned.
#[derive(Debug, Clone, PartialEq)]
pub struct StudentData {
    pub features: Vec<FeatureMatrix>,
    pub labels: Vec<usize>,
    pub teacher: Vec<Vec<f64>>,
    pub num_classes: usize,
}

impl StudentData {
    /// Audio features of `aux` paired with the teacher row of each id.
    pub fn new(aux: &Dataset, frontend: &dyn FrontEnd, probs: &TeacherProbFile) -> Result<Self> {
        if probs.num_classes != aux.num_classes() {
            return Err(Error::ShapeMismatch(format!(
                "probability file has K={}, auxiliary set has K={}",
                probs.num_classes,
                aux.num_classes()
            )));
        }
        let by_id = probs.by_id();
        let teacher = aux
            .examples()
            .iter()
            .map(|e| {
                by_id
                    .get(e.id.as_str())
                    .map(|r| r.probs.clone())
                    .ok_or_else(|| Error::MissingTeacherProbs(e.id.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            features: aux.features(frontend),
            labels: aux.labels(),
            teacher,
            num_classes: aux.num_classes(),
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudentEpochLog {
    pub epoch: usize,
    pub loss: f64,
}

pub struct StudentRun {
    pub params: ModelParams,
    pub log: Vec<StudentEpochLog>,
}

/// Non-private minibatch training of an audio-only student on the KD objective.
///
/// Reads nothing but auxiliary features, auxiliary labels and stored teacher
/// probabilities.
pub fn train_student(data: &StudentData, kd: &KdConfig, model: &ModelConfig) -> Result<StudentRun> {
    if data.is_empty() {
        return Err(Error::EmptyInput("auxiliary set".into()));
    }
    let arch = model.student_arch(data.features[0].dim(), data.num_classes);
    train_student_from(ModelParams::init(arch, kd.seed)?, data, kd)
}

/// As [`train_student`], starting from `init` instead of a seeded initialization.
pub fn train_student_from(init: ModelParams, data: &StudentData, kd: &KdConfig) -> Result<StudentRun> {
    kd.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyInput("auxiliary set".into()));
    }
    if init.is_multimodal() {
        return Err(Error::ShapeMismatch("student networks are audio-only".into()));
    }
    let mut params = init;
    let mut opt = AdamW::new(kd.lr, kd.weight_decay, 0.9, 0.999, 1e-8);
    let mut rng = stream(kd.seed, Stream::Student);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut log = Vec::with_capacity(kd.epochs);
    for epoch in 1..=kd.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for batch in order.chunks(kd.batch_size) {
            let mut grad = params.tensors.zeros_like();
            let scale = 1.0 / batch.len() as f64;
            for &i in batch {
                let g = factored_logit_grad(&params, data.features[i].as_slice(), None, |z| {
                    kd_loss_and_grad(z, data.labels[i], &data.teacher[i], kd)
                })?;
                g.accumulate(&mut grad, scale);
                loss_sum += g.loss;
            }
            let mut next = params.tensors.clone();
            opt.step(&mut next, &grad);
            if let Some(name) = next.first_non_finite() {
                return Err(Error::NonFiniteUpdate(format!(
                    "student tensor `{name}` in epoch {epoch}"
                )));
            }
            params.tensors = next;
        }
        log.push(StudentEpochLog {
            epoch,
            loss: loss_sum / data.len() as f64,
        });
    }
    Ok(StudentRun { params, log })
}

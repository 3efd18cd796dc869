use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::RunConfig;
use crate::accountant::{epsilon_curve, LedgerRecord, PrivacyLedger, PrivacySpent};
use crate::datamodel::{
    read_dataset, read_split, remainder_ids, split, synth_generate, write_dataset, write_split, Dataset, MANIFEST_FILE,
};
use crate::distill::{label_aux, train_student, QueryMode, StudentData, TeacherProbFile};
use crate::dpsgd::{train_teacher, EpochLog, TeacherData, TrainOptions};
use crate::error::{Error, Result};
use crate::features::frontend;
use crate::metrics::{argmax_pred, evaluate, EvalReport};
use crate::model::{forward_teacher, load_checkpoint, save_checkpoint, ModelParams};

/// Fixed output layout below a run directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunLayout {
    pub root: PathBuf,
}

impl RunLayout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn data(&self) -> PathBuf {
        self.root.join("data")
    }

    pub fn priv_dir(&self) -> PathBuf {
        self.data().join("priv")
    }

    pub fn aux_dir(&self) -> PathBuf {
        self.data().join("aux")
    }

    pub fn test_dir(&self) -> PathBuf {
        self.data().join("test")
    }

    pub fn split_file(&self) -> PathBuf {
        self.data().join("split.json")
    }

    pub fn teacher_dir(&self) -> PathBuf {
        self.root.join("teacher")
    }

    pub fn teacher_checkpoint(&self) -> PathBuf {
        self.teacher_dir().join("teacher.dpm")
    }

    pub fn ledger_file(&self) -> PathBuf {
        self.teacher_dir().join("ledger.json")
    }

    pub fn probs_file(&self) -> PathBuf {
        self.root.join("probs").join("aux_probs.csv")
    }

    pub fn student_dir(&self) -> PathBuf {
        self.root.join("student")
    }

    pub fn student_checkpoint(&self) -> PathBuf {
        self.student_dir().join("student.dpm")
    }

    pub fn reports(&self) -> PathBuf {
        self.root.join("reports")
    }
}

pub fn manifest_in(dir: &Path) -> PathBuf {
    dir.join(MANIFEST_FILE)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenDataSummary {
    pub priv_counts: Vec<usize>,
    pub aux_counts: Vec<usize>,
    pub test_counts: Vec<usize>,
}

/// Generates (or reads) the dataset and writes the recording-disjoint split.
pub fn cmd_gen_data(cfg: &RunConfig) -> Result<GenDataSummary> {
    let layout = RunLayout::new(&cfg.out_dir);
    let all = match &cfg.data.manifest {
        Some(path) => read_dataset(path, cfg.num_classes())?,
        None => synth_generate(&cfg.data.synth, cfg.seed)?,
    };
    let manifest = split(&all, cfg.data.n_priv, cfg.data.n_aux, cfg.seed)?;
    let mut rest = remainder_ids(&all, &manifest);
    rest.truncate(cfg.data.n_test);
    let priv_set = all.subset(&manifest.priv_ids)?;
    let aux_set = all.subset(&manifest.aux_ids)?;
    let test_set = all.subset(&rest)?;
    drop(all);
    write_dataset(&layout.priv_dir(), &priv_set)?;
    write_dataset(&layout.aux_dir(), &aux_set)?;
    write_dataset(&layout.test_dir(), &test_set)?;
    write_split(&layout.split_file(), &manifest)?;
    write_text(&layout.root.join("config.toml"), &cfg.to_toml())?;
    Ok(GenDataSummary {
        priv_counts: priv_set.class_counts().to_vec(),
        aux_counts: aux_set.class_counts().to_vec(),
        test_counts: test_set.class_counts().to_vec(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TeacherSummary {
    pub checkpoint_hash: String,
    pub ledger: LedgerRecord,
    pub log: Vec<EpochLog>,
}

/// Trains the DP teacher on `data/priv`; writes the checkpoint, per-epoch
/// checkpoints, the privacy ledger and the training log under `teacher/`.
pub fn cmd_train_teacher(cfg: &RunConfig) -> Result<TeacherSummary> {
    let layout = RunLayout::new(&cfg.out_dir);
    let fe = frontend(&cfg.frontend)?;
    let data = {
        let priv_set = read_dataset(&manifest_in(&layout.priv_dir()), cfg.num_classes())?;
        TeacherData::from_dataset(&priv_set, fe.as_ref())
    };
    let dir = layout.teacher_dir();
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let log_path = dir.join("train_log.jsonl");
    let mut log_file = fs::File::create(&log_path).map_err(|e| Error::io(&log_path, e))?;
    let epoch_dir = dir.join("epochs");
    let mut on_epoch = |rec: &EpochLog, params: &ModelParams| -> Result<()> {
        writeln!(log_file, "{}", serde_json::to_string(rec)?).map_err(|e| Error::io(&log_path, e))?;
        save_checkpoint(params, &epoch_dir.join(format!("epoch-{:03}.dpm", rec.epoch)))?;
        Ok(())
    };
    let run = train_teacher(
        &data,
        &cfg.model,
        &cfg.dp,
        &cfg.awdp,
        cfg.dropout,
        &TrainOptions::default(),
        &mut on_epoch,
    )?;
    let hash = save_checkpoint(&run.params, &layout.teacher_checkpoint())?;
    let ledger = run.ledger.record()?;
    write_text(&layout.ledger_file(), &serde_json::to_string_pretty(&ledger)?)?;
    let mut csv = String::from("epoch,step,loss,probe_acc,epsilon\n");
    for r in &run.log {
        let eps = r.epsilon.map_or_else(|| "no DP".to_string(), |e| format!("{e:.6}"));
        csv.push_str(&format!(
            "{},{},{:.6},{:.6},{}\n",
            r.epoch, r.step, r.loss, r.probe_acc, eps
        ));
    }
    write_text(&dir.join("train_log.csv"), &csv)?;
    Ok(TeacherSummary {
        checkpoint_hash: hash,
        ledger,
        log: run.log,
    })
}

/// ε and best order for `steps` steps, plus the per-epoch curve when `epochs > 0`.
pub fn cmd_epsilon(q: f64, sigma: f64, steps: u64, delta: f64, epochs: u64) -> Result<(PrivacySpent, Vec<f64>)> {
    let spent = PrivacyLedger::new(q, sigma, delta)?.at_steps(steps).epsilon()?;
    let curve = if epochs > 0 {
        epsilon_curve(q, sigma, delta, (1.0 / q).ceil() as u64, epochs)?
    } else {
        Vec::new()
    };
    Ok((spent, curve))
}

/// Queries the teacher once on `data/aux` and writes `probs/aux_probs.csv`.
pub fn cmd_label_aux(cfg: &RunConfig) -> Result<TeacherProbFile> {
    let layout = RunLayout::new(&cfg.out_dir);
    let out = layout.probs_file();
    if out.exists() {
        return Err(Error::OneShotViolation(out));
    }
    let (teacher, hash) = load_checkpoint(&layout.teacher_checkpoint())?;
    let aux = read_dataset(&manifest_in(&layout.aux_dir()), cfg.num_classes())?;
    let fe = frontend(&cfg.frontend)?;
    let probs = label_aux(&teacher, &hash, &aux, fe.as_ref(), cfg.query_mode)?;
    probs.write_once(&out)?;
    Ok(probs)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudentSummary {
    pub checkpoint_hash: String,
    pub final_loss: f64,
}

/// Distills the audio-only student from `data/aux` and `probs/aux_probs.csv` only.
pub fn cmd_train_student(cfg: &RunConfig) -> Result<StudentSummary> {
    let layout = RunLayout::new(&cfg.out_dir);
    let aux = read_dataset(&manifest_in(&layout.aux_dir()), cfg.num_classes())?;
    let probs = TeacherProbFile::read(&layout.probs_file())?;
    let fe = frontend(&cfg.frontend)?;
    let data = StudentData::new(&aux, fe.as_ref(), &probs)?;
    drop(aux);
    let run = train_student(&data, &cfg.kd, &cfg.model)?;
    let hash = save_checkpoint(&run.params, &layout.student_checkpoint())?;
    let mut log = String::new();
    for r in &run.log {
        log.push_str(&serde_json::to_string(r)?);
        log.push('\n');
    }
    write_text(&layout.student_dir().join("train_log.jsonl"), &log)?;
    Ok(StudentSummary {
        checkpoint_hash: hash,
        final_loss: run.log.last().map_or(0.0, |r| r.loss),
    })
}

/// How a checkpoint is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalTarget {
    /// The released artifact: audio-only networks only.
    Released,
    /// A (possibly multimodal) teacher queried in the given mode.
    Teacher(QueryMode),
}

/// Predictions of `params` on every example of `data`.
pub fn predict(
    params: &ModelParams,
    data: &Dataset,
    fe: &dyn crate::features::FrontEnd,
    target: EvalTarget,
) -> Result<Vec<usize>> {
    let priv_dim = params.arch().privileged_dim;
    if let (EvalTarget::Released, Some(_)) = (target, priv_dim) {
        return Err(Error::ReleaseRefused(
            "only audio-only students are released; evaluate a multimodal teacher with a query mode".into(),
        ));
    }
    if let (EvalTarget::Teacher(QueryMode::Privileged), Some(d)) = (target, priv_dim) {
        if data.privileged_dim() != Some(d) {
            return Err(Error::ModeMismatch {
                mode: "privileged".into(),
                reason: "evaluation manifest lacks matching privileged vectors".into(),
            });
        }
    }
    let zeros = priv_dim.map(|d| vec![0.0; d]);
    data.examples()
        .iter()
        .map(|ex| {
            let m = match (target, priv_dim) {
                (_, None) => None,
                (EvalTarget::Teacher(QueryMode::Privileged), Some(_)) => ex.privileged.as_deref(),
                _ => zeros.as_deref(),
            };
            Ok(argmax_pred(&forward_teacher(params, &fe.apply(&ex.features), m)?))
        })
        .collect()
}

/// Evaluates a checkpoint on a dataset manifest.
pub fn cmd_evaluate(cfg: &RunConfig, checkpoint: &Path, manifest: &Path, target: EvalTarget) -> Result<EvalReport> {
    let (params, _) = load_checkpoint(checkpoint)?;
    let data = read_dataset(manifest, cfg.num_classes())?;
    let fe = frontend(&cfg.frontend)?;
    let preds = predict(&params, &data, fe.as_ref(), target)?;
    evaluate(&preds, &data.labels(), cfg.num_classes())
}

/// Outcome of a full pipeline run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineResult {
    pub ledger: LedgerRecord,
    /// DP-direct teacher on the test set, queried audio-only.
    pub teacher: EvalReport,
    /// Released student on the test set.
    pub student: EvalReport,
}

/// gen-data, train-teacher, label-aux, train-student, then evaluation of both models on `data/test`.
pub fn run_pipeline(cfg: &RunConfig) -> Result<PipelineResult> {
    let layout = RunLayout::new(&cfg.out_dir);
    cmd_gen_data(cfg)?;
    let teacher = cmd_train_teacher(cfg)?;
    cmd_label_aux(cfg)?;
    cmd_train_student(cfg)?;
    let test = manifest_in(&layout.test_dir());
    let t = cmd_evaluate(
        cfg,
        &layout.teacher_checkpoint(),
        &test,
        EvalTarget::Teacher(QueryMode::AudioOnly),
    )?;
    let s = cmd_evaluate(cfg, &layout.student_checkpoint(), &test, EvalTarget::Released)?;
    write_text(
        &layout.reports().join("teacher.json"),
        &serde_json::to_string_pretty(&t)?,
    )?;
    write_text(
        &layout.reports().join("student.json"),
        &serde_json::to_string_pretty(&s)?,
    )?;
    Ok(PipelineResult {
        ledger: teacher.ledger,
        teacher: t,
        student: s,
    })
}

/// Reads the split written by `cmd_gen_data`.
pub fn load_split(cfg: &RunConfig) -> Result<crate::datamodel::SplitManifest> {
    read_split(&RunLayout::new(&cfg.out_dir).split_file())
}

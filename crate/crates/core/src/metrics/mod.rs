//! Class-balanced evaluation and collapse diagnostics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maj-Pred at or above this, together with near-chance balanced accuracy, flags collapse.
pub const COLLAPSE_MAJ_PRED: f64 = 0.95;
/// Balanced-accuracy margin above `1/K` still counted as chance level.
pub const COLLAPSE_BAL_ACC_MARGIN: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub num_classes: usize,
    pub n: usize,
    pub macro_f1: f64,
    pub bal_acc: f64,
    pub maj_pred: f64,
    pub overall_acc: f64,
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
    pub f1: Vec<f64>,
    /// `confusion[true][pred]`
    pub confusion: Vec<Vec<usize>>,
    pub collapse_flag: bool,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Index of the largest probability; ties go to the lowest index.
pub fn argmax_pred(probs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &p) in probs.iter().enumerate().skip(1) {
        if p > probs[best] {
            best = i;
        }
    }
    best
}

pub fn evaluate(preds: &[usize], labels: &[usize], num_classes: usize) -> Result<EvalReport> {
    if preds.is_empty() {
        return Err(Error::EmptyInput("no predictions to evaluate".into()));
    }
    if preds.len() != labels.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} predictions for {} labels",
            preds.len(),
            labels.len()
        )));
    }
    if let Some(bad) = preds.iter().chain(labels).find(|&&c| c >= num_classes) {
        return Err(Error::ShapeMismatch(format!(
            "class index {bad} out of range for K={num_classes}"
        )));
    }
    let k = num_classes;
    let mut confusion = vec![vec![0usize; k]; k];
    for (&p, &y) in preds.iter().zip(labels) {
        confusion[y][p] += 1;
    }
    let n = preds.len();
    let tp: Vec<usize> = (0..k).map(|c| confusion[c][c]).collect();
    let row: Vec<usize> = confusion.iter().map(|r| r.iter().sum()).collect();
    let col: Vec<usize> = (0..k).map(|c| confusion.iter().map(|r| r[c]).sum()).collect();
    let precision: Vec<f64> = (0..k).map(|c| ratio(tp[c], col[c])).collect();
    let recall: Vec<f64> = (0..k).map(|c| ratio(tp[c], row[c])).collect();
    let f1: Vec<f64> = precision
        .iter()
        .zip(&recall)
        .map(|(&p, &r)| if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) })
        .collect();
    let macro_f1 = f1.iter().sum::<f64>() / k as f64;
    let bal_acc = recall.iter().sum::<f64>() / k as f64;
    let maj_pred = ratio(*col.iter().max().unwrap(), n);
    let overall_acc = ratio(tp.iter().sum(), n);
    let collapse_flag = maj_pred >= COLLAPSE_MAJ_PRED && bal_acc <= 1.0 / k as f64 + COLLAPSE_BAL_ACC_MARGIN;
    Ok(EvalReport {
        num_classes: k,
        n,
        macro_f1,
        bal_acc,
        maj_pred,
        overall_acc,
        precision,
        recall,
        f1,
        confusion,
        collapse_flag,
    })
}

impl EvalReport {
    pub const CSV_HEADER: &'static str = "macro_f1,bal_acc,maj_pred,overall_acc,collapse_flag";

    /// Aggregate fields as one CSV row matching [`EvalReport::CSV_HEADER`].
    pub fn csv_row(&self) -> String {
        format!(
            "{:.6},{:.6},{:.6},{:.6},{}",
            self.macro_f1, self.bal_acc, self.maj_pred, self.overall_acc, self.collapse_flag
        )
    }
}

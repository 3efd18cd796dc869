use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::commands::{run_pipeline, PipelineResult};
use super::config::RunConfig;
use crate::error::{Error, Result};
use crate::metrics::EvalReport;

/// Axes of a sweep; each run is one point of the cross product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    pub sigma: Vec<f64>,
    pub awdp: Vec<bool>,
    pub dsaf: Vec<bool>,
    pub n_aux: Vec<usize>,
    pub seeds: Vec<u64>,
}

impl SweepGrid {
    /// The single point given by `cfg`.
    pub fn point(cfg: &RunConfig) -> Self {
        Self {
            sigma: vec![cfg.dp.sigma],
            awdp: vec![cfg.awdp.enabled],
            dsaf: vec![cfg.frontend.frontend == "dsaf"],
            n_aux: vec![cfg.data.n_aux],
            seeds: vec![cfg.seed],
        }
    }

    pub fn len(&self) -> usize {
        self.sigma.len() * self.awdp.len() * self.dsaf.len() * self.n_aux.len() * self.seeds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cells in axis order: σ, AW-DP, DSAF, |D_aux|, seed (last varies fastest).
    pub fn cells(&self) -> Vec<SweepCell> {
        let mut out = Vec::with_capacity(self.len());
        for &sigma in &self.sigma {
            for &awdp in &self.awdp {
                for &dsaf in &self.dsaf {
                    for &n_aux in &self.n_aux {
                        for &seed in &self.seeds {
                            out.push(SweepCell {
                                sigma,
                                awdp,
                                dsaf,
                                n_aux,
                                seed,
                            });
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepCell {
    pub sigma: f64,
    pub awdp: bool,
    pub dsaf: bool,
    pub n_aux: usize,
    pub seed: u64,
}

fn on_off(b: bool) -> &'static str {
    if b {
        "on"
    } else {
        "off"
    }
}

impl SweepCell {
    pub fn name(&self) -> String {
        format!(
            "sigma={}_aw={}_dsaf={}_naux={}_seed={}",
            self.sigma,
            on_off(self.awdp),
            on_off(self.dsaf),
            self.n_aux,
            self.seed
        )
    }

    /// `base` with this cell's settings, writing below `root/cells/<name>`.
    pub fn config(&self, base: &RunConfig, root: &Path) -> Result<RunConfig> {
        let mut cfg = base.clone();
        cfg.dp.sigma = self.sigma;
        cfg.awdp.enabled = self.awdp;
        cfg.frontend.frontend = if self.dsaf { "dsaf" } else { "fixlen" }.into();
        cfg.data.n_aux = self.n_aux;
        cfg.seed = self.seed;
        cfg.out_dir = root.join("cells").join(self.name());
        cfg.with_overrides::<&str>(&[])
    }
}

pub const SWEEP_CSV_HEADER: &str = "sigma,awdp,dsaf,n_aux,seed,epsilon,\
teacher_macro_f1,teacher_bal_acc,teacher_maj_pred,teacher_overall_acc,teacher_collapse_flag,\
student_macro_f1,student_bal_acc,student_maj_pred,student_overall_acc,student_collapse_flag";

pub fn sweep_row(cell: &SweepCell, result: &PipelineResult) -> String {
    let eps = result
        .ledger
        .epsilon
        .map_or_else(|| "no DP".to_string(), |e| format!("{e:.6}"));
    let report = |r: &EvalReport| r.csv_row();
    format!(
        "{},{},{},{},{},{},{},{}",
        cell.sigma,
        on_off(cell.awdp),
        on_off(cell.dsaf),
        cell.n_aux,
        cell.seed,
        eps,
        report(&result.teacher),
        report(&result.student)
    )
}

/// Runs every cell from scratch (clearing its directory) and returns the CSV text.
pub fn cmd_sweep(base: &RunConfig, grid: &SweepGrid, mut on_row: impl FnMut(&str)) -> Result<String> {
    if grid.is_empty() {
        return Err(Error::InvalidConfig("sweep grid has an empty axis".into()));
    }
    let root = base.out_dir.clone();
    let mut csv = format!("{SWEEP_CSV_HEADER}\n");
    for cell in grid.cells() {
        let cfg = cell.config(base, &root)?;
        if cfg.out_dir.exists() {
            fs::remove_dir_all(&cfg.out_dir).map_err(|e| Error::io(&cfg.out_dir, e))?;
        }
        let row = sweep_row(&cell, &run_pipeline(&cfg)?);
        on_row(&row);
        csv.push_str(&row);
        csv.push('\n');
    }
    let path = root.join("sweep.csv");
    fs::create_dir_all(&root).map_err(|e| Error::io(&root, e))?;
    fs::write(&path, &csv).map_err(|e| Error::io(&path, e))?;
    Ok(csv)
}

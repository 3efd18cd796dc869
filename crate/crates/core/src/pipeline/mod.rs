//! Run configuration and the end-to-end commands behind the command-line tool.

mod commands;
mod config;
mod sweep;

pub use commands::{
    cmd_epsilon, cmd_evaluate, cmd_gen_data, cmd_label_aux, cmd_train_student, cmd_train_teacher, load_split,
    manifest_in, predict, run_pipeline, EvalTarget, GenDataSummary, PipelineResult, RunLayout, StudentSummary,
    TeacherSummary,
};
pub use config::{DataConfig, RunConfig};
pub use sweep::{cmd_sweep, sweep_row, SweepCell, SweepGrid, SWEEP_CSV_HEADER};

//! One-shot teacher labeling of the auxiliary set, the distillation loss and
//! non-private student training.

mod kd;
mod probfile;
mod student;

pub use kd::{kd_loss, kd_loss_and_grad, temper, KdConfig};
pub use probfile::{ProbRow, QueryMode, TeacherProbFile};
pub use student::{label_aux, train_student, train_student_from, StudentData, StudentEpochLog, StudentRun};

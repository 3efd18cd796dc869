// `!(x > 0.0)` checks deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod accountant;
pub mod datamodel;
pub mod distill;
pub mod dpsgd;
pub mod error;
pub mod features;
pub mod metrics;
pub mod model;
pub mod pipeline;
pub mod registry;
pub mod rng;

pub use error::{Error, Result};

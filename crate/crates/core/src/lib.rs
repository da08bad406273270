//! Hybrid predictive modeling: penalized-regression feature selection feeding
//! tree-ensemble learners, with the supporting data, tuning, evaluation and
//! simulation machinery.

pub mod dataframe;
pub mod error;
pub mod featgen;
pub mod gbt;
pub mod metrics;
pub mod pipeline;
pub mod regpath;
pub mod rng;
pub mod simgen;
pub mod tuner;

pub use error::{Error, Result};

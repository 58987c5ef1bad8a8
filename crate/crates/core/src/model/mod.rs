//! Two parallel backbones with identity heads and a dot-product morph score.
//!
//! Both networks classify identities. Their feature vectors `f1`, `f2`
//! meet in `D = f1 . f2`, trained with binary cross-entropy against the
//! cross-label `t = [y1 != y2]`. Polarity: a high `sigmoid(D)` means morph.

mod config;
mod dual;
mod gradcheck;
mod loss;
mod train;

pub use config::{BackboneConfig, TrainConfig};
pub use dual::{preprocess, Architecture, DualModel, PairOutput};
pub use gradcheck::{check_random_model, GradCheckSetup};
pub use loss::{cross_labels, loss_identity, loss_morph, total_loss};
pub use train::{
    load_training_set, save_trace, train, write_trace, TraceRow, TrainOutcome, TrainingSet,
};

use thiserror::Error;

use crate::numgrad::NumgradError;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("label {label} out of range for {classes} classes")]
    BadLabel { label: usize, classes: usize },
    #[error("training diverged at step {step}: {detail}")]
    Diverged { step: usize, detail: String },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("{path}: {detail}")]
    Io { path: String, detail: String },
    #[error(transparent)]
    Numgrad(#[from] NumgradError),
    #[error(transparent)]
    Image(#[from] crate::morph::MorphError),
}

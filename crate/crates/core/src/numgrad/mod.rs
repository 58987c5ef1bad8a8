//! Dense `f64` arrays with a small static-graph reverse-mode differentiator.
//!
//! The op set is exactly what the fused detector needs: matrix products,
//! bias add, ReLU, row-wise dot, softmax cross-entropy, sigmoid binary
//! cross-entropy, scaling and addition. [`grad_check`] compares analytic
//! gradients against central finite differences, [`sgd_step`] applies plain
//! gradient descent, and [`checkpoint`] persists parameters bit-exactly.

mod array;
mod check;
pub mod checkpoint;
mod graph;
mod optim;
mod params;

pub use array::DenseArray;
pub use check::{grad_check, GradCheckReport, ParamCheck};
pub use graph::{bce_with_logit, log_sum_exp, sigmoid, softmax_rows, Graph, NodeId, Op};
pub use optim::sgd_step;
pub use params::ParamStore;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum NumgradError {
    #[error("shape {shape:?} does not describe {len} values")]
    BadShape { shape: Vec<usize>, len: usize },
    #[error("shape mismatch at {node}: {detail}")]
    ShapeMismatch { node: String, detail: String },
    #[error("missing input '{0}'")]
    MissingInput(String),
    #[error("no output named '{0}'")]
    MissingOutput(String),
    #[error("unknown parameter '{0}'")]
    UnknownParam(String),
    #[error("non-finite value produced at {node}")]
    NonFinite { node: String },
    #[error("label {value} at {node} is not a class index in [0, {classes})")]
    BadLabel {
        node: String,
        value: f64,
        classes: usize,
    },
    #[error("loss must be scalar, got shape {0:?}")]
    NotScalar(Vec<usize>),
    #[error("backward called before forward")]
    NoForward,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

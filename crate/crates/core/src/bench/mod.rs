//! Protocol scoring and APCER/BPCER evaluation.
//!
//! Convention: a higher score means morph, and an image is classified as a
//! morph when `score >= threshold`.

mod metrics;
mod protocol;
mod report;
mod scores;

pub use metrics::{apcer_at_bpcer, bpcer_at_apcer, det_curve, DetCurve, DetPoint};
pub use protocol::{score_protocol, ProtocolManifest, ScoreMode};
pub use report::{evaluate, report_table, save_det, save_report, ProtocolResult, DELTAS};
pub use scores::{ScoreRow, ScoreSet, Truth};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("both bona fide and morph scores are required")]
    SingleClass,
    #[error("delta must lie in (0, 1), got {0}")]
    BadDelta(f64),
    #[error("score {value} for '{path}' is not finite")]
    NonFinite { path: String, value: f64 },
    #[error("{path}:{line}: {detail}")]
    Parse {
        path: String,
        line: usize,
        detail: String,
    },
    #[error("protocol '{name}': {detail}")]
    Protocol { name: String, detail: String },
    #[error("{path}: {detail}")]
    Io { path: String, detail: String },
}

pub(crate) fn io_err(path: &std::path::Path, e: impl std::fmt::Display) -> BenchError {
    BenchError::Io {
        path: path.display().to_string(),
        detail: e.to_string(),
    }
}

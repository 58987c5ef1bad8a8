//! Dataset curation by joint quality-score thresholding.
//!
//! A labelled subset (accept/reject) gives, per scorer, FAR/FRR curves over
//! candidate thresholds; each scorer's threshold sits at its equal error
//! point and an image survives only if it passes every threshold.

mod curve;
mod filter;
pub mod io;
mod scorers;

pub use curve::{eer_threshold, far_frr, CurvePoint, ErrorCurve};
pub use filter::{joint_filter, stratified_sample, QualityVector, Threshold};
pub use scorers::{
    blur_score, illumination_score, BlurScorer, IlluminationScorer, QualityScorer, ScorerRegistry,
};

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum QualityError {
    #[error("unknown scorer '{0}'")]
    UnknownScorer(String),
    #[error("both accept and reject labels are required")]
    SingleClass,
    #[error("no images to sample from")]
    EmptyDataset,
    #[error("need at least 2 bins, got {0}")]
    TooFewBins(usize),
    #[error("no threshold for scorer '{0}'")]
    MissingThreshold(String),
    #[error("image '{image}' has no score for '{scorer}'")]
    MissingScore { image: String, scorer: String },
    #[error("score {value} for '{image}' is not finite")]
    NonFinite { image: String, value: f64 },
    #[error("{path}:{line}: {detail}")]
    Parse {
        path: String,
        line: usize,
        detail: String,
    },
    #[error("{path}: {detail}")]
    Io { path: String, detail: String },
}

/// Whether larger scores mean better quality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    #[default]
    HigherIsBetter,
    LowerIsBetter,
}

impl Direction {
    /// Whether `score` passes threshold `theta` (boundary inclusive).
    #[inline]
    pub fn passes(self, score: f64, theta: f64) -> bool {
        match self {
            Direction::HigherIsBetter => score >= theta,
            Direction::LowerIsBetter => score <= theta,
        }
    }

    pub fn reversed(self) -> Self {
        match self {
            Direction::HigherIsBetter => Direction::LowerIsBetter,
            Direction::LowerIsBetter => Direction::HigherIsBetter,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::HigherIsBetter => "higher_is_better",
            Direction::LowerIsBetter => "lower_is_better",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "higher_is_better" | "higher" => Ok(Direction::HigherIsBetter),
            "lower_is_better" | "lower" => Ok(Direction::LowerIsBetter),
            other => Err(format!("unknown direction '{other}'")),
        }
    }
}

/// Manual acceptance decision for one image.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Accept,
    Reject,
}

impl FromStr for Decision {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "accept" => Ok(Decision::Accept),
            "reject" => Ok(Decision::Reject),
            other => Err(format!("expected accept or reject, got '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AcceptanceLabel {
    pub image: String,
    pub decision: Decision,
}

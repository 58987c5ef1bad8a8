//! Dual-labelled training corpus planning.
//!
//! Identities are split into two disjoint halves, one per network. A morph
//! always takes its first source from half 1 and its second from half 2,
//! so the two heads receive different labels (`y1 != y2`). Bona fide images
//! and selfmorphs carry the same label for both heads.

mod catalog;
mod generate;
pub mod manifest;
mod plan;

pub use catalog::{CatalogImage, IdentityCatalog, LANDMARK_EXTENSION};
pub use generate::{harvest, pair_rows, render_pairs, HarvestOptions, HarvestOutput};
pub use plan::{
    assign_labels, balance, kind_counts, output_path, plan_morphs, plan_selfmorphs,
    split_identities, BonaFideMix, ImageRef, PairingPlan, PlannedPair, SampleKind, SampleRecord,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarvestError {
    #[error("catalog: {0}")]
    Catalog(String),
    #[error("need at least 2 identities, got {0}")]
    TooFewIdentities(usize),
    #[error(
        "requested {requested} morph pairs but only {available} distinct cross-half pairs exist"
    )]
    TooManyPairs { requested: usize, available: usize },
    #[error("no identity has two or more images; selfmorphs impossible")]
    NoSelfmorphCandidates,
    #[error("identity '{0}' has no class index")]
    UnknownIdentity(String),
    #[error("cannot balance: {0} group is empty")]
    EmptyGroup(&'static str),
    #[error("{path}:{line}: {detail}")]
    Manifest {
        path: String,
        line: usize,
        detail: String,
    },
    #[error("{path}: {detail}")]
    Io { path: String, detail: String },
}

//! Landmark-driven face morphing.
//!
//! Geometry is averaged between the two landmark sets, each face is
//! piecewise-affinely warped onto the average, and the warps are blended
//! inside the face hull. The background comes from one of the sources.

mod blend;
pub mod delaunay;
mod image;
mod landmarks;
mod warp;

pub use blend::{morph, selfmorph, BackgroundSource, MorphOutput, DEFAULT_ALPHA};
pub use delaunay::{triangulate, TriangleMesh, MIN_TRIANGLE_AREA};
pub use image::Image;
pub use landmarks::{average_landmarks, LandmarkSet, Point};
pub use warp::{affine_from_triangles, boundary_anchors, sample_bilinear, warp, Affine};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MorphError {
    #[error("invalid image: {0}")]
    InvalidImage(String),
    #[error("invalid landmarks: {0}")]
    InvalidLandmarks(String),
    #[error("landmark count mismatch: {left} vs {right}")]
    LandmarkCount { left: usize, right: usize },
    #[error("image geometry mismatch: {left:?} vs {right:?} (width, height, channels)")]
    DimensionMismatch {
        left: (usize, usize, usize),
        right: (usize, usize, usize),
    },
    #[error("blending coefficient {0} outside [0, 1]")]
    InvalidAlpha(f64),
    #[error("triangulation failed: {0}")]
    Triangulation(String),
    #[error("degenerate triangle: {0}")]
    DegenerateTriangle(String),
    #[error("{path}: {detail}")]
    Io { path: String, detail: String },
}

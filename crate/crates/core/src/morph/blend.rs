use super::delaunay::{convex_hull, hull_contains};
use super::{average_landmarks, warp, Image, LandmarkSet, MorphError, Point};

/// Blending coefficient used for generated morphs and all selfmorphs.
pub const DEFAULT_ALPHA: f64 = 0.5;

/// Which source image supplies pixels outside the face hull.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BackgroundSource {
    First,
    Second,
}

impl BackgroundSource {
    /// Uniform choice driven by the caller's generator.
    pub fn random<R: rand::Rng + ?Sized>(rng: &mut R) -> Self {
        if rng.random::<bool>() {
            Self::First
        } else {
            Self::Second
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MorphOutput {
    pub image: Image,
    /// Landmark geometry of the output face.
    pub landmarks: LandmarkSet,
}

/// Landmark morph of two faces.
///
/// Both inputs are warped onto the blended landmark geometry and mixed as
/// `(1 - alpha) A + alpha B` inside the convex hull of that geometry;
/// outside it the chosen background image is copied unchanged.
pub fn morph(
    a: &Image,
    la: &LandmarkSet,
    b: &Image,
    lb: &LandmarkSet,
    alpha: f64,
    background: BackgroundSource,
) -> Result<MorphOutput, MorphError> {
    if !a.same_geometry(b) {
        return Err(MorphError::DimensionMismatch {
            left: (a.width(), a.height(), a.channels()),
            right: (b.width(), b.height(), b.channels()),
        });
    }
    let target = average_landmarks(la, lb, alpha)?;
    let warped_a = warp(a, la, &target)?;
    let warped_b = warp(b, lb, &target)?;
    let hull = convex_hull(target.points());
    let bg = match background {
        BackgroundSource::First => a,
        BackgroundSource::Second => b,
    };

    let mut out = bg.clone();
    let channels = a.channels();
    for y in 0..a.height() {
        for x in 0..a.width() {
            if !hull_contains(&hull, Point::new(x as f64, y as f64)) {
                continue;
            }
            let pa = warped_a.pixel_slice(x, y);
            let pb = warped_b.pixel_slice(x, y);
            let dst = out.pixel_slice_mut(x, y);
            for c in 0..channels {
                let v = (1.0 - alpha) * pa[c] as f64 + alpha * pb[c] as f64;
                dst[c] = v.clamp(0.0, 1.0) as f32;
            }
        }
    }
    Ok(MorphOutput {
        image: out,
        landmarks: target,
    })
}

/// Morph of two captures of the same identity at `alpha = 0.5`.
///
/// The caller asserts the shared identity; downstream the result is
/// labelled bona fide.
pub fn selfmorph(
    a: &Image,
    la: &LandmarkSet,
    b: &Image,
    lb: &LandmarkSet,
    background: BackgroundSource,
) -> Result<MorphOutput, MorphError> {
    morph(a, la, b, lb, DEFAULT_ALPHA, background)
}

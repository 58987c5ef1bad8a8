//! Seeded synthetic faces for end-to-end runs without real data.
//!
//! Each identity is a template: an elliptical face with its own shape, tone
//! and grating texture, plus eyes, nose and mouth. A capture warps the
//! template onto jittered landmarks and varies brightness and noise.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::harvest::{CatalogImage, IdentityCatalog};
use crate::morph::{warp, Image, LandmarkSet, MorphError, Point};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub identities: usize,
    pub captures: usize,
    /// Square image side in pixels.
    pub size: usize,
    /// Whole-face shift range in pixels.
    pub shift: f64,
    /// Per-landmark displacement range in pixels.
    pub jitter: f64,
    /// Uniform pixel noise amplitude.
    pub noise: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            identities: 20,
            captures: 16,
            size: 64,
            shift: 0.5,
            jitter: 0.5,
            noise: 0.02,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticIdentity {
    pub id: String,
    pub template: Image,
    pub landmarks: LandmarkSet,
}

struct Grating {
    kx: f64,
    ky: f64,
    phase: f64,
    amp: f64,
}

fn ellipse_inside(x: f64, y: f64, cx: f64, cy: f64, rx: f64, ry: f64) -> bool {
    let (dx, dy) = ((x - cx) / rx, (y - cy) / ry);
    dx * dx + dy * dy <= 1.0
}

/// One identity template and its twelve landmarks.
pub fn make_identity(id: &str, size: usize, rng: &mut impl Rng) -> SyntheticIdentity {
    let s = size as f64 / 64.0;
    let cx = 32.0 * s + rng.random_range(-1.5..1.5) * s;
    let cy = 34.0 * s + rng.random_range(-1.5..1.5) * s;
    let rx = rng.random_range(16.0..20.0) * s;
    let ry = rng.random_range(20.0..24.0) * s;
    let tone = rng.random_range(0.45..0.7);
    let backdrop = rng.random_range(0.15..0.3);
    let gratings: Vec<Grating> = (0..2)
        .map(|_| {
            let period = rng.random_range(7.0..14.0) * s;
            let angle = rng.random_range(0.0..PI);
            Grating {
                kx: angle.cos() * 2.0 * PI / period,
                ky: angle.sin() * 2.0 * PI / period,
                phase: rng.random_range(0.0..2.0 * PI),
                amp: rng.random_range(0.08..0.14),
            }
        })
        .collect();
    let eye_dx = rng.random_range(6.0..8.5) * s;
    let eye_y = cy - rng.random_range(5.0..8.0) * s;
    let eye_r = rng.random_range(2.0..3.2) * s;
    let nose_y = cy + rng.random_range(1.0..3.0) * s;
    let mouth_y = cy + rng.random_range(9.0..12.0) * s;
    let mouth_w = rng.random_range(5.0..8.0) * s;

    let template = Image::from_fn_gray(size, size, |x, y| {
        let (x, y) = (x as f64, y as f64);
        let mut v = backdrop + 0.05 * (y / size as f64);
        if ellipse_inside(x, y, cx, cy, rx, ry) {
            v = tone;
            for g in &gratings {
                v += g.amp * (g.kx * x + g.ky * y + g.phase).sin();
            }
            let eye = ellipse_inside(x, y, cx - eye_dx, eye_y, eye_r * 1.4, eye_r)
                || ellipse_inside(x, y, cx + eye_dx, eye_y, eye_r * 1.4, eye_r);
            if eye {
                v = 0.1;
            }
            if (x - cx).abs() <= 1.0 * s && y >= eye_y + 2.0 * s && y <= nose_y {
                v -= 0.15;
            }
            if ellipse_inside(x, y, cx, mouth_y, mouth_w, 1.6 * s) {
                v = 0.2;
            }
        }
        v as f32
    });

    let mut points = vec![
        Point::new(cx - eye_dx, eye_y),
        Point::new(cx + eye_dx, eye_y),
        Point::new(cx, nose_y),
        Point::new(cx - mouth_w, mouth_y),
        Point::new(cx + mouth_w, mouth_y),
        Point::new(cx, mouth_y),
    ];
    for k in 0..6 {
        let a = (k as f64) * PI / 3.0 + PI / 6.0;
        points.push(Point::new(cx + rx * a.cos(), cy + ry * a.sin()));
    }
    SyntheticIdentity {
        id: id.to_string(),
        template,
        landmarks: LandmarkSet::new(points).expect("twelve finite points"),
    }
}

/// `count` identities named `id000`, `id001`, ...
pub fn make_identities(count: usize, size: usize, seed: u64) -> Vec<SyntheticIdentity> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| make_identity(&format!("id{i:03}"), size, &mut rng))
        .collect()
}

/// One capture: the template warped onto jittered landmarks, with a
/// brightness change and pixel noise.
pub fn render_capture(
    identity: &SyntheticIdentity,
    cfg: &SynthConfig,
    rng: &mut impl Rng,
) -> Result<(Image, LandmarkSet), MorphError> {
    let max = (cfg.size - 1) as f64;
    let (sx, sy) = if cfg.shift > 0.0 {
        (
            rng.random_range(-cfg.shift..cfg.shift),
            rng.random_range(-cfg.shift..cfg.shift),
        )
    } else {
        (0.0, 0.0)
    };
    let jit = |r: &mut dyn rand::RngCore| {
        if cfg.jitter > 0.0 {
            r.random_range(-cfg.jitter..cfg.jitter)
        } else {
            0.0
        }
    };
    let points: Vec<Point> = identity
        .landmarks
        .points()
        .iter()
        .map(|p| {
            let x = (p.x + sx + jit(rng)).clamp(0.0, max);
            let y = (p.y + sy + jit(rng)).clamp(0.0, max);
            Point::new(x, y)
        })
        .collect();
    let landmarks = LandmarkSet::new(points)?;
    let warped = warp(&identity.template, &identity.landmarks, &landmarks)?;
    let gain = rng.random_range(0.9..1.1);
    let offset = rng.random_range(-0.04..0.04);
    let pixels = warped
        .pixels()
        .iter()
        .map(|&v| {
            let n = if cfg.noise > 0.0 {
                rng.random_range(-cfg.noise..cfg.noise)
            } else {
                0.0
            };
            ((v as f64) * gain + offset + n).clamp(0.0, 1.0) as f32
        })
        .collect();
    Ok((Image::new(cfg.size, cfg.size, 1, pixels)?, landmarks))
}

/// Writes `captures` images per identity as `<root>/<id>/<k>.png` with
/// sibling `.lmk` files and returns the catalog.
pub fn write_identities(
    root: &Path,
    identities: &[SyntheticIdentity],
    cfg: &SynthConfig,
    seed: u64,
) -> Result<IdentityCatalog, MorphError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::new();
    for ident in identities {
        let dir = root.join(&ident.id);
        std::fs::create_dir_all(&dir).map_err(|e| MorphError::Io {
            path: dir.display().to_string(),
            detail: e.to_string(),
        })?;
        let mut images = Vec::new();
        for k in 0..cfg.captures {
            let (img, lmk) = render_capture(ident, cfg, &mut rng)?;
            let path: PathBuf = dir.join(format!("{k:03}.png"));
            img.save(&path)?;
            let item = CatalogImage::with_sibling_landmarks(path);
            lmk.save(&item.landmarks)?;
            images.push(item);
        }
        entries.push((ident.id.clone(), images));
    }
    Ok(IdentityCatalog::new(entries).expect("generated ids are valid"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_in_frame() {
        let a = make_identities(3, 64, 9);
        let b = make_identities(3, 64, 9);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.template, y.template);
            assert_eq!(x.landmarks, y.landmarks);
            x.landmarks.check_bounds(64, 64).unwrap();
        }
        let cfg = SynthConfig::default();
        let mut r1 = ChaCha8Rng::seed_from_u64(1);
        let mut r2 = ChaCha8Rng::seed_from_u64(1);
        let c1 = render_capture(&a[0], &cfg, &mut r1).unwrap();
        let c2 = render_capture(&a[0], &cfg, &mut r2).unwrap();
        assert_eq!(c1, c2);
        c1.1.check_bounds(64, 64).unwrap();
    }

    #[test]
    fn identities_differ() {
        let ids = make_identities(2, 64, 0);
        assert_ne!(ids[0].template, ids[1].template);
        assert_eq!(ids[0].landmarks.len(), 12);
    }
}

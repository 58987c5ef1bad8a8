use std::collections::BTreeMap;

use super::QualityError;
use crate::morph::Image;

/// A per-image quality measure.
pub trait QualityScorer: Send + Sync {
    fn id(&self) -> &str;
    fn score(&self, image: &Image) -> f64;
}

/// Variance of the 4-neighbour 3x3 Laplacian over the grayscale interior.
/// Sharp images score high; a constant image scores 0.
pub fn blur_score(image: &Image) -> f64 {
    let gray = image.to_gray();
    let (w, h) = (gray.width(), gray.height());
    if w < 3 || h < 3 {
        return 0.0;
    }
    let mut responses = Vec::with_capacity((w - 2) * (h - 2));
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let c = gray.get(x, y, 0) as f64;
            let lap = gray.get(x - 1, y, 0) as f64
                + gray.get(x + 1, y, 0) as f64
                + gray.get(x, y - 1, 0) as f64
                + gray.get(x, y + 1, 0) as f64
                - 4.0 * c;
            responses.push(lap);
        }
    }
    let n = responses.len() as f64;
    let mean = responses.iter().sum::<f64>() / n;
    responses.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n
}

/// Mean luminance in `[0, 1]`.
pub fn illumination_score(image: &Image) -> f64 {
    let gray = image.to_gray();
    gray.pixels().iter().map(|&v| v as f64).sum::<f64>() / gray.pixels().len() as f64
}

pub struct BlurScorer;

impl QualityScorer for BlurScorer {
    fn id(&self) -> &str {
        "blur"
    }

    fn score(&self, image: &Image) -> f64 {
        blur_score(image)
    }
}

pub struct IlluminationScorer;

impl QualityScorer for IlluminationScorer {
    fn id(&self) -> &str {
        "illumination"
    }

    fn score(&self, image: &Image) -> f64 {
        illumination_score(image)
    }
}

/// Scorers by id. External scores (other quality networks) enter through
/// score files instead of this registry.
pub struct ScorerRegistry {
    scorers: BTreeMap<String, Box<dyn QualityScorer>>,
}

impl Default for ScorerRegistry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(BlurScorer));
        r.register(Box::new(IlluminationScorer));
        r
    }
}

impl ScorerRegistry {
    pub fn empty() -> Self {
        Self {
            scorers: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, scorer: Box<dyn QualityScorer>) {
        self.scorers.insert(scorer.id().to_string(), scorer);
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.scorers.keys().map(String::as_str)
    }

    pub fn score_image(&self, image: &Image, scorer_id: &str) -> Result<f64, QualityError> {
        self.scorers
            .get(scorer_id)
            .map(|s| s.score(image))
            .ok_or_else(|| QualityError::UnknownScorer(scorer_id.to_string()))
    }
}

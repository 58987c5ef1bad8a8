use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Direction, QualityError};

/// Scores of one image keyed by scorer id.
pub type QualityVector = BTreeMap<String, f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct Threshold {
    pub scorer: String,
    pub direction: Direction,
    pub value: f64,
}

/// Picks images for manual labelling spread across each score's range.
///
/// Every scorer's `[min, max]` is cut into `bins` equal sub-ranges and each
/// sub-range contributes up to `min_per_bin` randomly chosen images. The
/// union is returned in input order.
pub fn stratified_sample(
    images: &[(String, QualityVector)],
    bins: usize,
    min_per_bin: usize,
    seed: u64,
) -> Result<Vec<String>, QualityError> {
    if images.is_empty() {
        return Err(QualityError::EmptyDataset);
    }
    if bins < 2 {
        return Err(QualityError::TooFewBins(bins));
    }
    let scorers: BTreeSet<&str> = images
        .iter()
        .flat_map(|(_, q)| q.keys().map(String::as_str))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = BTreeSet::new();
    for scorer in scorers {
        let values: Vec<(usize, f64)> = images
            .iter()
            .enumerate()
            .filter_map(|(i, (_, q))| q.get(scorer).map(|&v| (i, v)))
            .collect();
        let lo = values.iter().map(|v| v.1).fold(f64::INFINITY, f64::min);
        let hi = values.iter().map(|v| v.1).fold(f64::NEG_INFINITY, f64::max);
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); bins];
        for &(i, v) in &values {
            let bin = if hi > lo {
                (((v - lo) / (hi - lo)) * bins as f64).floor() as usize
            } else {
                0
            };
            members[bin.min(bins - 1)].push(i);
        }
        for (b, group) in members.iter_mut().enumerate() {
            if group.is_empty() {
                log::warn!("scorer '{scorer}': sub-range {b} of {bins} is empty");
                continue;
            }
            group.shuffle(&mut rng);
            chosen.extend(group.iter().take(min_per_bin).copied());
        }
    }
    Ok(chosen.into_iter().map(|i| images[i].0.clone()).collect())
}

/// Images passing every threshold.
pub fn joint_filter(
    images: &[(String, QualityVector)],
    thresholds: &[Threshold],
) -> Result<Vec<String>, QualityError> {
    let covered: BTreeSet<&str> = thresholds.iter().map(|t| t.scorer.as_str()).collect();
    for (_, q) in images {
        if let Some(s) = q.keys().find(|k| !covered.contains(k.as_str())) {
            return Err(QualityError::MissingThreshold(s.clone()));
        }
    }
    let mut accepted = Vec::new();
    for (name, q) in images {
        let mut pass = true;
        for t in thresholds {
            let v = *q.get(&t.scorer).ok_or_else(|| QualityError::MissingScore {
                image: name.clone(),
                scorer: t.scorer.clone(),
            })?;
            pass &= t.direction.passes(v, t.value);
        }
        if pass {
            accepted.push(name.clone());
        }
    }
    Ok(accepted)
}

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CatalogImage, HarvestError, IdentityCatalog};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SampleKind {
    BonaFide,
    Selfmorph,
    Morph,
}

impl SampleKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SampleKind::BonaFide => "bona_fide",
            SampleKind::Selfmorph => "selfmorph",
            SampleKind::Morph => "morph",
        }
    }

    /// Selfmorphs count as bona fide for authenticity.
    pub fn is_bona_fide(self) -> bool {
        !matches!(self, SampleKind::Morph)
    }
}

impl fmt::Display for SampleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SampleKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bona_fide" => Ok(SampleKind::BonaFide),
            "selfmorph" => Ok(SampleKind::Selfmorph),
            "morph" => Ok(SampleKind::Morph),
            other => Err(format!("unknown sample kind '{other}'")),
        }
    }
}

/// One training image with its label for each head.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleRecord {
    pub kind: SampleKind,
    pub image_path: PathBuf,
    /// Class index for the first network.
    pub y1: usize,
    /// Class index for the second network.
    pub y2: usize,
    pub source_ids: Vec<String>,
}

impl SampleRecord {
    /// `|sgn(y1 - y2)|`: 1 for label-mismatched (morph) samples.
    pub fn cross_label(&self) -> u8 {
        u8::from(self.y1 != self.y2)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ImageRef {
    pub identity: String,
    pub image: PathBuf,
    pub landmarks: PathBuf,
}

impl ImageRef {
    fn new(identity: &str, image: &CatalogImage) -> Self {
        Self {
            identity: identity.to_string(),
            image: image.image.clone(),
            landmarks: image.landmarks.clone(),
        }
    }
}

/// A pair of source images and the file stem of the generated result.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlannedPair {
    pub name: String,
    pub first: ImageRef,
    pub second: ImageRef,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairingPlan {
    pub half1: Vec<String>,
    pub half2: Vec<String>,
    pub morph_pairs: Vec<PlannedPair>,
    pub selfmorph_pairs: Vec<PlannedPair>,
    pub seed: u64,
}

impl PairingPlan {
    /// Drops planned pairs whose output is not referenced by `records`.
    pub fn restrict_to(&mut self, records: &[SampleRecord], generated_dir: &Path) {
        let used: HashSet<&Path> = records.iter().map(|r| r.image_path.as_path()).collect();
        let keep = |p: &PlannedPair| used.contains(output_path(generated_dir, &p.name).as_path());
        self.morph_pairs.retain(keep);
        self.selfmorph_pairs.retain(keep);
    }
}

/// Where the generated image for a planned pair is written.
pub fn output_path(generated_dir: &Path, name: &str) -> PathBuf {
    generated_dir.join(format!("{name}.png"))
}

/// Seeded shuffle of identity ids into two halves; the first half gets the
/// extra id when the count is odd.
pub fn split_identities(
    catalog: &IdentityCatalog,
    seed: u64,
) -> Result<(Vec<String>, Vec<String>), HarvestError> {
    if catalog.len() < 2 {
        return Err(HarvestError::TooFewIdentities(catalog.len()));
    }
    let mut ids: Vec<String> = catalog.ids().map(str::to_string).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ids.shuffle(&mut rng);
    let half2 = ids.split_off(ids.len().div_ceil(2));
    Ok((ids, half2))
}

fn pool(catalog: &IdentityCatalog, ids: &[String]) -> Result<Vec<ImageRef>, HarvestError> {
    let mut out = Vec::new();
    for id in ids {
        let images = catalog
            .images(id)
            .ok_or_else(|| HarvestError::UnknownIdentity(id.clone()))?;
        out.extend(images.iter().map(|img| ImageRef::new(id, img)));
    }
    Ok(out)
}

/// `count` distinct (half-1 image, half-2 image) pairs drawn uniformly.
///
/// Source images may appear in several pairs; only repeated pairs are
/// rejected.
pub fn plan_morphs(
    catalog: &IdentityCatalog,
    half1: &[String],
    half2: &[String],
    count: usize,
    seed: u64,
) -> Result<Vec<PlannedPair>, HarvestError> {
    if half1.is_empty() || half2.is_empty() {
        return Err(HarvestError::TooFewIdentities(half1.len() + half2.len()));
    }
    let left = pool(catalog, half1)?;
    let right = pool(catalog, half2)?;
    let available = left.len() * right.len();
    if count > available {
        return Err(HarvestError::TooManyPairs {
            requested: count,
            available,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let indices: Vec<(usize, usize)> = if count * 2 > available {
        let mut all: Vec<(usize, usize)> = (0..left.len())
            .flat_map(|i| (0..right.len()).map(move |j| (i, j)))
            .collect();
        all.shuffle(&mut rng);
        all.truncate(count);
        all
    } else {
        let mut seen = HashSet::with_capacity(count);
        let mut picked = Vec::with_capacity(count);
        while picked.len() < count {
            let pair = (
                rng.random_range(0..left.len()),
                rng.random_range(0..right.len()),
            );
            if seen.insert(pair) {
                picked.push(pair);
            }
        }
        picked
    };
    Ok(indices
        .into_iter()
        .enumerate()
        .map(|(k, (i, j))| PlannedPair {
            name: format!("morph_{k:06}"),
            first: left[i].clone(),
            second: right[j].clone(),
        })
        .collect())
}

/// Random pairing of images within each identity.
///
/// Each identity's images are shuffled and paired consecutively; an odd
/// leftover pairs with the first shuffled image. Pairs list the image with
/// the lower catalog position first. Single-image identities are skipped.
pub fn plan_selfmorphs(
    catalog: &IdentityCatalog,
    seed: u64,
) -> Result<Vec<PlannedPair>, HarvestError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::new();
    for (id, images) in catalog.iter() {
        if images.len() < 2 {
            log::warn!("identity '{id}' has a single image; no selfmorph");
            continue;
        }
        let mut order: Vec<usize> = (0..images.len()).collect();
        order.shuffle(&mut rng);
        let mut chosen: Vec<(usize, usize)> = order.chunks_exact(2).map(|c| (c[0], c[1])).collect();
        if order.len() % 2 == 1 {
            chosen.push((order[order.len() - 1], order[0]));
        }
        for (i, j) in chosen {
            let (i, j) = (i.min(j), i.max(j));
            pairs.push(PlannedPair {
                name: format!("selfmorph_{:06}", pairs.len()),
                first: ImageRef::new(id, &images[i]),
                second: ImageRef::new(id, &images[j]),
            });
        }
    }
    if pairs.is_empty() {
        return Err(HarvestError::NoSelfmorphCandidates);
    }
    Ok(pairs)
}

/// Records for every catalog image plus every planned pair.
///
/// Morphs take `y1` from their half-1 source and `y2` from their half-2
/// source; bona fide images and selfmorphs use their own identity for both.
pub fn assign_labels(
    plan: &PairingPlan,
    catalog: &IdentityCatalog,
    generated_dir: &Path,
) -> Result<Vec<SampleRecord>, HarvestError> {
    let classes = catalog.class_index();
    let class = |id: &str| {
        classes
            .get(id)
            .copied()
            .ok_or_else(|| HarvestError::UnknownIdentity(id.to_string()))
    };
    let mut records = Vec::with_capacity(
        catalog.image_count() + plan.morph_pairs.len() + plan.selfmorph_pairs.len(),
    );
    for (id, images) in catalog.iter() {
        let y = class(id)?;
        for img in images {
            records.push(SampleRecord {
                kind: SampleKind::BonaFide,
                image_path: img.image.clone(),
                y1: y,
                y2: y,
                source_ids: vec![id.to_string()],
            });
        }
    }
    for pair in &plan.selfmorph_pairs {
        if pair.first.identity != pair.second.identity {
            return Err(HarvestError::Catalog(format!(
                "selfmorph {} mixes identities {} and {}",
                pair.name, pair.first.identity, pair.second.identity
            )));
        }
        let y = class(&pair.first.identity)?;
        records.push(SampleRecord {
            kind: SampleKind::Selfmorph,
            image_path: output_path(generated_dir, &pair.name),
            y1: y,
            y2: y,
            source_ids: vec![pair.first.identity.clone()],
        });
    }
    let half1: BTreeSet<&str> = plan.half1.iter().map(String::as_str).collect();
    let half2: BTreeSet<&str> = plan.half2.iter().map(String::as_str).collect();
    for pair in &plan.morph_pairs {
        if !half1.contains(pair.first.identity.as_str())
            || !half2.contains(pair.second.identity.as_str())
        {
            return Err(HarvestError::Catalog(format!(
                "morph {} does not cross halves ({} / {})",
                pair.name, pair.first.identity, pair.second.identity
            )));
        }
        records.push(SampleRecord {
            kind: SampleKind::Morph,
            image_path: output_path(generated_dir, &pair.name),
            y1: class(&pair.first.identity)?,
            y2: class(&pair.second.identity)?,
            source_ids: vec![pair.first.identity.clone(), pair.second.identity.clone()],
        });
    }
    Ok(records)
}

/// Which non-morph samples enter the training set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BonaFideMix {
    /// Original bona fide images and selfmorphs.
    #[default]
    Both,
    OriginalOnly,
    SelfmorphsOnly,
}

impl FromStr for BonaFideMix {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "both" => Ok(Self::Both),
            "original_only" => Ok(Self::OriginalOnly),
            "selfmorphs_only" => Ok(Self::SelfmorphsOnly),
            other => Err(format!(
                "unknown mix '{other}' (expected both, original_only or selfmorphs_only)"
            )),
        }
    }
}

/// Equalizes morph and non-morph counts by downsampling the larger group,
/// then shuffles the union.
pub fn balance(
    records: Vec<SampleRecord>,
    seed: u64,
    mix: BonaFideMix,
) -> Result<Vec<SampleRecord>, HarvestError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut morphs, mut genuine): (Vec<_>, Vec<_>) = records
        .into_iter()
        .filter(|r| match (mix, r.kind) {
            (_, SampleKind::Morph) | (BonaFideMix::Both, _) => true,
            (BonaFideMix::OriginalOnly, k) => k == SampleKind::BonaFide,
            (BonaFideMix::SelfmorphsOnly, k) => k == SampleKind::Selfmorph,
        })
        .partition(|r| r.kind == SampleKind::Morph);
    if morphs.is_empty() {
        return Err(HarvestError::EmptyGroup("morph"));
    }
    if genuine.is_empty() {
        return Err(HarvestError::EmptyGroup("bona fide"));
    }
    let n = morphs.len().min(genuine.len());
    morphs.shuffle(&mut rng);
    genuine.shuffle(&mut rng);
    morphs.truncate(n);
    genuine.truncate(n);
    let mut out = morphs;
    out.append(&mut genuine);
    out.shuffle(&mut rng);
    Ok(out)
}

/// Counts per kind, for reports.
pub fn kind_counts(records: &[SampleRecord]) -> BTreeMap<SampleKind, usize> {
    let mut counts = BTreeMap::new();
    for r in records {
        *counts.entry(r.kind).or_insert(0) += 1;
    }
    counts
}

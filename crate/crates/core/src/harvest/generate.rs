use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::manifest::{save_pairs, save_records, PairRow};
use super::{
    assign_labels, balance, output_path, plan_morphs, plan_selfmorphs, split_identities,
    BonaFideMix, HarvestError, IdentityCatalog, PairingPlan, SampleKind, SampleRecord,
};
use crate::morph::{morph, BackgroundSource, Image, LandmarkSet, MorphError, DEFAULT_ALPHA};

/// Labelled rows for every planned pair, selfmorphs first.
pub fn pair_rows(
    plan: &PairingPlan,
    catalog: &IdentityCatalog,
) -> Result<Vec<PairRow>, HarvestError> {
    let classes = catalog.class_index();
    let class = |id: &str| {
        classes
            .get(id)
            .copied()
            .ok_or_else(|| HarvestError::UnknownIdentity(id.to_string()))
    };
    let mut rows = Vec::new();
    for p in &plan.selfmorph_pairs {
        let y = class(&p.first.identity)?;
        rows.push(PairRow::new(SampleKind::Selfmorph, p, y, y));
    }
    for p in &plan.morph_pairs {
        rows.push(PairRow::new(
            SampleKind::Morph,
            p,
            class(&p.first.identity)?,
            class(&p.second.identity)?,
        ));
    }
    Ok(rows)
}

/// Generator for item `index`, independent of scheduling.
fn item_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64 + 1);
    rng
}

fn render_one(
    row: &PairRow,
    out_dir: &Path,
    alpha: f64,
    rng: &mut ChaCha8Rng,
) -> Result<(), MorphError> {
    let a = Image::load(&row.image_a)?;
    let la = LandmarkSet::load(&row.landmarks_a)?;
    let b = Image::load(&row.image_b)?;
    let lb = LandmarkSet::load(&row.landmarks_b)?;
    let alpha = match row.sample_kind() {
        Ok(SampleKind::Selfmorph) => DEFAULT_ALPHA,
        _ => alpha,
    };
    let out = morph(&a, &la, &b, &lb, alpha, BackgroundSource::random(rng))?;
    let path = output_path(out_dir, &row.name);
    out.image.save(&path)?;
    out.landmarks.save(&path.with_extension("lmk"))
}

/// Morphs every row into `out_dir/<name>.png` (with landmarks alongside).
///
/// Selfmorphs always blend at 0.5; morphs use `alpha`. The background side
/// is drawn per item from `seed`, so output does not depend on the thread
/// count. Failed items are returned, not fatal.
pub fn render_pairs(
    rows: &[PairRow],
    out_dir: &Path,
    alpha: f64,
    seed: u64,
) -> Result<Vec<(String, MorphError)>, HarvestError> {
    std::fs::create_dir_all(out_dir).map_err(|e| HarvestError::Io {
        path: out_dir.display().to_string(),
        detail: e.to_string(),
    })?;
    let failures = rows
        .par_iter()
        .enumerate()
        .filter_map(|(i, row)| {
            let mut rng = item_rng(seed, i);
            render_one(row, out_dir, alpha, &mut rng)
                .err()
                .map(|e| (row.name.clone(), e))
        })
        .collect();
    Ok(failures)
}

#[derive(Debug, Clone)]
pub struct HarvestOptions {
    pub morph_count: usize,
    pub seed: u64,
    pub alpha: f64,
    pub mix: BonaFideMix,
}

#[derive(Debug, Clone)]
pub struct HarvestOutput {
    pub plan: PairingPlan,
    pub pairs: Vec<PairRow>,
    /// Balanced and shuffled training records.
    pub records: Vec<SampleRecord>,
    pub failures: Vec<String>,
    pub records_path: PathBuf,
    pub pairs_path: PathBuf,
}

/// Split, plan, render and balance in one go.
///
/// Writes generated images to `out_dir/generated`, the pair plan to
/// `out_dir/pairs.csv` and the balanced records to `out_dir/records.csv`.
/// Records of pairs that failed to render are dropped before balancing.
pub fn harvest(
    catalog: &IdentityCatalog,
    out_dir: &Path,
    opts: &HarvestOptions,
) -> Result<HarvestOutput, HarvestError> {
    let (half1, half2) = split_identities(catalog, opts.seed)?;
    let morph_pairs = plan_morphs(catalog, &half1, &half2, opts.morph_count, opts.seed)?;
    let selfmorph_pairs = plan_selfmorphs(catalog, opts.seed)?;
    let plan = PairingPlan {
        half1,
        half2,
        morph_pairs,
        selfmorph_pairs,
        seed: opts.seed,
    };
    let generated = out_dir.join("generated");
    let pairs = pair_rows(&plan, catalog)?;
    let failed = render_pairs(&pairs, &generated, opts.alpha, opts.seed)?;
    for (name, e) in &failed {
        log::warn!("pair {name} failed: {e}");
    }
    let failed_paths: Vec<PathBuf> = failed
        .iter()
        .map(|(n, _)| output_path(&generated, n))
        .collect();
    let records: Vec<SampleRecord> = assign_labels(&plan, catalog, &generated)?
        .into_iter()
        .filter(|r| !failed_paths.contains(&r.image_path))
        .collect();
    let records = balance(records, opts.seed, opts.mix)?;
    let records_path = out_dir.join("records.csv");
    let pairs_path = out_dir.join("pairs.csv");
    save_pairs(&pairs_path, &pairs)?;
    save_records(&records_path, &records)?;
    Ok(HarvestOutput {
        plan,
        pairs,
        records,
        failures: failed.into_iter().map(|(n, _)| n).collect(),
        records_path,
        pairs_path,
    })
}

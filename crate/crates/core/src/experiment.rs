//! Synthetic end-to-end run: generate faces, harvest, train, score a
//! held-out protocol.

use std::path::Path;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bench::{
    evaluate, score_protocol, ProtocolManifest, ProtocolResult, ScoreMode, ScoreSet, Truth,
};
use crate::harvest::{harvest, BonaFideMix, HarvestOptions};
use crate::model::{load_training_set, train, DualModel, TraceRow, TrainConfig};
use crate::morph::{morph, BackgroundSource, DEFAULT_ALPHA};
use crate::synth::{
    make_identities, render_capture, write_identities, SynthConfig, SyntheticIdentity,
};

/// Which faces the held-out protocol shows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeldOut {
    /// Identities never seen in training.
    NewIdentities,
    /// Fresh captures and fresh morph pairs of the training identities.
    #[default]
    NewCaptures,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticRun {
    pub synth: SynthConfig,
    pub train: TrainConfig,
    /// Morph pairs planned for training (before balancing).
    pub morph_count: usize,
    pub heldout: HeldOut,
    pub heldout_identities: usize,
    pub heldout_captures: usize,
    pub heldout_morphs: usize,
}

impl Default for SyntheticRun {
    fn default() -> Self {
        Self {
            synth: SynthConfig::default(),
            train: TrainConfig::default(),
            morph_count: 500,
            heldout: HeldOut::default(),
            heldout_identities: 20,
            heldout_captures: 5,
            heldout_morphs: 200,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticReport {
    pub result: ProtocolResult,
    pub scores: ScoreSet,
    pub mean_morph: f64,
    pub mean_bona_fide: f64,
    pub trace: Vec<TraceRow>,
    pub training_samples: usize,
    pub train_time: Duration,
    pub model: DualModel,
}

fn boxed(
    e: impl std::error::Error + Send + Sync + 'static,
) -> Box<dyn std::error::Error + Send + Sync> {
    Box::new(e)
}

/// Writes the held-out protocol under `dir` and returns its manifest.
pub fn write_heldout_protocol(
    dir: &Path,
    identities: &[SyntheticIdentity],
    cfg: &SynthConfig,
    captures: usize,
    morphs: usize,
    seed: u64,
) -> Result<ProtocolManifest, Box<dyn std::error::Error + Send + Sync>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bona_dir = dir.join("bona_fide");
    let morph_dir = dir.join("morph");
    std::fs::create_dir_all(&bona_dir)?;
    std::fs::create_dir_all(&morph_dir)?;
    let mut shots = Vec::new();
    let mut bona = Vec::new();
    for (i, ident) in identities.iter().enumerate() {
        for k in 0..captures {
            let (img, lmk) = render_capture(ident, cfg, &mut rng).map_err(boxed)?;
            let path = bona_dir.join(format!("{}_{k:02}.png", ident.id));
            img.save(&path).map_err(boxed)?;
            bona.push(path);
            shots.push((i, img, lmk));
        }
    }
    let mut morph_paths = Vec::new();
    let mut all_pairs: Vec<(usize, usize)> = (0..shots.len())
        .flat_map(|a| (0..shots.len()).map(move |b| (a, b)))
        .filter(|&(a, b)| shots[a].0 < shots[b].0)
        .collect();
    all_pairs.shuffle(&mut rng);
    for (m, &(a, b)) in all_pairs.iter().take(morphs).enumerate() {
        let (_, ia, la) = &shots[a];
        let (_, ib, lb) = &shots[b];
        let bg = BackgroundSource::random(&mut rng);
        let out = morph(ia, la, ib, lb, DEFAULT_ALPHA, bg).map_err(boxed)?;
        let path = morph_dir.join(format!("morph_{m:04}.png"));
        out.image.save(&path).map_err(boxed)?;
        morph_paths.push(path);
    }
    let manifest =
        ProtocolManifest::new("synthetic", bona, morph_paths, Default::default()).map_err(boxed)?;
    std::fs::write(dir.join("protocol.txt"), manifest.to_text())?;
    Ok(manifest)
}

/// Runs the whole synthetic pipeline inside `work`.
pub fn run_synthetic(
    work: &Path,
    run: &SyntheticRun,
) -> Result<SyntheticReport, Box<dyn std::error::Error + Send + Sync>> {
    let synth = &run.synth;
    let identities = make_identities(synth.identities, synth.size, synth.seed);
    let catalog = write_identities(&work.join("faces"), &identities, synth, synth.seed ^ 0x5eed)
        .map_err(boxed)?;
    let harvested = harvest(
        &catalog,
        &work.join("harvest"),
        &HarvestOptions {
            morph_count: run.morph_count,
            seed: run.train.seed,
            alpha: DEFAULT_ALPHA,
            mix: BonaFideMix::Both,
        },
    )
    .map_err(boxed)?;
    let data = load_training_set(&harvested.records, run.train.input_side).map_err(boxed)?;
    let model = DualModel::init(
        &run.train.backbone(),
        catalog.len(),
        run.train.shared_weights,
        run.train.mirrored_init,
        run.train.seed,
    )
    .map_err(boxed)?;
    let start = Instant::now();
    let outcome = train(model, &data, &run.train).map_err(boxed)?;
    let train_time = start.elapsed();

    let heldout_ids = match run.heldout {
        HeldOut::NewCaptures => identities,
        HeldOut::NewIdentities => {
            let mut seed_rng = ChaCha8Rng::seed_from_u64(synth.seed);
            make_identities(
                run.heldout_identities,
                synth.size,
                seed_rng.random::<u64>() ^ 0xfeed,
            )
        }
    };
    let manifest = write_heldout_protocol(
        &work.join("heldout"),
        &heldout_ids,
        synth,
        run.heldout_captures,
        run.heldout_morphs,
        synth.seed ^ 0x4e1d,
    )?;
    let scores = score_protocol(&outcome.model, &manifest, ScoreMode::Single).map_err(boxed)?;
    let result = evaluate("synthetic", &manifest.name, &scores).map_err(boxed)?;
    Ok(SyntheticReport {
        mean_morph: scores.mean(Truth::Morph).unwrap_or(f64::NAN),
        mean_bona_fide: scores.mean(Truth::BonaFide).unwrap_or(f64::NAN),
        result,
        scores,
        trace: outcome.trace,
        training_samples: data.len(),
        train_time,
        model: outcome.model,
    })
}

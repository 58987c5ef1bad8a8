//! Train the dual network on a harvested corpus and score a few images.
//!
//! cargo run --release --example train_fused -- [records.csv]
//!
//! Without an argument a small synthetic corpus is harvested first.

use std::path::PathBuf;

use fusedmad::harvest::manifest::load_records;
use fusedmad::harvest::{harvest, BonaFideMix, HarvestOptions, SampleKind};
use fusedmad::model::{load_training_set, train, DualModel, TrainConfig};
use fusedmad::morph::Image;
use fusedmad::synth::{make_identities, write_identities, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    env_logger::init();
    let dir = tempfile::tempdir()?;
    let records_path = match std::env::args().nth(1) {
        Some(p) => PathBuf::from(p),
        None => {
            let cfg = SynthConfig {
                identities: 8,
                captures: 8,
                ..SynthConfig::default()
            };
            let catalog = write_identities(
                &dir.path().join("faces"),
                &make_identities(8, cfg.size, 1),
                &cfg,
                2,
            )?;
            let opts = HarvestOptions {
                morph_count: 150,
                seed: 0,
                alpha: 0.5,
                mix: BonaFideMix::Both,
            };
            harvest(&catalog, &dir.path().join("corpus"), &opts)?.records_path
        }
    };
    let records = load_records(&records_path)?;
    let cfg = TrainConfig {
        epochs: 20,
        ..TrainConfig::default()
    };
    let data = load_training_set(&records, cfg.input_side)?;
    let model = DualModel::init(
        &cfg.backbone(),
        data.classes(),
        cfg.shared_weights,
        cfg.mirrored_init,
        cfg.seed,
    )?;
    let outcome = train(model, &data, &cfg)?;
    for row in outcome
        .trace
        .iter()
        .step_by(outcome.trace.len().div_ceil(8).max(1))
    {
        println!(
            "step {:4}  L1 {:.4}  L2 {:.4}  L3 {:.4}  L {:.4}",
            row.step, row.l1, row.l2, row.l3, row.total
        );
    }
    for kind in [SampleKind::BonaFide, SampleKind::Morph] {
        let scores: Vec<f64> = records
            .iter()
            .filter(|r| r.kind == kind)
            .take(20)
            .map(|r| outcome.model.morph_score(&Image::load(&r.image_path)?))
            .collect::<Result<_, _>>()?;
        println!(
            "{kind}: mean training score {:.3}",
            scores.iter().sum::<f64>() / scores.len() as f64
        );
    }
    outcome.model.save(&dir.path().join("model.ckpt"))?;
    Ok(())
}

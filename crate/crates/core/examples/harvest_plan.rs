//! Build a dual-labelled training corpus from a synthetic catalog.
//!
//! cargo run --example harvest_plan -- [out_dir]

use std::path::PathBuf;

use fusedmad::harvest::{harvest, kind_counts, BonaFideMix, HarvestOptions};
use fusedmad::synth::{make_identities, write_identities, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    env_logger::init();
    let out = PathBuf::from(
        std::env::args()
            .nth(1)
            .unwrap_or_else(|| "harvest_out".into()),
    );
    let cfg = SynthConfig {
        identities: 6,
        captures: 4,
        ..SynthConfig::default()
    };
    let catalog = write_identities(
        &out.join("faces"),
        &make_identities(cfg.identities, cfg.size, 1),
        &cfg,
        2,
    )?;
    let result = harvest(
        &catalog,
        &out.join("corpus"),
        &HarvestOptions {
            morph_count: 40,
            seed: 3,
            alpha: 0.5,
            mix: BonaFideMix::Both,
        },
    )?;
    println!("half 1: {:?}", result.plan.half1);
    println!("half 2: {:?}", result.plan.half2);
    for (kind, n) in kind_counts(&result.records) {
        println!("{kind}: {n}");
    }
    for r in result.records.iter().take(5) {
        println!(
            "{} y1={} y2={} t={} {}",
            r.kind,
            r.y1,
            r.y2,
            r.cross_label(),
            r.image_path.display()
        );
    }
    println!("records: {}", result.records_path.display());
    Ok(())
}

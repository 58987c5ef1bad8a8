//! Generate synthetic faces, harvest, train and score a held-out protocol.
//!
//! cargo run --release --example synthetic_end_to_end -- [run.toml]
//!
//! The optional TOML file overrides fields of `SyntheticRun`, e.g.
//! `[train]\nbeta = 0.0`.

use fusedmad::experiment::{run_synthetic, SyntheticRun};

fn main() -> Result<(), Box<dyn std::error::Error + Send + Sync>> {
    env_logger::init();
    let run: SyntheticRun = match std::env::args().nth(1) {
        Some(path) => toml::from_str(&std::fs::read_to_string(path)?)?,
        None => SyntheticRun::default(),
    };
    let dir = tempfile::tempdir()?;
    let report = run_synthetic(dir.path(), &run)?;
    let r = &report.result;
    println!(
        "samples={} train_time={:.1?} apcer@bpcer=0.1: {:.3}  bpcer@apcer=0.1: {:.3}  mean morph {:.3} vs bona fide {:.3}",
        report.training_samples,
        report.train_time,
        r.apcer_at_bpcer[0],
        r.bpcer_at_apcer[0],
        report.mean_morph,
        report.mean_bona_fide
    );
    if let (Some(first), Some(last)) = (report.trace.first(), report.trace.last()) {
        println!(
            "loss {:.4} -> {:.4} (L3 {:.4} -> {:.4})",
            first.total, last.total, first.l3, last.l3
        );
    }
    Ok(())
}

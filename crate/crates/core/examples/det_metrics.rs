//! APCER/BPCER operating points and a DET curve for a score file.
//!
//! cargo run --example det_metrics -- [scores.csv]
//!
//! The score file has `path,truth,score` rows (truth is bona_fide or morph).
//! Without one, two overlapping normal score populations are used.

use fusedmad::bench::{
    apcer_at_bpcer, bpcer_at_apcer, det_curve, evaluate, report_table, ScoreSet,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scores = match std::env::args().nth(1) {
        Some(p) => ScoreSet::load(p.as_ref())?,
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            let bona = Normal::new(0.3, 0.1)?;
            let morph = Normal::new(0.6, 0.15)?;
            let b: Vec<f64> = (0..500).map(|_| bona.sample(&mut rng)).collect();
            let m: Vec<f64> = (0..300).map(|_| morph.sample(&mut rng)).collect();
            ScoreSet::from_scores(&b, &m)
        }
    };
    let curve = det_curve(&scores)?;
    for delta in [0.2, 0.1, 0.05, 0.01] {
        println!(
            "delta {delta:<5} apcer@bpcer {:.4}  bpcer@apcer {:.4}",
            apcer_at_bpcer(&curve, delta)?,
            bpcer_at_apcer(&curve, delta)?
        );
    }
    let step = curve.points.len().div_ceil(10);
    println!("threshold  apcer  bpcer");
    for p in curve.points.iter().step_by(step) {
        println!("{:>9.4}  {:.3}  {:.3}", p.threshold, p.apcer, p.bpcer);
    }
    print!(
        "{}",
        report_table(&[evaluate("example", "scores", &scores)?])
    );
    Ok(())
}

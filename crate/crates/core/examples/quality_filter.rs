//! Score images for blur and illumination, pick EER thresholds from manual
//! labels and filter jointly.
//!
//! cargo run --example quality_filter

use fusedmad::morph::Image;
use fusedmad::quality::{
    eer_threshold, far_frr, joint_filter, stratified_sample, Decision, Direction, QualityVector,
    ScorerRegistry, Threshold,
};
use fusedmad::synth::{make_identities, render_capture, SynthConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Box blur of radius `r`; stands in for an out-of-focus capture.
fn blurred(img: &Image, r: usize) -> Image {
    let (w, h) = (img.width(), img.height());
    let px = img.to_gray();
    let px = px.pixels();
    Image::from_fn_gray(w, h, |x, y| {
        let (mut acc, mut n) = (0.0, 0.0);
        for yy in y.saturating_sub(r)..=(y + r).min(h - 1) {
            for xx in x.saturating_sub(r)..=(x + r).min(w - 1) {
                acc += px[yy * w + xx];
                n += 1.0;
            }
        }
        acc / n
    })
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ids = make_identities(5, 64, 2);
    let cfg = SynthConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let registry = ScorerRegistry::default();

    let mut images: Vec<(String, QualityVector)> = Vec::new();
    let mut labels = Vec::new();
    for (i, ident) in ids.iter().enumerate() {
        for k in 0..8 {
            let (img, _) = render_capture(ident, &cfg, &mut rng)?;
            // Every third capture is defocused; those are the ones a person would reject.
            let bad = k % 3 == 0;
            let img = if bad { blurred(&img, 2) } else { img };
            let mut q = QualityVector::new();
            for id in registry.ids() {
                q.insert(id.to_string(), registry.score_image(&img, id)?);
            }
            images.push((format!("id{i}/{k}.png"), q));
            labels.push(if bad {
                Decision::Reject
            } else {
                Decision::Accept
            });
        }
    }

    let sample = stratified_sample(&images, 4, 2, 9)?;
    println!("{} images proposed for manual labelling", sample.len());

    let mut thresholds = Vec::new();
    for (scorer, direction) in [
        ("blur", Direction::HigherIsBetter),
        ("illumination", Direction::LowerIsBetter),
    ] {
        let vals: Vec<f64> = images.iter().map(|(_, q)| q[scorer]).collect();
        let curve = far_frr(&vals, &labels, direction)?;
        let (value, eer) = eer_threshold(&curve);
        println!("{scorer}: threshold {value:.5} eer {eer:.3}");
        thresholds.push(Threshold {
            scorer: scorer.into(),
            direction,
            value,
        });
    }
    let kept = joint_filter(&images, &thresholds)?;
    println!("kept {} of {} images", kept.len(), images.len());
    Ok(())
}

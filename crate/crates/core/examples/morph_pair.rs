//! Morph two synthetic faces and write the result with its landmarks.
//!
//! cargo run --example morph_pair -- [out_dir] [alpha]

use std::path::PathBuf;

use fusedmad::morph::{morph, selfmorph, BackgroundSource};
use fusedmad::synth::{make_identities, render_capture, SynthConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "morph_pair_out".into()));
    let alpha: f64 = args.next().map(|a| a.parse()).transpose()?.unwrap_or(0.5);
    std::fs::create_dir_all(&out)?;

    let ids = make_identities(2, 128, 7);
    let cfg = SynthConfig {
        size: 128,
        ..SynthConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (a, la) = render_capture(&ids[0], &cfg, &mut rng)?;
    let (b, lb) = render_capture(&ids[1], &cfg, &mut rng)?;
    let (a2, la2) = render_capture(&ids[0], &cfg, &mut rng)?;

    let m = morph(&a, &la, &b, &lb, alpha, BackgroundSource::random(&mut rng))?;
    let s = selfmorph(&a, &la, &a2, &la2, BackgroundSource::First)?;
    a.save(&out.join("a.png"))?;
    b.save(&out.join("b.png"))?;
    m.image.save(&out.join("morph.png"))?;
    m.landmarks.save(&out.join("morph.lmk"))?;
    s.image.save(&out.join("selfmorph.png"))?;
    println!(
        "wrote a.png, b.png, morph.png (alpha {alpha}) and selfmorph.png to {}",
        out.display()
    );
    Ok(())
}

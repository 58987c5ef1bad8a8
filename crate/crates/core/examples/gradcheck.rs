//! Finite-difference check of the dual-network loss gradients.
//!
//! cargo run --example gradcheck -- [models]

use fusedmad::model::{check_random_model, GradCheckSetup};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let models: u64 = std::env::args()
        .nth(1)
        .map(|a| a.parse())
        .transpose()?
        .unwrap_or(5);
    let mut all = true;
    for shared in [false, true] {
        let setup = GradCheckSetup {
            shared_weights: shared,
            hidden: vec![6, 5],
            ..GradCheckSetup::default()
        };
        for seed in 0..models {
            let r = check_random_model(&setup, seed)?;
            println!(
                "shared={shared} seed={seed}: max rel err {:.3e}",
                r.max_rel_error()
            );
            all &= r.passed();
        }
    }
    println!("{}", if all { "all passed" } else { "FAILED" });
    if !all {
        std::process::exit(1);
    }
    Ok(())
}

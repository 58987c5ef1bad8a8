use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{cross_labels, BackboneConfig, DualModel, ModelError};
use crate::numgrad::{grad_check, DenseArray, GradCheckReport};

/// A small random model and batch for checking gradients of the total loss.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GradCheckSetup {
    pub input_side: usize,
    pub hidden: Vec<usize>,
    pub feature_dim: usize,
    pub classes: usize,
    /// At least 2, so the batch holds both a matched and a mismatched pair.
    pub batch: usize,
    pub shared_weights: bool,
    pub epsilon: f64,
    pub rtol: f64,
}

impl Default for GradCheckSetup {
    fn default() -> Self {
        Self {
            input_side: 3,
            hidden: vec![5],
            feature_dim: 4,
            classes: 3,
            batch: 6,
            shared_weights: false,
            epsilon: 1e-5,
            rtol: 1e-4,
        }
    }
}

/// Random model, inputs, labels and loss weights drawn from `seed`; the
/// first row has `t = 0` and the second `t = 1`.
pub fn check_random_model(
    setup: &GradCheckSetup,
    seed: u64,
) -> Result<GradCheckReport, ModelError> {
    if setup.batch < 2 {
        return Err(ModelError::Config(
            "gradcheck batch must be at least 2".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bb = BackboneConfig {
        input_side: setup.input_side,
        hidden: setup.hidden.clone(),
        feature_dim: setup.feature_dim,
    };
    let mut model = DualModel::init(
        &bb,
        setup.classes,
        setup.shared_weights,
        false,
        rng.random(),
    )?;
    // Non-zero biases so their gradients are exercised away from the init.
    let mut params = model.params().clone();
    for (name, v) in params.iter_mut() {
        if name.ends_with(".b") {
            for x in v.data_mut() {
                *x = rng.random_range(-0.3..0.3);
            }
        }
    }
    model.set_params(params);

    let n = setup.batch;
    let dim = bb.input_dim();
    let x1: Vec<f64> = (0..n * dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let x2: Vec<f64> = (0..n * dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let c = setup.classes;
    let mut y1 = Vec::with_capacity(n);
    let mut y2 = Vec::with_capacity(n);
    for i in 0..n {
        let a = rng.random_range(0..c);
        let b = match i {
            0 => a,
            1 => (a + rng.random_range(1..c)) % c,
            _ => rng.random_range(0..c),
        };
        y1.push(a);
        y2.push(b);
    }
    let t = cross_labels(&y1, &y2);
    let weights = (
        rng.random_range(0.1..1.0),
        rng.random_range(0.1..1.0),
        rng.random_range(0.1..1.0),
    );
    let labels = |v: &[usize]| DenseArray::from_vec(v.iter().map(|&y| y as f64).collect());
    let inputs = BTreeMap::from([
        ("x1".to_string(), DenseArray::new(vec![n, dim], x1)?),
        ("x2".to_string(), DenseArray::new(vec![n, dim], x2)?),
        ("y1".to_string(), labels(&y1)),
        ("y2".to_string(), labels(&y2)),
        ("t".to_string(), DenseArray::from_vec(t)),
    ]);
    let mut graph = model.graph(Some(weights));
    Ok(grad_check(
        &mut graph,
        &inputs,
        "L",
        setup.epsilon,
        setup.rtol,
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_setup_passes() {
        for seed in 0..3 {
            let report = check_random_model(&GradCheckSetup::default(), seed).unwrap();
            assert!(report.passed(), "{report}");
        }
        let shared = GradCheckSetup {
            shared_weights: true,
            ..GradCheckSetup::default()
        };
        assert!(check_random_model(&shared, 7).unwrap().passed());
    }
}

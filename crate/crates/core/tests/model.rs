mod common;

use std::collections::BTreeMap;

use fusedmad::model::{
    check_random_model, cross_labels, loss_identity, loss_morph, train, BackboneConfig, DualModel,
    GradCheckSetup, TrainConfig, TrainingSet,
};
use fusedmad::morph::Image;
use fusedmad::numgrad::DenseArray;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn tiny() -> BackboneConfig {
    BackboneConfig {
        input_side: 4,
        hidden: vec![6],
        feature_dim: 5,
    }
}

fn random_image(side: usize, seed: u64) -> Image {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let px: Vec<f32> = (0..side * side).map(|_| rng.random()).collect();
    Image::from_fn_gray(side, side, |x, y| px[y * side + x])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn identity_loss_matches_formula(
        rows in prop::collection::vec(prop::collection::vec(-20.0f64..20.0, 4), 1..8),
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let labels: Vec<usize> = rows.iter().map(|_| rng.random_range(0..4)).collect();
        let logits = DenseArray::from_rows(&rows).unwrap();
        let got = loss_identity(&logits, &labels).unwrap();
        let want = rows.iter().zip(&labels).map(|(r, &y)| common::xent(r, y)).sum::<f64>() / rows.len() as f64;
        prop_assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0));
    }

    #[test]
    fn morph_loss_matches_formula(pairs in prop::collection::vec((-15.0f64..15.0, any::<bool>()), 1..20)) {
        let d: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let t: Vec<f64> = pairs.iter().map(|p| f64::from(u8::from(p.1))).collect();
        let got = loss_morph(&d, &t);
        let want = d.iter().zip(&t).map(|(&d, &t)| common::bce(d, t)).sum::<f64>() / d.len() as f64;
        prop_assert!((got - want).abs() <= 1e-9 * want.max(1.0));
    }

    #[test]
    fn differential_with_itself_equals_single(seed in any::<u64>()) {
        let model = DualModel::init(&tiny(), 3, false, false, seed).unwrap();
        let x = random_image(6, seed ^ 7);
        let single = model.morph_score(&x).unwrap();
        let diff = model.differential_score(&x, &x).unwrap();
        prop_assert!((single - diff).abs() <= 1e-12);
        prop_assert!((0.0..=1.0).contains(&single));
    }
}

#[test]
fn cross_labels_flag_mismatches() {
    assert_eq!(cross_labels(&[0, 1, 2], &[0, 2, 2]), vec![0.0, 1.0, 0.0]);
}

#[test]
fn random_models_pass_gradient_check() {
    for shared in [false, true] {
        let setup = GradCheckSetup {
            shared_weights: shared,
            ..GradCheckSetup::default()
        };
        for seed in 0..4 {
            let r = check_random_model(&setup, seed).unwrap();
            assert!(r.passed(), "{r}");
        }
    }
}

#[test]
fn zero_identity_weights_leave_heads_without_gradient() {
    let model = DualModel::init(&tiny(), 3, false, false, 1).unwrap();
    let mut g = model.graph(Some((0.0, 0.0, 1.0)));
    let x = DenseArray::new(
        vec![2, 16],
        (0..32).map(|i| (i as f64 * 0.37).sin()).collect(),
    )
    .unwrap();
    let inputs = BTreeMap::from([
        ("x1".to_string(), x.clone()),
        ("x2".to_string(), x),
        ("y1".to_string(), DenseArray::from_vec(vec![0.0, 1.0])),
        ("y2".to_string(), DenseArray::from_vec(vec![0.0, 2.0])),
        ("t".to_string(), DenseArray::from_vec(vec![0.0, 1.0])),
    ]);
    g.forward(&inputs).unwrap();
    let grads = g.backward("L").unwrap();
    for (name, gr) in grads.iter() {
        if name.starts_with("head") {
            assert!(gr.data().iter().all(|&v| v == 0.0), "{name}");
        }
    }
    let bb = grads.get("bb1.l0.w").unwrap();
    assert!(bb.data().iter().any(|&v| v != 0.0));
}

#[test]
fn zero_epochs_returns_the_initial_model() {
    let model = DualModel::init(&tiny(), 2, false, false, 4).unwrap();
    let x = DenseArray::new(vec![4, 16], (0..64).map(|i| (i as f64).cos()).collect()).unwrap();
    let data = TrainingSet::new(x, vec![0, 1, 0, 1], vec![0, 0, 1, 1]).unwrap();
    let cfg = TrainConfig {
        epochs: 0,
        input_side: 4,
        hidden: vec![6],
        feature_dim: 5,
        ..TrainConfig::default()
    };
    let out = train(model.clone(), &data, &cfg).unwrap();
    assert_eq!(out.model.params(), model.params());
    assert!(out.trace.is_empty());
}

#[test]
fn checkpoint_round_trip_restores_scores() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.ckpt");
    let model = DualModel::init(&tiny(), 3, true, false, 9).unwrap();
    model.save(&path).unwrap();
    let back = DualModel::load(&path).unwrap();
    assert_eq!(back.arch(), model.arch());
    let x = random_image(4, 2);
    assert_eq!(
        back.morph_score(&x).unwrap().to_bits(),
        model.morph_score(&x).unwrap().to_bits()
    );
}

#[test]
fn mirrored_init_copies_first_network() {
    let model = DualModel::init(&tiny(), 3, false, true, 5).unwrap();
    let p = model.params();
    for (name, v) in p.iter().filter(|(n, _)| n.starts_with("bb1.")) {
        assert_eq!(p.get(&name.replacen("bb1.", "bb2.", 1)).unwrap(), v);
    }
    let shared = DualModel::init(&tiny(), 3, true, false, 5).unwrap();
    assert!(shared.params().iter().all(|(n, _)| !n.starts_with("bb2.")));
}

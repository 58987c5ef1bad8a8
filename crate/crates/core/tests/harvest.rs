mod common;

use std::collections::{BTreeMap, BTreeSet};

use fusedmad::harvest::manifest::{load_pairs, load_records};
use fusedmad::harvest::{balance, harvest, BonaFideMix, HarvestOptions, SampleKind};
use fusedmad::synth::{make_identities, write_identities, SynthConfig};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn labels_follow_kind(ids in 2usize..12, per in 1usize..6, morphs in 1usize..40, seed in any::<u64>()) {
        let per = per.max(2);
        let catalog = common::fake_catalog(ids, per);
        let h1 = ids.div_ceil(2);
        let available = h1 * (ids - h1) * per * per;
        let (plan, records) = common::planned_records(&catalog, morphs.min(available), seed);

        let half1: BTreeSet<_> = plan.half1.iter().collect();
        let half2: BTreeSet<_> = plan.half2.iter().collect();
        prop_assert!(half1.is_disjoint(&half2));
        prop_assert_eq!(half1.len() + half2.len(), ids);

        let classes = catalog.class_index();
        for r in &records {
            let is_morph = r.kind == SampleKind::Morph;
            prop_assert_eq!(is_morph, r.y1 != r.y2);
            prop_assert_eq!(is_morph, r.cross_label() == 1);
            if is_morph {
                prop_assert!(half1.contains(&r.source_ids[0]));
                prop_assert!(half2.contains(&r.source_ids[1]));
                prop_assert_eq!(r.y1, classes[&r.source_ids[0]]);
                prop_assert_eq!(r.y2, classes[&r.source_ids[1]]);
            }
        }
        let pairs: BTreeSet<_> = plan.morph_pairs.iter().map(|p| (&p.first.image, &p.second.image)).collect();
        prop_assert_eq!(pairs.len(), plan.morph_pairs.len());

        let balanced = balance(records, seed, BonaFideMix::Both).unwrap();
        let m = balanced.iter().filter(|r| r.kind == SampleKind::Morph).count();
        prop_assert_eq!(2 * m, balanced.len());
    }
}

#[test]
fn plan_is_deterministic_per_seed() {
    let catalog = common::fake_catalog(8, 4);
    let (a, ra) = common::planned_records(&catalog, 30, 11);
    let (b, rb) = common::planned_records(&catalog, 30, 11);
    assert_eq!(a, b);
    assert_eq!(ra, rb);
    let (c, _) = common::planned_records(&catalog, 30, 12);
    assert_ne!(a.morph_pairs, c.morph_pairs);
}

#[test]
fn mix_selects_non_morph_kinds() {
    let catalog = common::fake_catalog(6, 5);
    let (_, records) = common::planned_records(&catalog, 40, 3);
    let only_self = balance(records.clone(), 3, BonaFideMix::SelfmorphsOnly).unwrap();
    assert!(only_self.iter().all(|r| r.kind != SampleKind::BonaFide));
    let only_orig = balance(records, 3, BonaFideMix::OriginalOnly).unwrap();
    assert!(only_orig.iter().all(|r| r.kind != SampleKind::Selfmorph));
}

#[test]
fn too_many_pairs_is_rejected() {
    let catalog = common::fake_catalog(2, 2);
    let (h1, h2) = fusedmad::harvest::split_identities(&catalog, 0).unwrap();
    assert!(fusedmad::harvest::plan_morphs(&catalog, &h1, &h2, 5, 0).is_err());
    assert!(fusedmad::harvest::plan_morphs(&catalog, &h1, &h2, 4, 0).is_ok());
}

#[test]
fn harvest_renders_and_writes_manifests() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SynthConfig {
        identities: 4,
        captures: 3,
        ..SynthConfig::default()
    };
    let ids = make_identities(cfg.identities, cfg.size, 1);
    let catalog = write_identities(&dir.path().join("faces"), &ids, &cfg, 2).unwrap();
    let opts = HarvestOptions {
        morph_count: 10,
        seed: 5,
        alpha: 0.5,
        mix: BonaFideMix::Both,
    };
    let out = harvest(&catalog, &dir.path().join("h"), &opts).unwrap();
    assert!(out.failures.is_empty());
    assert_eq!(load_records(&out.records_path).unwrap(), out.records);
    assert_eq!(load_pairs(&out.pairs_path).unwrap(), out.pairs);
    for r in &out.records {
        assert!(r.image_path.is_file(), "{}", r.image_path.display());
    }
    let mut counts: BTreeMap<bool, usize> = BTreeMap::new();
    for r in &out.records {
        *counts.entry(r.kind == SampleKind::Morph).or_default() += 1;
    }
    assert_eq!(counts[&true], counts[&false]);

    // Same seed, same output bytes.
    let again = harvest(&catalog, &dir.path().join("h2"), &opts).unwrap();
    let name = |p: &std::path::Path| p.file_name().unwrap().to_owned();
    for (a, b) in out.records.iter().zip(&again.records) {
        assert_eq!(name(&a.image_path), name(&b.image_path));
        if a.kind != SampleKind::BonaFide {
            assert_eq!(
                std::fs::read(&a.image_path).unwrap(),
                std::fs::read(&b.image_path).unwrap()
            );
        }
    }
}

//! Slow, obviously-correct reference implementations used as oracles.
#![allow(dead_code)]

use std::collections::BTreeSet;

use fusedmad::morph::Point;
use fusedmad::quality::{Decision, Direction};

/// All triangles whose circumcircle holds no other input point strictly
/// inside, as sorted index triples. Exact for points in general position.
pub fn brute_delaunay(points: &[Point]) -> BTreeSet<[usize; 3]> {
    let n = points.len();
    let mut out = BTreeSet::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let (a, b, c) = (points[i], points[j], points[k]);
                let area2 = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
                if area2.abs() < 1e-12 {
                    continue;
                }
                let (cx, cy, r2) = circumcircle(a, b, c);
                let empty = (0..n).filter(|&m| m != i && m != j && m != k).all(|m| {
                    let p = points[m];
                    let d2 = (p.x - cx).powi(2) + (p.y - cy).powi(2);
                    d2 >= r2 * (1.0 - 1e-12)
                });
                if empty {
                    out.insert([i, j, k]);
                }
            }
        }
    }
    out
}

fn circumcircle(a: Point, b: Point, c: Point) -> (f64, f64, f64) {
    let d = 2.0 * (a.x * (b.y - c.y) + b.x * (c.y - a.y) + c.x * (a.y - b.y));
    let sa = a.x * a.x + a.y * a.y;
    let sb = b.x * b.x + b.y * b.y;
    let sc = c.x * c.x + c.y * c.y;
    let cx = (sa * (b.y - c.y) + sb * (c.y - a.y) + sc * (a.y - b.y)) / d;
    let cy = (sa * (c.x - b.x) + sb * (a.x - c.x) + sc * (b.x - a.x)) / d;
    (cx, cy, (a.x - cx).powi(2) + (a.y - cy).powi(2))
}

/// Sorted index triples of a mesh, for set comparison.
pub fn normalize(triangles: &[[usize; 3]]) -> BTreeSet<[usize; 3]> {
    triangles
        .iter()
        .map(|t| {
            let mut s = *t;
            s.sort_unstable();
            s
        })
        .collect()
}

/// `(threshold, apcer, bpcer)` at `-inf`, each distinct score and `+inf`,
/// each computed by a full count.
pub fn det_oracle(bona: &[f64], morph: &[f64]) -> Vec<(f64, f64, f64)> {
    let mut thresholds: Vec<f64> = bona.iter().chain(morph).copied().collect();
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();
    let mut all = vec![f64::NEG_INFINITY];
    all.extend(thresholds);
    all.push(f64::INFINITY);
    all.into_iter()
        .map(|th| {
            let apcer = morph.iter().filter(|&&s| s < th).count() as f64 / morph.len() as f64;
            let bpcer = bona.iter().filter(|&&s| s >= th).count() as f64 / bona.len() as f64;
            (th, apcer, bpcer)
        })
        .collect()
}

pub fn apcer_at_bpcer_oracle(bona: &[f64], morph: &[f64], delta: f64) -> f64 {
    let mut best = 1.0f64;
    for (_, apcer, bpcer) in det_oracle(bona, morph) {
        if bpcer <= delta && apcer < best {
            best = apcer;
        }
    }
    best
}

pub fn bpcer_at_apcer_oracle(bona: &[f64], morph: &[f64], delta: f64) -> f64 {
    let mut best = 1.0f64;
    for (_, apcer, bpcer) in det_oracle(bona, morph) {
        if apcer <= delta && bpcer < best {
            best = bpcer;
        }
    }
    best
}

/// Exhaustive scan of every distinct score as a quality threshold.
/// Returns `(threshold, (far + frr) / 2)` under the documented tie rule.
pub fn eer_oracle(scores: &[f64], labels: &[Decision], direction: Direction) -> (f64, f64) {
    let n_acc = labels.iter().filter(|&&d| d == Decision::Accept).count() as f64;
    let n_rej = labels.len() as f64 - n_acc;
    let mut cands: Vec<f64> = scores.to_vec();
    cands.sort_by(f64::total_cmp);
    cands.dedup();
    let mut best: Option<(f64, f64, f64, f64)> = None;
    for th in cands {
        let mut far = 0usize;
        let mut frr = 0usize;
        for (&s, &d) in scores.iter().zip(labels) {
            let pass = match direction {
                Direction::HigherIsBetter => s >= th,
                Direction::LowerIsBetter => s <= th,
            };
            match (d, pass) {
                (Decision::Reject, true) => far += 1,
                (Decision::Accept, false) => frr += 1,
                _ => {}
            }
        }
        let (far, frr) = (far as f64 / n_rej, frr as f64 / n_acc);
        let key = ((far - frr).abs(), far.max(frr), th, (far + frr) / 2.0);
        let better = match best {
            None => true,
            Some(b) => (key.0, key.1, key.2) < (b.0, b.1, b.2),
        };
        if better {
            best = Some(key);
        }
    }
    let b = best.expect("non-empty scores");
    (b.2, b.3)
}

/// Softmax cross-entropy of one row, written out directly.
pub fn xent(row: &[f64], label: usize) -> f64 {
    let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = row.iter().map(|v| (v - m).exp()).sum();
    -(row[label] - m - z.ln())
}

/// Binary cross-entropy of `sigmoid(d)` against `t`.
pub fn bce(d: f64, t: f64) -> f64 {
    let p = 1.0 / (1.0 + (-d).exp());
    -(t * p.ln() + (1.0 - t) * (1.0 - p).ln())
}

/// Catalog of `ids` identities with `per` images each; the files need not
/// exist for planning and labelling.
pub fn fake_catalog(ids: usize, per: usize) -> fusedmad::harvest::IdentityCatalog {
    use fusedmad::harvest::{CatalogImage, IdentityCatalog};
    IdentityCatalog::new(
        (0..ids)
            .map(|i| {
                let id = format!("p{i:04}");
                let images = (0..per)
                    .map(|k| {
                        CatalogImage::with_sibling_landmarks(format!("/cat/{id}/{k:03}.png").into())
                    })
                    .collect();
                (id, images)
            })
            .collect(),
    )
    .unwrap()
}

/// Split, plan and label a fake catalog without rendering anything.
pub fn planned_records(
    catalog: &fusedmad::harvest::IdentityCatalog,
    morphs: usize,
    seed: u64,
) -> (
    fusedmad::harvest::PairingPlan,
    Vec<fusedmad::harvest::SampleRecord>,
) {
    use fusedmad::harvest::*;
    let (half1, half2) = split_identities(catalog, seed).unwrap();
    let morph_pairs = plan_morphs(catalog, &half1, &half2, morphs, seed).unwrap();
    let selfmorph_pairs = plan_selfmorphs(catalog, seed).unwrap();
    let plan = PairingPlan {
        half1,
        half2,
        morph_pairs,
        selfmorph_pairs,
        seed,
    };
    let records = assign_labels(&plan, catalog, std::path::Path::new("/gen")).unwrap();
    (plan, records)
}

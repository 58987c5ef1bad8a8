use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{cross_labels, preprocess, DualModel, ModelError, TrainConfig};
use crate::harvest::SampleRecord;
use crate::morph::Image;
use crate::numgrad::{sgd_step, DenseArray};

/// Preprocessed images with their two labels.
#[derive(Debug, Clone)]
pub struct TrainingSet {
    /// `[n, input_dim]`
    pub x: DenseArray,
    pub y1: Vec<usize>,
    pub y2: Vec<usize>,
}

impl TrainingSet {
    pub fn new(x: DenseArray, y1: Vec<usize>, y2: Vec<usize>) -> Result<Self, ModelError> {
        let (n, _) = x
            .dims2()
            .ok_or_else(|| ModelError::Shape(format!("x must be [n, dim], got {:?}", x.shape())))?;
        if y1.len() != n || y2.len() != n {
            return Err(ModelError::Shape(format!(
                "{n} rows but {} / {} labels",
                y1.len(),
                y2.len()
            )));
        }
        Ok(Self { x, y1, y2 })
    }

    pub fn len(&self) -> usize {
        self.y1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y1.is_empty()
    }

    /// Largest label plus one.
    pub fn classes(&self) -> usize {
        self.y1.iter().chain(&self.y2).max().map_or(0, |m| m + 1)
    }

    fn rows(&self, idx: &[usize]) -> DenseArray {
        let dim = self.x.shape()[1];
        let mut data = Vec::with_capacity(idx.len() * dim);
        for &i in idx {
            data.extend_from_slice(self.x.row(i));
        }
        DenseArray::new(vec![idx.len(), dim], data).expect("rows of a valid matrix")
    }
}

/// Loads and preprocesses every record image (in parallel, order kept).
pub fn load_training_set(records: &[SampleRecord], side: usize) -> Result<TrainingSet, ModelError> {
    let rows: Vec<Vec<f64>> = records
        .par_iter()
        .map(|r| Image::load(&r.image_path).map(|img| preprocess(&img, side)))
        .collect::<Result<_, _>>()?;
    let data: Vec<f64> = rows.into_iter().flatten().collect();
    let x = DenseArray::new(vec![records.len(), side * side], data)?;
    TrainingSet::new(
        x,
        records.iter().map(|r| r.y1).collect(),
        records.iter().map(|r| r.y2).collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub step: usize,
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    pub total: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: DualModel,
    pub trace: Vec<TraceRow>,
}

/// Mini-batch SGD on the weighted loss, single image per sample (both
/// networks see the same input).
///
/// Each epoch reshuffles with one seeded stream; the last batch of an epoch
/// may be short. The trace holds the losses of every step before its update.
pub fn train(
    model: DualModel,
    data: &TrainingSet,
    cfg: &TrainConfig,
) -> Result<TrainOutcome, ModelError> {
    cfg.validate()?;
    if data.x.shape()[1] != model.arch().input_dim {
        return Err(ModelError::Shape(format!(
            "training inputs have {} values, model expects {}",
            data.x.shape()[1],
            model.arch().input_dim
        )));
    }
    let classes = model.arch().classes;
    if let Some(&bad) = data.y1.iter().chain(&data.y2).find(|&&y| y >= classes) {
        return Err(ModelError::BadLabel {
            label: bad,
            classes,
        });
    }

    let mut graph = model.graph(Some((cfg.alpha1, cfg.alpha2, cfg.beta)));
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut trace = Vec::new();
    let mut step = 0;
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for idx in order.chunks(cfg.batch) {
            let x = data.rows(idx);
            let y1: Vec<usize> = idx.iter().map(|&i| data.y1[i]).collect();
            let y2: Vec<usize> = idx.iter().map(|&i| data.y2[i]).collect();
            let t = cross_labels(&y1, &y2);
            let as_f64 = |v: &[usize]| DenseArray::from_vec(v.iter().map(|&y| y as f64).collect());
            let inputs = BTreeMap::from([
                ("x1".to_string(), x.clone()),
                ("x2".to_string(), x),
                ("y1".to_string(), as_f64(&y1)),
                ("y2".to_string(), as_f64(&y2)),
                ("t".to_string(), DenseArray::from_vec(t)),
            ]);
            let out = graph.forward(&inputs).map_err(|e| ModelError::Diverged {
                step,
                detail: e.to_string(),
            })?;
            let get = |k: &str| out[k].item().expect("scalar loss");
            let row = TraceRow {
                step,
                l1: get("L1"),
                l2: get("L2"),
                l3: get("L3"),
                total: get("L"),
            };
            let grads = graph.backward("L")?;
            if !grads.all_finite() {
                return Err(ModelError::Diverged {
                    step,
                    detail: "non-finite gradient".into(),
                });
            }
            sgd_step(graph.params_mut(), &grads, cfg.lr)?;
            trace.push(row);
            step += 1;
        }
    }
    let mut model = model;
    model.set_params(graph.into_params());
    Ok(TrainOutcome { model, trace })
}

/// `step,L1,L2,L3,L` rows.
pub fn write_trace<W: Write>(mut w: W, trace: &[TraceRow]) -> std::io::Result<()> {
    writeln!(w, "step,L1,L2,L3,L")?;
    for r in trace {
        writeln!(w, "{},{},{},{},{}", r.step, r.l1, r.l2, r.l3, r.total)?;
    }
    Ok(())
}

/// Convenience for [`write_trace`] to a file.
pub fn save_trace(path: &Path, trace: &[TraceRow]) -> Result<(), ModelError> {
    let f = std::fs::File::create(path).map_err(|e| ModelError::Io {
        path: path.display().to_string(),
        detail: e.to_string(),
    })?;
    write_trace(std::io::BufWriter::new(f), trace).map_err(|e| ModelError::Io {
        path: path.display().to_string(),
        detail: e.to_string(),
    })
}

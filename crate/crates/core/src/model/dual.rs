use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{BackboneConfig, ModelError};
use crate::morph::Image;
use crate::numgrad::{checkpoint, sigmoid, DenseArray, Graph, NodeId, ParamStore};

/// Shapes of a [`DualModel`], recoverable from its parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Architecture {
    pub input_dim: usize,
    pub hidden: Vec<usize>,
    pub feature_dim: usize,
    pub classes: usize,
    pub shared: bool,
}

impl Architecture {
    /// Widths from input to feature layer.
    fn widths(&self) -> Vec<usize> {
        let mut w = vec![self.input_dim];
        w.extend(&self.hidden);
        w.push(self.feature_dim);
        w
    }

    fn layer_count(&self) -> usize {
        self.hidden.len() + 1
    }

    fn backbone_prefix(&self, net: usize) -> &'static str {
        if net == 1 || self.shared {
            "bb1"
        } else {
            "bb2"
        }
    }

    /// Side of the square input, when `input_dim` is a perfect square.
    pub fn input_side(&self) -> Option<usize> {
        let s = (self.input_dim as f64).sqrt().round() as usize;
        (s * s == self.input_dim).then_some(s)
    }
}

/// Everything the paired forward pass computes, one row per sample.
#[derive(Debug, Clone)]
pub struct PairOutput {
    pub f1: DenseArray,
    pub f2: DenseArray,
    pub logits1: DenseArray,
    pub logits2: DenseArray,
    /// Unnormalized `f1 . f2` per row.
    pub d: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualModel {
    arch: Architecture,
    params: ParamStore,
}

/// Grayscale, resized to `side x side`, standardized to zero mean and unit
/// variance (flat images are only centred).
pub fn preprocess(image: &Image, side: usize) -> Vec<f64> {
    let v: Vec<f64> = image.resize_gray(side).into_iter().map(f64::from).collect();
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    let scale = if var > 1e-12 { 1.0 / var.sqrt() } else { 1.0 };
    v.into_iter().map(|x| (x - mean) * scale).collect()
}

fn uniform(rng: &mut ChaCha8Rng, shape: &[usize], fan_in: usize) -> DenseArray {
    let bound = 1.0 / (fan_in as f64).sqrt();
    let mut a = DenseArray::zeros(shape);
    for v in a.data_mut() {
        *v = rng.random_range(-bound..bound);
    }
    a
}

impl DualModel {
    /// Uniform `+-1/sqrt(fan_in)` weights and zero biases, drawn in a fixed
    /// order from `seed`. With `mirrored`, network 2 starts as a copy of
    /// network 1.
    pub fn init(
        backbone: &BackboneConfig,
        classes: usize,
        shared: bool,
        mirrored: bool,
        seed: u64,
    ) -> Result<Self, ModelError> {
        backbone.validate()?;
        if classes < 2 {
            return Err(ModelError::Config(format!(
                "need at least 2 classes, got {classes}"
            )));
        }
        let arch = Architecture {
            input_dim: backbone.input_dim(),
            hidden: backbone.hidden.clone(),
            feature_dim: backbone.feature_dim,
            classes,
            shared,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = ParamStore::new();
        let widths = arch.widths();
        let nets: &[usize] = if shared { &[1] } else { &[1, 2] };
        for &net in nets {
            let prefix = arch.backbone_prefix(net);
            for (l, pair) in widths.windows(2).enumerate() {
                let (fan_in, fan_out) = (pair[0], pair[1]);
                let w = uniform(&mut rng, &[fan_in, fan_out], fan_in);
                params.insert(&format!("{prefix}.l{l}.w"), w);
                params.insert(&format!("{prefix}.l{l}.b"), DenseArray::zeros(&[fan_out]));
            }
        }
        for head in ["head1", "head2"] {
            let w = uniform(&mut rng, &[classes, arch.feature_dim], arch.feature_dim);
            params.insert(&format!("{head}.w"), w);
            params.insert(&format!("{head}.b"), DenseArray::zeros(&[classes]));
        }
        if mirrored {
            let copies: Vec<(String, DenseArray)> = params
                .iter()
                .filter_map(|(name, v)| {
                    let twin = name
                        .strip_prefix("bb1.")
                        .filter(|_| !shared)
                        .map(|rest| format!("bb2.{rest}"))
                        .or_else(|| {
                            name.strip_prefix("head1.")
                                .map(|rest| format!("head2.{rest}"))
                        })?;
                    Some((twin, v.clone()))
                })
                .collect();
            for (name, v) in copies {
                params.insert(&name, v);
            }
        }
        Ok(Self { arch, params })
    }

    /// Rebuilds a model from checkpointed parameters, inferring its shapes.
    pub fn from_params(params: ParamStore) -> Result<Self, ModelError> {
        let bad = |msg: String| ModelError::Checkpoint(msg);
        let dims = |name: &str| -> Result<Vec<usize>, ModelError> {
            params
                .get(name)
                .map(|a| a.shape().to_vec())
                .ok_or_else(|| bad(format!("missing parameter '{name}'")))
        };
        let mut widths = Vec::new();
        let mut l = 0;
        while params.contains(&format!("bb1.l{l}.w")) {
            let w = dims(&format!("bb1.l{l}.w"))?;
            if w.len() != 2 {
                return Err(bad(format!("bb1.l{l}.w is not a matrix")));
            }
            if l == 0 {
                widths.push(w[0]);
            } else if widths[l] != w[0] {
                return Err(bad(format!(
                    "bb1.l{l}.w does not chain with the previous layer"
                )));
            }
            widths.push(w[1]);
            l += 1;
        }
        if widths.len() < 2 {
            return Err(bad("no backbone layers".into()));
        }
        let head = dims("head1.w")?;
        if head.len() != 2 {
            return Err(bad("head1.w is not a matrix".into()));
        }
        let arch = Architecture {
            input_dim: widths[0],
            hidden: widths[1..widths.len() - 1].to_vec(),
            feature_dim: widths[widths.len() - 1],
            classes: head[0],
            shared: !params.contains("bb2.l0.w"),
        };
        let model = Self { arch, params };
        model.check_shapes()?;
        Ok(model)
    }

    fn expected_shapes(&self) -> BTreeMap<String, Vec<usize>> {
        let a = &self.arch;
        let mut out = BTreeMap::new();
        let nets: &[usize] = if a.shared { &[1] } else { &[1, 2] };
        for &net in nets {
            let prefix = a.backbone_prefix(net);
            for (l, pair) in a.widths().windows(2).enumerate() {
                out.insert(format!("{prefix}.l{l}.w"), pair.to_vec());
                out.insert(format!("{prefix}.l{l}.b"), vec![pair[1]]);
            }
        }
        for head in ["head1", "head2"] {
            out.insert(format!("{head}.w"), vec![a.classes, a.feature_dim]);
            out.insert(format!("{head}.b"), vec![a.classes]);
        }
        out
    }

    fn check_shapes(&self) -> Result<(), ModelError> {
        let expected = self.expected_shapes();
        for (name, value) in self.params.iter() {
            match expected.get(name) {
                None => {
                    return Err(ModelError::Checkpoint(format!(
                        "unexpected parameter '{name}'"
                    )))
                }
                Some(s) if s.as_slice() != value.shape() => {
                    return Err(ModelError::Checkpoint(format!(
                        "'{name}' has shape {:?}, expected {s:?}",
                        value.shape()
                    )))
                }
                Some(_) => {}
            }
        }
        if let Some(missing) = expected.keys().find(|k| !self.params.contains(k)) {
            return Err(ModelError::Checkpoint(format!(
                "missing parameter '{missing}'"
            )));
        }
        if !self.params.all_finite() {
            return Err(ModelError::Checkpoint("non-finite parameter values".into()));
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, ModelError> {
        Self::from_params(checkpoint::load(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<(), ModelError> {
        Ok(checkpoint::save(path, &self.params)?)
    }

    pub fn arch(&self) -> &Architecture {
        &self.arch
    }

    pub fn params(&self) -> &ParamStore {
        &self.params
    }

    pub(crate) fn set_params(&mut self, params: ParamStore) {
        self.params = params;
    }

    fn backbone(&self, g: &mut Graph, x: NodeId, net: usize) -> NodeId {
        let prefix = self.arch.backbone_prefix(net);
        let mut h = x;
        for l in 0..self.arch.layer_count() {
            let w = g
                .param(&format!("{prefix}.l{l}.w"))
                .expect("valid parameter name");
            let b = g
                .param(&format!("{prefix}.l{l}.b"))
                .expect("valid parameter name");
            let z = g.matmul(h, w);
            h = g.add_bias(z, b);
            if l + 1 < self.arch.layer_count() {
                h = g.relu(h);
            }
        }
        h
    }

    fn head(&self, g: &mut Graph, f: NodeId, tag: &str) -> NodeId {
        let w = g.param(&format!("{tag}.w")).expect("valid parameter name");
        let b = g.param(&format!("{tag}.b")).expect("valid parameter name");
        let z = g.matmul_t(f, w);
        g.add_bias(z, b)
    }

    /// Graph over inputs `x1`, `x2` exposing `f1`, `f2`, `logits1`,
    /// `logits2` and `D`. With `weights = Some((alpha1, alpha2, beta))` it
    /// also takes `y1`, `y2`, `t` and exposes `L1`, `L2`, `L3` and `L`.
    pub fn graph(&self, weights: Option<(f64, f64, f64)>) -> Graph {
        let mut g = Graph::with_params(self.params.clone());
        let dim = [None, Some(self.arch.input_dim)];
        let x1 = g.input("x1", &dim);
        let x2 = g.input("x2", &dim);
        let f1 = self.backbone(&mut g, x1, 1);
        let f2 = self.backbone(&mut g, x2, 2);
        let logits1 = self.head(&mut g, f1, "head1");
        let logits2 = self.head(&mut g, f2, "head2");
        let d = g.row_dot(f1, f2);
        for (node, name) in [
            (f1, "f1"),
            (f2, "f2"),
            (logits1, "logits1"),
            (logits2, "logits2"),
            (d, "D"),
        ] {
            g.name(node, name);
        }
        if let Some((a1, a2, b)) = weights {
            let y1 = g.input("y1", &[None]);
            let y2 = g.input("y2", &[None]);
            let t = g.input("t", &[None]);
            let l1 = g.softmax_xent(logits1, y1);
            let l2 = g.softmax_xent(logits2, y2);
            let l3 = g.sigmoid_bce(d, t);
            let s1 = g.scale(l1, a1);
            let s2 = g.scale(l2, a2);
            let s3 = g.scale(l3, b);
            let sum = g.add(s1, s2);
            let total = g.add(sum, s3);
            for (node, name) in [(l1, "L1"), (l2, "L2"), (l3, "L3"), (total, "L")] {
                g.name(node, name);
            }
        }
        g
    }

    fn check_input(&self, x: &DenseArray, tag: &str) -> Result<(), ModelError> {
        match x.dims2() {
            Some((_, n)) if n == self.arch.input_dim => Ok(()),
            _ => Err(ModelError::Shape(format!(
                "{tag} has shape {:?}, model expects [batch, {}]",
                x.shape(),
                self.arch.input_dim
            ))),
        }
    }

    /// Network 1 sees `x1`, network 2 sees `x2`.
    pub fn forward_pair(&self, x1: &DenseArray, x2: &DenseArray) -> Result<PairOutput, ModelError> {
        self.check_input(x1, "x1")?;
        self.check_input(x2, "x2")?;
        if x1.shape() != x2.shape() {
            return Err(ModelError::Shape(format!(
                "x1 {:?} and x2 {:?} differ in batch size",
                x1.shape(),
                x2.shape()
            )));
        }
        let mut g = self.graph(None);
        let inputs = BTreeMap::from([
            ("x1".to_string(), x1.clone()),
            ("x2".to_string(), x2.clone()),
        ]);
        let mut out = g.forward(&inputs)?;
        let mut take = |k: &str| out.remove(k).expect("graph names its outputs");
        Ok(PairOutput {
            f1: take("f1"),
            f2: take("f2"),
            logits1: take("logits1"),
            logits2: take("logits2"),
            d: take("D").into_data(),
        })
    }

    /// `sigmoid(f1 . f2)` per row; higher means morph.
    pub fn scores(&self, x1: &DenseArray, x2: &DenseArray) -> Result<Vec<f64>, ModelError> {
        Ok(self
            .forward_pair(x1, x2)?
            .d
            .into_iter()
            .map(sigmoid)
            .collect())
    }

    fn image_row(&self, image: &Image) -> Result<DenseArray, ModelError> {
        let side = self.arch.input_side().ok_or_else(|| {
            ModelError::Shape(format!("input_dim {} is not a square", self.arch.input_dim))
        })?;
        Ok(DenseArray::new(
            vec![1, self.arch.input_dim],
            preprocess(image, side),
        )?)
    }

    /// Single-image score: both networks receive `image`.
    pub fn morph_score(&self, image: &Image) -> Result<f64, ModelError> {
        let x = self.image_row(image)?;
        Ok(self.scores(&x, &x)?[0])
    }

    /// Network 1 receives the enrolled image, network 2 the live capture.
    pub fn differential_score(&self, enrolled: &Image, live: &Image) -> Result<f64, ModelError> {
        let x1 = self.image_row(enrolled)?;
        let x2 = self.image_row(live)?;
        Ok(self.scores(&x1, &x2)?[0])
    }
}

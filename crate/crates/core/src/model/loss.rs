use super::{ModelError, TrainConfig};
use crate::numgrad::{bce_with_logit, log_sum_exp, DenseArray};

/// Mean softmax cross-entropy of `[m, C]` logits against class indices.
pub fn loss_identity(logits: &DenseArray, labels: &[usize]) -> Result<f64, ModelError> {
    let (m, c) = logits.dims2().ok_or_else(|| {
        ModelError::Shape(format!("logits must be [m, C], got {:?}", logits.shape()))
    })?;
    if labels.len() != m {
        return Err(ModelError::Shape(format!(
            "{} labels for {m} rows",
            labels.len()
        )));
    }
    let mut total = 0.0;
    for (i, &y) in labels.iter().enumerate() {
        if y >= c {
            return Err(ModelError::BadLabel {
                label: y,
                classes: c,
            });
        }
        let row = logits.row(i);
        total += log_sum_exp(row) - row[y];
    }
    Ok(total / m as f64)
}

/// Mean binary cross-entropy of `sigmoid(d)` against `t`.
pub fn loss_morph(d: &[f64], t: &[f64]) -> f64 {
    assert_eq!(d.len(), t.len(), "one target per score");
    d.iter()
        .zip(t)
        .map(|(&d, &t)| bce_with_logit(d, t))
        .sum::<f64>()
        / d.len() as f64
}

/// `alpha1 * l1 + alpha2 * l2 + beta * l3`.
pub fn total_loss(l1: f64, l2: f64, l3: f64, cfg: &TrainConfig) -> f64 {
    cfg.alpha1 * l1 + cfg.alpha2 * l2 + cfg.beta * l3
}

/// `t_i = |sgn(y1_i - y2_i)|`.
pub fn cross_labels(y1: &[usize], y2: &[usize]) -> Vec<f64> {
    y1.iter()
        .zip(y2)
        .map(|(a, b)| f64::from(u8::from(a != b)))
        .collect()
}

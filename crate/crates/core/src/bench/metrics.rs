use super::{BenchError, ScoreSet, Truth};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetPoint {
    pub threshold: f64,
    /// Fraction of morphs scored below the threshold.
    pub apcer: f64,
    /// Fraction of bona fide images scored at or above the threshold.
    pub bpcer: f64,
}

/// Operating points at `-inf`, every distinct score, and `+inf`, in
/// increasing threshold order. APCER rises and BPCER falls along the curve.
#[derive(Debug, Clone, PartialEq)]
pub struct DetCurve {
    pub points: Vec<DetPoint>,
}

pub fn det_curve(scores: &ScoreSet) -> Result<DetCurve, BenchError> {
    let mut items: Vec<(f64, Truth)> = Vec::with_capacity(scores.rows.len());
    for r in &scores.rows {
        if let Some(s) = r.score {
            if !s.is_finite() {
                return Err(BenchError::NonFinite {
                    path: r.path.clone(),
                    value: s,
                });
            }
            items.push((s, r.truth));
        }
    }
    let n_morph = items.iter().filter(|i| i.1 == Truth::Morph).count();
    let n_bona = items.len() - n_morph;
    if n_morph == 0 || n_bona == 0 {
        return Err(BenchError::SingleClass);
    }
    items.sort_by(|a, b| a.0.total_cmp(&b.0));

    let point = |threshold, below_morph: usize, below_bona: usize| DetPoint {
        threshold,
        apcer: below_morph as f64 / n_morph as f64,
        bpcer: (n_bona - below_bona) as f64 / n_bona as f64,
    };
    let mut points = vec![point(f64::NEG_INFINITY, 0, 0)];
    let (mut below_morph, mut below_bona) = (0, 0);
    let mut i = 0;
    while i < items.len() {
        let theta = items[i].0;
        points.push(point(theta, below_morph, below_bona));
        while i < items.len() && items[i].0 == theta {
            match items[i].1 {
                Truth::Morph => below_morph += 1,
                Truth::BonaFide => below_bona += 1,
            }
            i += 1;
        }
    }
    points.push(point(f64::INFINITY, below_morph, below_bona));
    Ok(DetCurve { points })
}

fn check_delta(delta: f64) -> Result<(), BenchError> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(BenchError::BadDelta(delta))
    }
}

/// Lowest APCER among points with BPCER at most `delta`; 1.0 if none.
pub fn apcer_at_bpcer(curve: &DetCurve, delta: f64) -> Result<f64, BenchError> {
    check_delta(delta)?;
    Ok(curve
        .points
        .iter()
        .filter(|p| p.bpcer <= delta)
        .map(|p| p.apcer)
        .fold(1.0, f64::min))
}

/// Lowest BPCER among points with APCER at most `delta`; 1.0 if none.
pub fn bpcer_at_apcer(curve: &DetCurve, delta: f64) -> Result<f64, BenchError> {
    check_delta(delta)?;
    Ok(curve
        .points
        .iter()
        .filter(|p| p.apcer <= delta)
        .map(|p| p.bpcer)
        .fold(1.0, f64::min))
}

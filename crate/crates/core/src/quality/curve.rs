use super::{Decision, Direction, QualityError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub threshold: f64,
    /// Fraction of rejected images that pass the threshold.
    pub far: f64,
    /// Fraction of accepted images that fail the threshold.
    pub frr: f64,
}

/// FAR/FRR at every distinct score, ordered from the loosest to the
/// strictest threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorCurve {
    pub direction: Direction,
    pub points: Vec<CurvePoint>,
}

/// Error rates of the manual labels against each candidate threshold.
pub fn far_frr(
    scores: &[f64],
    labels: &[Decision],
    direction: Direction,
) -> Result<ErrorCurve, QualityError> {
    assert_eq!(scores.len(), labels.len(), "one label per score");
    if let Some(&v) = scores.iter().find(|v| !v.is_finite()) {
        return Err(QualityError::NonFinite {
            image: "<scores>".into(),
            value: v,
        });
    }
    let n_accept = labels.iter().filter(|&&d| d == Decision::Accept).count();
    let n_reject = labels.len() - n_accept;
    if n_accept == 0 || n_reject == 0 {
        return Err(QualityError::SingleClass);
    }

    // Walk from loosest to strictest: ascending for higher-is-better,
    // descending otherwise. Everything before the current value fails.
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    if direction == Direction::LowerIsBetter {
        order.reverse();
    }

    let mut points = Vec::new();
    let mut failed_accept = 0usize;
    let mut failed_reject = 0usize;
    let mut i = 0;
    while i < order.len() {
        let theta = scores[order[i]];
        points.push(CurvePoint {
            threshold: theta,
            far: (n_reject - failed_reject) as f64 / n_reject as f64,
            frr: failed_accept as f64 / n_accept as f64,
        });
        while i < order.len() && scores[order[i]] == theta {
            match labels[order[i]] {
                Decision::Accept => failed_accept += 1,
                Decision::Reject => failed_reject += 1,
            }
            i += 1;
        }
    }
    Ok(ErrorCurve { direction, points })
}

/// The curve point closest to FAR = FRR.
///
/// Minimizes `|FAR - FRR|`; ties prefer the smaller `max(FAR, FRR)`, then
/// the lower threshold. Returns `(threshold, (FAR + FRR) / 2)`.
pub fn eer_threshold(curve: &ErrorCurve) -> (f64, f64) {
    let best = curve
        .points
        .iter()
        .min_by(|a, b| {
            let key = |p: &CurvePoint| ((p.far - p.frr).abs(), p.far.max(p.frr), p.threshold);
            let (ka, kb) = (key(a), key(b));
            ka.0.total_cmp(&kb.0)
                .then(ka.1.total_cmp(&kb.1))
                .then(ka.2.total_cmp(&kb.2))
        })
        .expect("curves have at least one point");
    (best.threshold, (best.far + best.frr) / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use Decision::{Accept as A, Reject as R};

    #[test]
    fn perfect_separation_reaches_zero_errors() {
        let scores = [1.0, 2.0, 3.0, 4.0];
        let labels = [R, R, A, A];
        let curve = far_frr(&scores, &labels, Direction::HigherIsBetter).unwrap();
        assert!(curve.points.iter().any(|p| p.far == 0.0 && p.frr == 0.0));
        assert_eq!(eer_threshold(&curve), (3.0, 0.0));
    }

    #[test]
    fn uninformative_scores_sum_to_one() {
        // every score value appears once per class
        let scores = [0.1, 0.1, 0.5, 0.5, 0.9, 0.9];
        let labels = [A, R, R, A, A, R];
        let curve = far_frr(&scores, &labels, Direction::HigherIsBetter).unwrap();
        for p in &curve.points {
            assert!((p.far + p.frr - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn single_value_gives_half_error() {
        let curve = far_frr(&[0.3; 4], &[A, R, R, A], Direction::HigherIsBetter).unwrap();
        assert_eq!(curve.points.len(), 1);
        assert_eq!(eer_threshold(&curve), (0.3, 0.5));
    }

    #[test]
    fn single_class_is_rejected() {
        assert!(matches!(
            far_frr(&[1.0, 2.0], &[A, A], Direction::HigherIsBetter),
            Err(QualityError::SingleClass)
        ));
    }

    #[test]
    fn reversing_direction_mirrors_the_curve() {
        let scores = [0.2, 0.7, 0.4, 0.9, 0.1, 0.4];
        let labels = [R, A, R, A, A, R];
        let neg: Vec<f64> = scores.iter().map(|s| -s).collect();
        let lower = far_frr(&scores, &labels, Direction::LowerIsBetter).unwrap();
        let higher = far_frr(&neg, &labels, Direction::HigherIsBetter).unwrap();
        assert_eq!(lower.points.len(), higher.points.len());
        for (l, h) in lower.points.iter().zip(&higher.points) {
            assert_eq!(l.threshold, -h.threshold);
            assert_eq!((l.far, l.frr), (h.far, h.frr));
        }
    }

    #[test]
    fn curves_are_monotone() {
        let scores = [0.5, 0.1, 0.3, 0.3, 0.8, 0.6, 0.2];
        let labels = [A, R, A, R, A, R, R];
        for dir in [Direction::HigherIsBetter, Direction::LowerIsBetter] {
            let c = far_frr(&scores, &labels, dir).unwrap();
            for w in c.points.windows(2) {
                assert!(w[1].far <= w[0].far && w[1].frr >= w[0].frr);
            }
        }
    }
}

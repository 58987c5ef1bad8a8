use super::{NumgradError, ParamStore};

/// Plain gradient descent: `theta <- theta - lr * g` for every parameter.
///
/// A zero learning rate is accepted and leaves parameters untouched.
pub fn sgd_step(
    params: &mut ParamStore,
    grads: &ParamStore,
    learning_rate: f64,
) -> Result<(), NumgradError> {
    if !(learning_rate >= 0.0 && learning_rate.is_finite()) {
        return Err(NumgradError::InvalidArgument(format!(
            "learning rate must be finite and non-negative, got {learning_rate}"
        )));
    }
    for (name, value) in params.iter() {
        let grad = grads
            .get(name)
            .ok_or_else(|| NumgradError::UnknownParam(name.clone()))?;
        if grad.shape() != value.shape() {
            return Err(NumgradError::ShapeMismatch {
                node: format!("param '{name}'"),
                detail: format!("gradient {:?} vs value {:?}", grad.shape(), value.shape()),
            });
        }
    }
    if learning_rate == 0.0 {
        return Ok(());
    }
    for (name, value) in params.iter_mut() {
        let grad = grads.get(name).expect("validated above");
        for (v, g) in value.data_mut().iter_mut().zip(grad.data()) {
            *v -= learning_rate * g;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numgrad::DenseArray;

    fn single(name: &str, v: f64) -> ParamStore {
        let mut p = ParamStore::new();
        p.insert(name, DenseArray::scalar(v));
        p
    }

    #[test]
    fn basic_step() {
        let mut p = single("theta", 1.0);
        sgd_step(&mut p, &single("theta", 2.0), 0.1).unwrap();
        assert!((p.get("theta").unwrap().data()[0] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn zero_gradient_is_a_no_op() {
        let mut p = single("theta", 1.25);
        sgd_step(&mut p, &single("theta", 0.0), 0.5).unwrap();
        assert_eq!(p.get("theta").unwrap().data()[0], 1.25);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let mut p = ParamStore::new();
        p.insert("w", DenseArray::zeros(&[2, 2]));
        let mut g = ParamStore::new();
        g.insert("w", DenseArray::zeros(&[4]));
        assert!(sgd_step(&mut p, &g, 0.1).is_err());
        assert!(sgd_step(&mut p, &ParamStore::new(), 0.1).is_err());
    }

    #[test]
    fn negative_rate_is_rejected() {
        let mut p = single("theta", 1.0);
        assert!(sgd_step(&mut p, &single("theta", 1.0), -0.1).is_err());
    }

    #[test]
    fn descent_on_quadratic_is_monotone() {
        // L(theta) = sum_i c_i (theta_i - m_i)^2, gradient 2 c_i (theta_i - m_i).
        let c = [1.0, 3.0, 0.5];
        let m = [2.0, -1.0, 4.0];
        let loss = |t: &[f64]| -> f64 {
            t.iter()
                .zip(&c)
                .zip(&m)
                .map(|((t, c), m)| c * (t - m).powi(2))
                .sum()
        };
        let mut p = ParamStore::new();
        p.insert("theta", DenseArray::from_vec(vec![0.0, 0.0, 0.0]));
        let lr = 0.1; // below 1 / max(c) keeps every coordinate contracting
        let mut prev = loss(p.get("theta").unwrap().data());
        for _ in 0..10 {
            let t = p.get("theta").unwrap().data().to_vec();
            let g: Vec<f64> = t
                .iter()
                .zip(&c)
                .zip(&m)
                .map(|((t, c), m)| 2.0 * c * (t - m))
                .collect();
            let mut grads = ParamStore::new();
            grads.insert("theta", DenseArray::from_vec(g));
            sgd_step(&mut p, &grads, lr).unwrap();
            let now = loss(p.get("theta").unwrap().data());
            assert!(now < prev, "{now} !< {prev}");
            // closed form per coordinate: (t - m) scales by (1 - 2 lr c)
            prev = now;
        }
        let t = p.get("theta").unwrap().data();
        for i in 0..3 {
            let expected = m[i] + (0.0 - m[i]) * (1.0 - 2.0 * lr * c[i]).powi(10);
            assert!((t[i] - expected).abs() < 1e-12);
        }
    }
}

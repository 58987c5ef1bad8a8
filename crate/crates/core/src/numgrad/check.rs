use std::collections::BTreeMap;
use std::fmt;

use super::{DenseArray, Graph, NumgradError};

/// Worst relative gradient error seen for one parameter array.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamCheck {
    pub name: String,
    pub max_rel_error: f64,
    /// Flat index of the worst element.
    pub worst_index: usize,
    pub analytic: f64,
    pub numeric: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub epsilon: f64,
    pub rtol: f64,
    pub params: Vec<ParamCheck>,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.params.iter().all(|p| p.max_rel_error <= self.rtol)
    }

    pub fn max_rel_error(&self) -> f64 {
        self.params
            .iter()
            .map(|p| p.max_rel_error)
            .fold(0.0, f64::max)
    }
}

impl fmt::Display for GradCheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.params {
            writeln!(
                f,
                "{:<16} max_rel_err={:.3e} at [{}] analytic={:.6e} numeric={:.6e}",
                p.name, p.max_rel_error, p.worst_index, p.analytic, p.numeric
            )?;
        }
        write!(
            f,
            "{} rtol={:e} (max_rel_err={:.3e}, {} parameter arrays)",
            if self.passed() { "PASS" } else { "FAIL" },
            self.rtol,
            self.max_rel_error(),
            self.params.len()
        )
    }
}

/// Compares backward-pass gradients of `loss` with central differences.
///
/// Each scalar parameter `theta` is perturbed to `theta +/- epsilon`; the
/// relative error is `|analytic - numeric| / max(|analytic|, epsilon)`.
/// Parameters are restored afterwards.
pub fn grad_check(
    graph: &mut Graph,
    inputs: &BTreeMap<String, DenseArray>,
    loss: &str,
    epsilon: f64,
    rtol: f64,
) -> Result<GradCheckReport, NumgradError> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(NumgradError::InvalidArgument(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    graph.forward(inputs)?;
    let analytic = graph.backward(loss)?;

    let eval = |graph: &mut Graph| -> Result<f64, NumgradError> {
        let out = graph.forward(inputs)?;
        out.get(loss)
            .and_then(DenseArray::item)
            .ok_or_else(|| NumgradError::MissingOutput(loss.to_string()))
    };

    let names: Vec<String> = graph.params().names().map(str::to_string).collect();
    let mut params = Vec::with_capacity(names.len());
    for name in names {
        let grad = analytic
            .get(&name)
            .expect("backward covers every parameter")
            .clone();
        let mut worst = ParamCheck {
            name: name.clone(),
            max_rel_error: 0.0,
            worst_index: 0,
            analytic: grad.data()[0],
            numeric: grad.data()[0],
        };
        for idx in 0..grad.len() {
            let original = graph.params().get(&name).unwrap().data()[idx];
            graph.params_mut().get_mut(&name).unwrap().data_mut()[idx] = original + epsilon;
            let plus = eval(graph)?;
            graph.params_mut().get_mut(&name).unwrap().data_mut()[idx] = original - epsilon;
            let minus = eval(graph)?;
            graph.params_mut().get_mut(&name).unwrap().data_mut()[idx] = original;

            let numeric = (plus - minus) / (2.0 * epsilon);
            let a = grad.data()[idx];
            let rel = (a - numeric).abs() / a.abs().max(epsilon);
            if rel > worst.max_rel_error || idx == 0 {
                worst = ParamCheck {
                    name: name.clone(),
                    max_rel_error: rel,
                    worst_index: idx,
                    analytic: a,
                    numeric,
                };
            }
        }
        params.push(worst);
    }
    graph.forward(inputs)?;
    Ok(GradCheckReport {
        epsilon,
        rtol,
        params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numgrad::ParamStore;

    #[test]
    fn quadratic_scalar() {
        // L = theta^2 via dot(theta, theta) on a 1x1 matrix
        let mut p = ParamStore::new();
        p.insert("theta", DenseArray::new(vec![1, 1], vec![3.0]).unwrap());
        let mut g = Graph::with_params(p);
        let t = g.param("theta").unwrap();
        let sq = g.row_dot(t, t);
        g.name(sq, "loss");
        let inputs = BTreeMap::new();
        let report = grad_check(&mut g, &inputs, "loss", 1e-5, 1e-8).unwrap();
        let check = &report.params[0];
        assert_eq!(check.analytic, 6.0);
        assert!((check.numeric - 6.0).abs() < 1e-8);
        assert!(report.passed());
        // parameters restored
        assert_eq!(g.params().get("theta").unwrap().data(), &[3.0]);
    }

    #[test]
    fn rejects_non_positive_epsilon() {
        let mut g = Graph::new();
        let x = g.input("x", &[]);
        g.name(x, "loss");
        let inputs: BTreeMap<_, _> = [("x".to_string(), DenseArray::scalar(1.0))].into();
        assert!(grad_check(&mut g, &inputs, "loss", 0.0, 1e-4).is_err());
    }
}

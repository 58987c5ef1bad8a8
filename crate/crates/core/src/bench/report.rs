use std::path::Path;

use super::{apcer_at_bpcer, bpcer_at_apcer, det_curve, io_err, BenchError, DetCurve, ScoreSet};

/// Operating points reported per protocol.
pub const DELTAS: [f64; 2] = [0.1, 0.01];

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolResult {
    pub run: String,
    pub protocol: String,
    /// APCER at BPCER = each of [`DELTAS`].
    pub apcer_at_bpcer: [f64; 2],
    /// BPCER at APCER = each of [`DELTAS`].
    pub bpcer_at_apcer: [f64; 2],
    pub errors: usize,
    pub curve: DetCurve,
}

pub fn evaluate(
    run: &str,
    protocol: &str,
    scores: &ScoreSet,
) -> Result<ProtocolResult, BenchError> {
    let curve = det_curve(scores)?;
    Ok(ProtocolResult {
        run: run.to_string(),
        protocol: protocol.to_string(),
        apcer_at_bpcer: [
            apcer_at_bpcer(&curve, DELTAS[0])?,
            apcer_at_bpcer(&curve, DELTAS[1])?,
        ],
        bpcer_at_apcer: [
            bpcer_at_apcer(&curve, DELTAS[0])?,
            bpcer_at_apcer(&curve, DELTAS[1])?,
        ],
        errors: scores.error_count(),
        curve,
    })
}

/// One row per result.
pub fn report_table(results: &[ProtocolResult]) -> String {
    let mut out = String::from(
        "run,protocol,apcer@bpcer=0.1,apcer@bpcer=0.01,bpcer@apcer=0.1,bpcer@apcer=0.01,errors\n",
    );
    for r in results {
        out.push_str(&format!(
            "{},{},{:.6},{:.6},{:.6},{:.6},{}\n",
            r.run,
            r.protocol,
            r.apcer_at_bpcer[0],
            r.apcer_at_bpcer[1],
            r.bpcer_at_apcer[0],
            r.bpcer_at_apcer[1],
            r.errors
        ));
    }
    out
}

pub fn save_report(path: &Path, results: &[ProtocolResult]) -> Result<(), BenchError> {
    std::fs::write(path, report_table(results)).map_err(|e| io_err(path, e))
}

/// `threshold,apcer,bpcer` rows for external plotting.
pub fn save_det(path: &Path, curve: &DetCurve) -> Result<(), BenchError> {
    let mut out = String::from("threshold,apcer,bpcer\n");
    for p in &curve.points {
        out.push_str(&format!("{:?},{:?},{:?}\n", p.threshold, p.apcer, p.bpcer));
    }
    std::fs::write(path, out).map_err(|e| io_err(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_protocol_one_row() {
        let scores = ScoreSet::from_scores(&[0.1, 0.3], &[0.2, 0.9]);
        let r = evaluate("run0", "synthetic", &scores).unwrap();
        let table = report_table(std::slice::from_ref(&r));
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[1].split(',').count(), 7);
        assert_eq!(table, report_table(&[r]));
    }
}

//! Text formats for quality scores, manual labels and filter outputs.
//!
//! Scores: `image_path,scorer_id,value`. Labels: `image_path,accept|reject`.
//! Both have a header line.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use super::{AcceptanceLabel, ErrorCurve, QualityError, QualityVector, Threshold};

fn parse_err(path: &str, line: usize, detail: impl Into<String>) -> QualityError {
    QualityError::Parse {
        path: path.to_string(),
        line,
        detail: detail.into(),
    }
}

fn csv_err(path: &str, e: csv::Error) -> QualityError {
    let line = e.position().map_or(0, |p| p.line() as usize);
    parse_err(path, line, e.to_string())
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> QualityError {
    QualityError::Io {
        path: path.display().to_string(),
        detail: e.to_string(),
    }
}

/// Score rows grouped per image, in order of first appearance.
pub fn read_scores<R: Read>(
    r: R,
    origin: &str,
) -> Result<Vec<(String, QualityVector)>, QualityError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(r);
    let mut order: Vec<String> = Vec::new();
    let mut map: BTreeMap<String, QualityVector> = BTreeMap::new();
    for row in reader.records() {
        let row = row.map_err(|e| csv_err(origin, e))?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        if row.len() != 3 {
            return Err(parse_err(
                origin,
                line,
                format!("expected 3 fields, got {}", row.len()),
            ));
        }
        let value: f64 = row[2]
            .parse()
            .map_err(|_| parse_err(origin, line, format!("bad score '{}'", &row[2])))?;
        if !value.is_finite() {
            return Err(parse_err(
                origin,
                line,
                format!("score {value} is not finite"),
            ));
        }
        let image = row[0].to_string();
        let entry = map.entry(image.clone()).or_insert_with(|| {
            order.push(image.clone());
            QualityVector::new()
        });
        if entry.insert(row[1].to_string(), value).is_some() {
            return Err(parse_err(
                origin,
                line,
                format!("duplicate score for '{}' / '{}'", &row[0], &row[1]),
            ));
        }
    }
    Ok(order
        .into_iter()
        .map(|k| {
            let v = map.remove(&k).unwrap_or_default();
            (k, v)
        })
        .collect())
}

pub fn write_scores<W: Write>(
    w: W,
    scores: &[(String, QualityVector)],
) -> Result<(), QualityError> {
    let mut writer = csv::Writer::from_writer(w);
    let wrap = |e: csv::Error| parse_err("<output>", 0, e.to_string());
    writer
        .write_record(["image_path", "scorer_id", "value"])
        .map_err(wrap)?;
    for (image, q) in scores {
        for (scorer, v) in q {
            writer
                .write_record([image.as_str(), scorer.as_str(), &v.to_string()])
                .map_err(wrap)?;
        }
    }
    writer
        .flush()
        .map_err(|e| parse_err("<output>", 0, e.to_string()))
}

pub fn read_labels<R: Read>(r: R, origin: &str) -> Result<Vec<AcceptanceLabel>, QualityError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(r);
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| csv_err(origin, e))?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        if row.len() != 2 {
            return Err(parse_err(
                origin,
                line,
                format!("expected 2 fields, got {}", row.len()),
            ));
        }
        let decision = row[1]
            .parse()
            .map_err(|e: String| parse_err(origin, line, e))?;
        out.push(AcceptanceLabel {
            image: row[0].to_string(),
            decision,
        });
    }
    Ok(out)
}

pub fn load_scores(path: &Path) -> Result<Vec<(String, QualityVector)>, QualityError> {
    let f = std::fs::File::open(path).map_err(|e| io_err(path, e))?;
    read_scores(f, &path.display().to_string())
}

pub fn save_scores(path: &Path, scores: &[(String, QualityVector)]) -> Result<(), QualityError> {
    let f = std::fs::File::create(path).map_err(|e| io_err(path, e))?;
    write_scores(f, scores)
}

pub fn load_labels(path: &Path) -> Result<Vec<AcceptanceLabel>, QualityError> {
    let f = std::fs::File::open(path).map_err(|e| io_err(path, e))?;
    read_labels(f, &path.display().to_string())
}

/// `scorer,direction,threshold,eer`, one row per scorer.
pub fn save_report(path: &Path, rows: &[(Threshold, f64)]) -> Result<(), QualityError> {
    let mut text = String::from("scorer,direction,threshold,eer\n");
    for (t, eer) in rows {
        text.push_str(&format!(
            "{},{},{},{}\n",
            t.scorer, t.direction, t.value, eer
        ));
    }
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

/// Reads thresholds back from a report written by [`save_report`].
pub fn load_report(path: &Path) -> Result<Vec<(Threshold, f64)>, QualityError> {
    let origin = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 4 {
            return Err(parse_err(
                &origin,
                i + 1,
                "expected scorer,direction,threshold,eer",
            ));
        }
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| parse_err(&origin, i + 1, format!("bad number '{s}'")))
        };
        out.push((
            Threshold {
                scorer: f[0].to_string(),
                direction: f[1]
                    .parse()
                    .map_err(|e: String| parse_err(&origin, i + 1, e))?,
                value: num(f[2])?,
            },
            num(f[3])?,
        ));
    }
    Ok(out)
}

/// `threshold,far,frr` rows.
pub fn save_curve(path: &Path, curve: &ErrorCurve) -> Result<(), QualityError> {
    let mut text = String::from("threshold,far,frr\n");
    for p in &curve.points {
        text.push_str(&format!("{},{},{}\n", p.threshold, p.far, p.frr));
    }
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

/// One image path per line.
pub fn save_list(path: &Path, images: &[String]) -> Result<(), QualityError> {
    let mut text = images.join("\n");
    if !text.is_empty() {
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quality::{Decision, Direction};

    #[test]
    fn scores_group_by_image() {
        let text =
            "image_path,scorer_id,value\nb.png,blur,3.5\na.png,blur,1\nb.png,illumination,0.4\n";
        let s = read_scores(text.as_bytes(), "t").unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].0, "b.png");
        assert_eq!(s[0].1["illumination"], 0.4);
        let mut buf = Vec::new();
        write_scores(&mut buf, &s).unwrap();
        assert_eq!(read_scores(buf.as_slice(), "t").unwrap(), s);
    }

    #[test]
    fn bad_rows_name_the_line() {
        let err = read_scores(
            "image_path,scorer_id,value\na,blur,1\na,blur,x\n".as_bytes(),
            "s.csv",
        )
        .unwrap_err();
        assert!(err.to_string().starts_with("s.csv:3:"), "{err}");
        let err = read_labels("image_path,decision\na,maybe\n".as_bytes(), "l.csv").unwrap_err();
        assert!(err.to_string().starts_with("l.csv:2:"), "{err}");
    }

    #[test]
    fn labels_parse() {
        let l = read_labels("image_path,decision\na,accept\nb,reject\n".as_bytes(), "l").unwrap();
        assert_eq!(l[1].decision, Decision::Reject);
    }

    #[test]
    fn report_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        let rows = vec![(
            Threshold {
                scorer: "blur".into(),
                direction: Direction::LowerIsBetter,
                value: 0.125,
            },
            0.25,
        )];
        save_report(&p, &rows).unwrap();
        assert_eq!(load_report(&p).unwrap(), rows);
    }
}

//! Delimited-text manifests for sample records and planned pairs.
//!
//! Records: `kind,image_path,y1,y2,source_ids` (ids joined by `+`).
//! Pairs: `kind,name,image_a,landmarks_a,id_a,image_b,landmarks_b,id_b,y1,y2`.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{HarvestError, ImageRef, PlannedPair, SampleKind, SampleRecord};

#[derive(Debug, Serialize, Deserialize)]
struct RecordRow {
    kind: String,
    image_path: String,
    y1: usize,
    y2: usize,
    source_ids: String,
}

/// A planned pair with the labels its output will carry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairRow {
    pub kind: String,
    pub name: String,
    pub image_a: PathBuf,
    pub landmarks_a: PathBuf,
    pub id_a: String,
    pub image_b: PathBuf,
    pub landmarks_b: PathBuf,
    pub id_b: String,
    pub y1: usize,
    pub y2: usize,
}

impl PairRow {
    pub fn new(kind: SampleKind, pair: &PlannedPair, y1: usize, y2: usize) -> Self {
        Self {
            kind: kind.as_str().to_string(),
            name: pair.name.clone(),
            image_a: pair.first.image.clone(),
            landmarks_a: pair.first.landmarks.clone(),
            id_a: pair.first.identity.clone(),
            image_b: pair.second.image.clone(),
            landmarks_b: pair.second.landmarks.clone(),
            id_b: pair.second.identity.clone(),
            y1,
            y2,
        }
    }

    pub fn sample_kind(&self) -> Result<SampleKind, String> {
        self.kind.parse()
    }

    pub fn first(&self) -> ImageRef {
        ImageRef {
            identity: self.id_a.clone(),
            image: self.image_a.clone(),
            landmarks: self.landmarks_a.clone(),
        }
    }

    pub fn second(&self) -> ImageRef {
        ImageRef {
            identity: self.id_b.clone(),
            image: self.image_b.clone(),
            landmarks: self.landmarks_b.clone(),
        }
    }
}

fn csv_error(path: &str, e: csv::Error) -> HarvestError {
    let line = e.position().map_or(0, |p| p.line() as usize);
    HarvestError::Manifest {
        path: path.to_string(),
        line,
        detail: e.to_string(),
    }
}

pub fn write_records<W: Write>(w: W, records: &[SampleRecord]) -> Result<(), HarvestError> {
    let mut out = csv::Writer::from_writer(w);
    for r in records {
        out.serialize(RecordRow {
            kind: r.kind.as_str().to_string(),
            image_path: r.image_path.to_string_lossy().into_owned(),
            y1: r.y1,
            y2: r.y2,
            source_ids: r.source_ids.join("+"),
        })
        .map_err(|e| csv_error("<records>", e))?;
    }
    out.flush().map_err(|e| HarvestError::Io {
        path: "<records>".into(),
        detail: e.to_string(),
    })
}

/// Parses a record manifest, validating each row's label invariants.
/// `origin` names the source in errors.
pub fn read_records<R: Read>(r: R, origin: &str) -> Result<Vec<SampleRecord>, HarvestError> {
    let mut reader = csv::Reader::from_reader(r);
    let mut out = Vec::new();
    for (i, row) in reader.deserialize::<RecordRow>().enumerate() {
        let line = i + 2;
        let bad = |detail: String| HarvestError::Manifest {
            path: origin.to_string(),
            line,
            detail,
        };
        let row = row.map_err(|e| bad(e.to_string()))?;
        let kind: SampleKind = row.kind.parse().map_err(bad)?;
        let source_ids: Vec<String> = row.source_ids.split('+').map(str::to_string).collect();
        let consistent = match kind {
            SampleKind::Morph => row.y1 != row.y2 && source_ids.len() == 2,
            _ => row.y1 == row.y2 && source_ids.len() == 1,
        };
        if !consistent {
            return Err(bad(format!(
                "{kind} with labels ({}, {}) and sources '{}' violates the label invariant",
                row.y1, row.y2, row.source_ids
            )));
        }
        out.push(SampleRecord {
            kind,
            image_path: PathBuf::from(row.image_path),
            y1: row.y1,
            y2: row.y2,
            source_ids,
        });
    }
    Ok(out)
}

pub fn write_pairs<W: Write>(w: W, rows: &[PairRow]) -> Result<(), HarvestError> {
    let mut out = csv::Writer::from_writer(w);
    for row in rows {
        out.serialize(row).map_err(|e| csv_error("<pairs>", e))?;
    }
    out.flush().map_err(|e| HarvestError::Io {
        path: "<pairs>".into(),
        detail: e.to_string(),
    })
}

pub fn read_pairs<R: Read>(r: R, origin: &str) -> Result<Vec<PairRow>, HarvestError> {
    let mut reader = csv::Reader::from_reader(r);
    let mut out = Vec::new();
    for (i, row) in reader.deserialize::<PairRow>().enumerate() {
        let line = i + 2;
        let bad = |detail: String| HarvestError::Manifest {
            path: origin.to_string(),
            line,
            detail,
        };
        let row = row.map_err(|e| bad(e.to_string()))?;
        match row.sample_kind().map_err(bad)? {
            SampleKind::BonaFide => return Err(bad("bona_fide rows are not pairs".into())),
            SampleKind::Selfmorph if row.id_a != row.id_b || row.y1 != row.y2 => {
                return Err(bad("selfmorph must use one identity and one label".into()))
            }
            SampleKind::Morph if row.y1 == row.y2 => {
                return Err(bad("morph must carry two different labels".into()))
            }
            _ => {}
        }
        out.push(row);
    }
    Ok(out)
}

fn open(path: &Path) -> Result<std::fs::File, HarvestError> {
    std::fs::File::open(path).map_err(|e| HarvestError::Io {
        path: path.display().to_string(),
        detail: e.to_string(),
    })
}

fn create(path: &Path) -> Result<std::fs::File, HarvestError> {
    std::fs::File::create(path).map_err(|e| HarvestError::Io {
        path: path.display().to_string(),
        detail: e.to_string(),
    })
}

pub fn load_records(path: &Path) -> Result<Vec<SampleRecord>, HarvestError> {
    read_records(open(path)?, &path.display().to_string())
}

pub fn save_records(path: &Path, records: &[SampleRecord]) -> Result<(), HarvestError> {
    write_records(create(path)?, records)
}

pub fn load_pairs(path: &Path) -> Result<Vec<PairRow>, HarvestError> {
    read_pairs(open(path)?, &path.display().to_string())
}

pub fn save_pairs(path: &Path, rows: &[PairRow]) -> Result<(), HarvestError> {
    write_pairs(create(path)?, rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn records_round_trip() {
        let recs = vec![
            SampleRecord {
                kind: SampleKind::Morph,
                image_path: "gen/morph_000000.png".into(),
                y1: 0,
                y2: 3,
                source_ids: vec!["a".into(), "d".into()],
            },
            SampleRecord {
                kind: SampleKind::Selfmorph,
                image_path: "gen/with,comma.png".into(),
                y1: 2,
                y2: 2,
                source_ids: vec!["c".into()],
            },
        ];
        let mut buf = Vec::new();
        write_records(&mut buf, &recs).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("kind,image_path,y1,y2,source_ids\n"));
        assert_eq!(read_records(&buf[..], "mem").unwrap(), recs);
    }

    #[test]
    fn malformed_record_names_its_line() {
        let text = "kind,image_path,y1,y2,source_ids\nmorph,a.png,0,1,a+b\nmorph,b.png,1,1,a+b\n";
        let err = read_records(text.as_bytes(), "m.csv").unwrap_err();
        assert!(err.to_string().starts_with("m.csv:3:"), "{err}");
        let text = "kind,image_path,y1,y2,source_ids\nblend,a.png,0,1,a+b\n";
        let err = read_records(text.as_bytes(), "m.csv").unwrap_err();
        assert!(err.to_string().starts_with("m.csv:2:"), "{err}");
    }

    #[test]
    fn selfmorph_pair_rows_need_one_identity() {
        let text = "kind,name,image_a,landmarks_a,id_a,image_b,landmarks_b,id_b,y1,y2\n\
                    selfmorph,s0,a.png,a.lmk,x,b.png,b.lmk,y,0,0\n";
        assert!(read_pairs(text.as_bytes(), "p.csv").is_err());
    }
}

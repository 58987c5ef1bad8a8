use std::fmt;
use std::path::Path;
use std::str::FromStr;

use super::{io_err, BenchError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Truth {
    BonaFide,
    Morph,
}

impl Truth {
    pub fn as_str(self) -> &'static str {
        match self {
            Truth::BonaFide => "bona_fide",
            Truth::Morph => "morph",
        }
    }
}

impl fmt::Display for Truth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Truth {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bona_fide" => Ok(Truth::BonaFide),
            "morph" => Ok(Truth::Morph),
            other => Err(format!("truth must be bona_fide or morph, got '{other}'")),
        }
    }
}

/// One scored item; `score` is `None` when the item could not be scored.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRow {
    pub path: String,
    pub truth: Truth,
    pub score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScoreSet {
    pub rows: Vec<ScoreRow>,
}

impl ScoreSet {
    /// Anonymous rows from two score lists.
    pub fn from_scores(bona_fide: &[f64], morph: &[f64]) -> Self {
        let rows = bona_fide
            .iter()
            .map(|&s| (Truth::BonaFide, s))
            .chain(morph.iter().map(|&s| (Truth::Morph, s)))
            .enumerate()
            .map(|(i, (truth, s))| ScoreRow {
                path: format!("#{i}"),
                truth,
                score: Some(s),
            })
            .collect();
        Self { rows }
    }

    /// Scores of the given class, skipping error rows.
    pub fn scores(&self, truth: Truth) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.truth == truth)
            .filter_map(|r| r.score)
            .collect()
    }

    pub fn error_count(&self) -> usize {
        self.rows.iter().filter(|r| r.score.is_none()).count()
    }

    pub fn mean(&self, truth: Truth) -> Option<f64> {
        let s = self.scores(truth);
        (!s.is_empty()).then(|| s.iter().sum::<f64>() / s.len() as f64)
    }

    /// `path,truth,score` with `NA` for error rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("path,truth,score\n");
        for r in &self.rows {
            let score = r
                .score
                .map_or_else(|| "NA".to_string(), |s| format!("{s:?}"));
            out.push_str(&format!("{},{},{}\n", r.path, r.truth, score));
        }
        out
    }

    pub fn parse_csv(text: &str, origin: &str) -> Result<Self, BenchError> {
        let mut rows = Vec::new();
        let err = |line: usize, detail: String| BenchError::Parse {
            path: origin.to_string(),
            line,
            detail,
        };
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = line.trim();
            if line.is_empty() || (i == 0 && line.starts_with("path,")) {
                continue;
            }
            let fields: Vec<&str> = line.rsplitn(3, ',').collect();
            if fields.len() != 3 {
                return Err(err(line_no, "expected path,truth,score".into()));
            }
            let (score, truth, path) = (fields[0].trim(), fields[1].trim(), fields[2].trim());
            let truth = truth.parse().map_err(|e| err(line_no, e))?;
            let score = if score == "NA" {
                None
            } else {
                let v: f64 = score
                    .parse()
                    .map_err(|_| err(line_no, format!("bad score '{score}'")))?;
                if !v.is_finite() {
                    return Err(err(line_no, format!("score {v} is not finite")));
                }
                Some(v)
            };
            rows.push(ScoreRow {
                path: path.to_string(),
                truth,
                score,
            });
        }
        Ok(Self { rows })
    }

    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        Self::parse_csv(&text, &path.display().to_string())
    }

    pub fn save(&self, path: &Path) -> Result<(), BenchError> {
        std::fs::write(path, self.to_csv()).map_err(|e| io_err(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_keeps_error_rows() {
        let mut set = ScoreSet::from_scores(&[0.1, 0.25], &[0.9]);
        set.rows.push(ScoreRow {
            path: "dir/missing, file.png".into(),
            truth: Truth::Morph,
            score: None,
        });
        let back = ScoreSet::parse_csv(&set.to_csv(), "s").unwrap();
        assert_eq!(back, set);
        assert_eq!(back.error_count(), 1);
        assert_eq!(back.scores(Truth::Morph), vec![0.9]);
    }

    #[test]
    fn bad_rows_name_the_line() {
        let err = ScoreSet::parse_csv("path,truth,score\na,morph,0.5\nb,fake,0.1\n", "x.csv")
            .unwrap_err();
        assert!(err.to_string().starts_with("x.csv:3:"), "{err}");
        assert!(ScoreSet::parse_csv("a,morph,inf\n", "x").is_err());
    }
}

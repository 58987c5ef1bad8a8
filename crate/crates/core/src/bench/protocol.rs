use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::{io_err, BenchError, ScoreRow, ScoreSet, Truth};
use crate::model::DualModel;
use crate::morph::Image;

/// Lists of bona fide and morph images, with optional live captures.
///
/// Text form, one entry per line, `#` comments allowed:
///
/// ```text
/// name: synthetic
/// bona_fide:
///   faces/a.png
/// morph:
///   morphs/m.png
/// pairs:
///   faces/a.png live/a.png
/// ```
///
/// Relative paths are resolved against the manifest's directory.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolManifest {
    pub name: String,
    pub bona_fide: Vec<PathBuf>,
    pub morph: Vec<PathBuf>,
    /// Live capture for an enrolled image (differential mode).
    pub pairs: BTreeMap<PathBuf, PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScoreMode {
    #[default]
    Single,
    Differential,
}

impl std::str::FromStr for ScoreMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "single" => Ok(ScoreMode::Single),
            "differential" => Ok(ScoreMode::Differential),
            other => Err(format!(
                "mode must be single or differential, got '{other}'"
            )),
        }
    }
}

impl ProtocolManifest {
    pub fn new(
        name: &str,
        bona_fide: Vec<PathBuf>,
        morph: Vec<PathBuf>,
        pairs: BTreeMap<PathBuf, PathBuf>,
    ) -> Result<Self, BenchError> {
        let invalid = |detail: String| BenchError::Protocol {
            name: name.to_string(),
            detail,
        };
        if bona_fide.is_empty() || morph.is_empty() {
            return Err(invalid(
                "both bona_fide and morph lists must be non-empty".into(),
            ));
        }
        let bona: BTreeSet<&PathBuf> = bona_fide.iter().collect();
        if let Some(p) = morph.iter().find(|p| bona.contains(p)) {
            return Err(invalid(format!(
                "{} is listed as both bona fide and morph",
                p.display()
            )));
        }
        Ok(Self {
            name: name.to_string(),
            bona_fide,
            morph,
            pairs,
        })
    }

    pub fn parse(text: &str, origin: &str, base: &Path) -> Result<Self, BenchError> {
        let err = |line: usize, detail: String| BenchError::Parse {
            path: origin.to_string(),
            line,
            detail,
        };
        let resolve = |p: &str| {
            let p = Path::new(p);
            if p.is_absolute() {
                p.to_path_buf()
            } else {
                base.join(p)
            }
        };
        #[derive(PartialEq)]
        enum Section {
            None,
            Bona,
            Morph,
            Pairs,
        }
        let mut name = None;
        let mut section = Section::None;
        let (mut bona, mut morph, mut pairs) = (Vec::new(), Vec::new(), BTreeMap::new());
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("name:") {
                name = Some(rest.trim().to_string());
                continue;
            }
            match line {
                "bona_fide:" => section = Section::Bona,
                "morph:" => section = Section::Morph,
                "pairs:" => section = Section::Pairs,
                item => {
                    let item = item.strip_prefix("- ").unwrap_or(item).trim();
                    match section {
                        Section::None => {
                            return Err(err(line_no, format!("entry '{item}' outside any section")))
                        }
                        Section::Bona => bona.push(resolve(item)),
                        Section::Morph => morph.push(resolve(item)),
                        Section::Pairs => {
                            let parts: Vec<&str> = item.split_whitespace().collect();
                            if parts.len() != 2 {
                                return Err(err(line_no, "pairs need 'enrolled live'".into()));
                            }
                            if pairs.insert(resolve(parts[0]), resolve(parts[1])).is_some() {
                                return Err(err(
                                    line_no,
                                    format!("duplicate pair for {}", parts[0]),
                                ));
                            }
                        }
                    }
                }
            }
        }
        let name = name.ok_or_else(|| err(0, "missing 'name:' line".into()))?;
        Self::new(&name, bona, morph, pairs)
    }

    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, &path.display().to_string(), base)
    }

    /// Text form with paths as given (not relativized).
    pub fn to_text(&self) -> String {
        let mut out = format!("name: {}\nbona_fide:\n", self.name);
        for p in &self.bona_fide {
            out.push_str(&format!("  {}\n", p.display()));
        }
        out.push_str("morph:\n");
        for p in &self.morph {
            out.push_str(&format!("  {}\n", p.display()));
        }
        if !self.pairs.is_empty() {
            out.push_str("pairs:\n");
            for (a, b) in &self.pairs {
                out.push_str(&format!("  {} {}\n", a.display(), b.display()));
            }
        }
        out
    }

    /// Every listed image with its ground truth, bona fide first.
    pub fn items(&self) -> impl Iterator<Item = (&PathBuf, Truth)> {
        self.bona_fide
            .iter()
            .map(|p| (p, Truth::BonaFide))
            .chain(self.morph.iter().map(|p| (p, Truth::Morph)))
    }
}

/// Scores every listed image in manifest order.
///
/// Unreadable or unscorable items become error rows (no score) and are
/// logged. Differential mode requires a live capture for every item.
pub fn score_protocol(
    model: &DualModel,
    manifest: &ProtocolManifest,
    mode: ScoreMode,
) -> Result<ScoreSet, BenchError> {
    if mode == ScoreMode::Differential {
        if let Some((p, _)) = manifest
            .items()
            .find(|(p, _)| !manifest.pairs.contains_key(*p))
        {
            return Err(BenchError::Protocol {
                name: manifest.name.clone(),
                detail: format!("no live capture for {} in differential mode", p.display()),
            });
        }
    }
    let items: Vec<(&PathBuf, Truth)> = manifest.items().collect();
    let rows = items
        .par_iter()
        .map(|&(path, truth)| {
            let result = Image::load(path)
                .map_err(|e| e.to_string())
                .and_then(|img| {
                    match mode {
                        ScoreMode::Single => model.morph_score(&img),
                        ScoreMode::Differential => Image::load(&manifest.pairs[path])
                            .map_err(Into::into)
                            .and_then(|live| model.differential_score(&img, &live)),
                    }
                    .map_err(|e| e.to_string())
                });
            let score = match result {
                Ok(s) => Some(s),
                Err(e) => {
                    log::warn!("{}: {e}", path.display());
                    None
                }
            };
            ScoreRow {
                path: path.display().to_string(),
                truth,
                score,
            }
        })
        .collect();
    Ok(ScoreSet { rows })
}

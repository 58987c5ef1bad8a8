use std::fmt::Write as _;
use std::path::Path;

use super::MorphError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// `K >= 3` facial landmarks in pixel coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkSet {
    points: Vec<Point>,
}

impl LandmarkSet {
    pub fn new(points: Vec<Point>) -> Result<Self, MorphError> {
        if points.len() < 3 {
            return Err(MorphError::InvalidLandmarks(format!(
                "need at least 3 landmarks, got {}",
                points.len()
            )));
        }
        if let Some(p) = points.iter().find(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(MorphError::InvalidLandmarks(format!(
                "non-finite point {p:?}"
            )));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Checks every point lies in `[0, width - 1] x [0, height - 1]`.
    pub fn check_bounds(&self, width: usize, height: usize) -> Result<(), MorphError> {
        let (w, h) = ((width - 1) as f64, (height - 1) as f64);
        match self
            .points
            .iter()
            .position(|p| p.x < 0.0 || p.y < 0.0 || p.x > w || p.y > h)
        {
            Some(i) => Err(MorphError::InvalidLandmarks(format!(
                "landmark {i} {:?} outside {width}x{height} image",
                self.points[i]
            ))),
            None => Ok(()),
        }
    }

    /// Text form: first line `K`, then `K` lines of `x y`.
    pub fn parse(text: &str) -> Result<Self, MorphError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (_, header) = lines
            .next()
            .ok_or_else(|| MorphError::InvalidLandmarks("empty landmark file".into()))?;
        let count: usize = header.parse().map_err(|_| {
            MorphError::InvalidLandmarks(format!("line 1: expected point count, got '{header}'"))
        })?;
        let mut points = Vec::with_capacity(count);
        for (lineno, line) in lines {
            let mut it = line.split_whitespace();
            let parse = |v: Option<&str>| -> Result<f64, MorphError> {
                v.and_then(|s| s.parse().ok()).ok_or_else(|| {
                    MorphError::InvalidLandmarks(format!(
                        "line {lineno}: expected 'x y', got '{line}'"
                    ))
                })
            };
            let x = parse(it.next())?;
            let y = parse(it.next())?;
            if it.next().is_some() {
                return Err(MorphError::InvalidLandmarks(format!(
                    "line {lineno}: trailing values in '{line}'"
                )));
            }
            points.push(Point::new(x, y));
        }
        if points.len() != count {
            return Err(MorphError::InvalidLandmarks(format!(
                "header declares {count} points, found {}",
                points.len()
            )));
        }
        Self::new(points)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.points.len());
        for p in &self.points {
            // `{}` on f64 prints the shortest representation that round-trips
            let _ = writeln!(s, "{} {}", p.x, p.y);
        }
        s
    }

    pub fn load(path: &Path) -> Result<Self, MorphError> {
        let text = std::fs::read_to_string(path).map_err(|e| MorphError::Io {
            path: path.display().to_string(),
            detail: e.to_string(),
        })?;
        Self::parse(&text).map_err(|e| match e {
            MorphError::InvalidLandmarks(msg) => {
                MorphError::InvalidLandmarks(format!("{}: {msg}", path.display()))
            }
            other => other,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), MorphError> {
        std::fs::write(path, self.to_text()).map_err(|e| MorphError::Io {
            path: path.display().to_string(),
            detail: e.to_string(),
        })
    }
}

/// Per-point blend `(1 - alpha) a_i + alpha b_i`.
pub fn average_landmarks(
    a: &LandmarkSet,
    b: &LandmarkSet,
    alpha: f64,
) -> Result<LandmarkSet, MorphError> {
    if a.len() != b.len() {
        return Err(MorphError::LandmarkCount {
            left: a.len(),
            right: b.len(),
        });
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(MorphError::InvalidAlpha(alpha));
    }
    let points = a
        .points
        .iter()
        .zip(&b.points)
        .map(|(p, q)| {
            Point::new(
                (1.0 - alpha) * p.x + alpha * q.x,
                (1.0 - alpha) * p.y + alpha * q.y,
            )
        })
        .collect();
    Ok(LandmarkSet { points })
}

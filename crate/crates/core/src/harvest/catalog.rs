use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use super::HarvestError;

pub const LANDMARK_EXTENSION: &str = "lmk";
const IMAGE_EXTENSIONS: [&str; 4] = ["png", "pgm", "ppm", "pnm"];

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct CatalogImage {
    pub image: PathBuf,
    pub landmarks: PathBuf,
}

impl CatalogImage {
    /// Image with its sibling `.lmk` landmark file.
    pub fn with_sibling_landmarks(image: PathBuf) -> Self {
        let landmarks = image.with_extension(LANDMARK_EXTENSION);
        Self { image, landmarks }
    }
}

/// Identities and their images, ordered by identity id.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityCatalog {
    identities: BTreeMap<String, Vec<CatalogImage>>,
}

impl IdentityCatalog {
    pub fn new(entries: Vec<(String, Vec<CatalogImage>)>) -> Result<Self, HarvestError> {
        let mut identities = BTreeMap::new();
        for (id, images) in entries {
            if id.is_empty() || id.contains('+') || id.contains(',') {
                return Err(HarvestError::Catalog(format!(
                    "identity id '{id}' must be non-empty and free of '+' and ','"
                )));
            }
            if images.is_empty() {
                return Err(HarvestError::Catalog(format!(
                    "identity '{id}' has no images"
                )));
            }
            if identities.insert(id.clone(), images).is_some() {
                return Err(HarvestError::Catalog(format!("duplicate identity '{id}'")));
            }
        }
        Ok(Self { identities })
    }

    /// Reads `<root>/<identity>/<image>` with a sibling `.lmk` for each image.
    pub fn scan(root: &Path) -> Result<Self, HarvestError> {
        let io_err = |p: &Path, e: std::io::Error| HarvestError::Io {
            path: p.display().to_string(),
            detail: e.to_string(),
        };
        let mut dirs: Vec<PathBuf> = std::fs::read_dir(root)
            .map_err(|e| io_err(root, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_dir())
            .collect();
        dirs.sort();
        let mut entries = Vec::new();
        for dir in dirs {
            let id = dir
                .file_name()
                .and_then(|n| n.to_str())
                .ok_or_else(|| HarvestError::Catalog(format!("bad directory name {dir:?}")))?
                .to_string();
            let mut images: BTreeSet<PathBuf> = BTreeSet::new();
            for entry in std::fs::read_dir(&dir).map_err(|e| io_err(&dir, e))? {
                let path = entry.map_err(|e| io_err(&dir, e))?.path();
                let is_image = path
                    .extension()
                    .and_then(|e| e.to_str())
                    .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()));
                if is_image {
                    images.insert(path);
                }
            }
            if images.is_empty() {
                log::warn!(
                    "identity directory {} has no images; skipped",
                    dir.display()
                );
                continue;
            }
            let mut list = Vec::with_capacity(images.len());
            for image in images {
                let item = CatalogImage::with_sibling_landmarks(image);
                if !item.landmarks.is_file() {
                    return Err(HarvestError::Catalog(format!(
                        "missing landmark file {}",
                        item.landmarks.display()
                    )));
                }
                list.push(item);
            }
            entries.push((id, list));
        }
        Self::new(entries)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.identities.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.identities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.identities.is_empty()
    }

    pub fn images(&self, id: &str) -> Option<&[CatalogImage]> {
        self.identities.get(id).map(Vec::as_slice)
    }

    pub fn image_count(&self) -> usize {
        self.identities.values().map(Vec::len).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[CatalogImage])> {
        self.identities
            .iter()
            .map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    /// One class index per identity, shared by both heads (sorted id order).
    pub fn class_index(&self) -> BTreeMap<String, usize> {
        self.identities
            .keys()
            .enumerate()
            .map(|(i, id)| (id.clone(), i))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_empty_identities() {
        let img = CatalogImage::with_sibling_landmarks("a/x.png".into());
        assert!(IdentityCatalog::new(vec![
            ("a".into(), vec![img.clone()]),
            ("a".into(), vec![img.clone()])
        ])
        .is_err());
        assert!(IdentityCatalog::new(vec![("a".into(), vec![])]).is_err());
        assert!(IdentityCatalog::new(vec![("a+b".into(), vec![img])]).is_err());
    }

    #[test]
    fn scan_requires_landmarks() {
        let dir = tempfile::tempdir().unwrap();
        let id = dir.path().join("alice");
        std::fs::create_dir(&id).unwrap();
        std::fs::write(id.join("1.png"), b"").unwrap();
        assert!(IdentityCatalog::scan(dir.path()).is_err());
        std::fs::write(id.join("1.lmk"), b"3\n0 0\n1 0\n0 1\n").unwrap();
        let cat = IdentityCatalog::scan(dir.path()).unwrap();
        assert_eq!(cat.len(), 1);
        assert_eq!(cat.images("alice").unwrap().len(), 1);
    }

    #[test]
    fn class_index_follows_sorted_ids() {
        let img = CatalogImage::with_sibling_landmarks("x.png".into());
        let cat = IdentityCatalog::new(vec![
            ("zed".into(), vec![img.clone()]),
            ("amy".into(), vec![img]),
        ])
        .unwrap();
        let idx = cat.class_index();
        assert_eq!(idx["amy"], 0);
        assert_eq!(idx["zed"], 1);
    }
}

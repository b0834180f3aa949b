//! In-memory image collections with precomputed luminance integral tables.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::{load_png, Image};
use crate::stats::{build_integral, IntegralTable};

/// One image of a corpus, addressed by its corpus-relative id (the file name
/// for directory-backed corpora).
#[derive(Debug)]
pub struct CorpusEntry {
    pub id: String,
    pub image: Image,
    pub table: IntegralTable,
}

impl CorpusEntry {
    pub fn new(id: impl Into<String>, image: Image) -> Result<Self> {
        let table = build_integral(&image.to_luminance())?;
        Ok(CorpusEntry { id: id.into(), image, table })
    }

    pub fn width(&self) -> usize {
        self.image.width()
    }

    pub fn height(&self) -> usize {
        self.image.height()
    }
}

/// Read-only image collection shared by samplers.
#[derive(Debug, Default)]
pub struct Corpus {
    entries: Vec<CorpusEntry>,
    index: HashMap<String, usize>,
}

impl Corpus {
    pub fn from_entries(entries: Vec<CorpusEntry>) -> Result<Self> {
        let mut index = HashMap::with_capacity(entries.len());
        for (i, e) in entries.iter().enumerate() {
            if index.insert(e.id.clone(), i).is_some() {
                return Err(Error::Config(format!("duplicate image id {}", e.id)));
            }
        }
        Ok(Corpus { entries, index })
    }

    pub fn from_images(images: impl IntoIterator<Item = (String, Image)>) -> Result<Self> {
        let entries = images
            .into_iter()
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|(id, img)| CorpusEntry::new(id, img))
            .collect::<Result<Vec<_>>>()?;
        Corpus::from_entries(entries)
    }

    /// Loads every `*.png` directly inside `dir`, ordered by file name.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let files = list_pngs(dir)?;
        if files.is_empty() {
            return Err(Error::EmptyCorpus(format!("no PNG files in {}", dir.display())));
        }
        let entries = files
            .par_iter()
            .map(|p| {
                let id = p.file_name().unwrap().to_string_lossy().into_owned();
                CorpusEntry::new(id, load_png(p)?)
            })
            .collect::<Result<Vec<_>>>()?;
        Corpus::from_entries(entries)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[CorpusEntry] {
        &self.entries
    }

    pub fn entry(&self, i: usize) -> &CorpusEntry {
        &self.entries[i]
    }

    pub fn get(&self, id: &str) -> Option<&CorpusEntry> {
        self.index.get(id).map(|&i| &self.entries[i])
    }

    pub fn min_side(&self) -> usize {
        self.entries.iter().map(|e| e.width().min(e.height())).min().unwrap_or(0)
    }
}

/// Sorted list of `*.png` files (case-insensitive extension) in `dir`.
pub fn list_pngs(dir: &Path) -> Result<Vec<PathBuf>> {
    let rd = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    for entry in rd {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        let is_png = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("png"));
        if is_png && path.is_file() {
            files.push(path);
        }
    }
    files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    Ok(files)
}

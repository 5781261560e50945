//! Asset catalog: sound objects plus one embedding per entry, exact cosine
//! retrieval, and a versioned text file format.

mod embed;

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;

use crate::dsp::{AssetSource, AudioBuffer, RenderError};
use crate::metadata::{extract_metadata, MetadataError, SoundObject};
use crate::script::AssetIndex;
use crate::wav::read_wav;

pub use embed::{dot, normalize_text, Embedder, TrigramEmbedder, TRIGRAM_DIMENSION};

pub const DEFAULT_K: usize = 5;
const FILE_MAGIC: &str = "mixscript-catalog 1";

#[derive(Debug, thiserror::Error)]
pub enum CatalogError {
    #[error("cannot embed empty text")]
    EmptyText,
    #[error("k must be at least 1")]
    InvalidK,
    #[error("duplicate entry name '{0}'")]
    DuplicateName(String),
    #[error("catalog was built with embedder '{found}' but '{expected}' is in use")]
    EmbedderMismatch { found: String, expected: String },
    #[error("malformed catalog file: {0}")]
    Format(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> CatalogError + '_ {
    move |source| CatalogError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalHit {
    pub object: SoundObject,
    /// Cosine similarity in [-1, 1].
    pub score: f64,
}

/// Ranked query result; scores are non-increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalSet {
    pub query: String,
    pub hits: Vec<RetrievalHit>,
}

impl RetrievalSet {
    pub fn is_empty(&self) -> bool {
        self.hits.is_empty()
    }

    pub fn len(&self) -> usize {
        self.hits.len()
    }

    pub fn names(&self) -> Vec<&str> {
        self.hits.iter().map(|h| h.object.name.as_str()).collect()
    }
}

impl AssetIndex for RetrievalSet {
    fn contains_asset(&self, name: &str) -> bool {
        self.hits.iter().any(|h| h.object.name == name)
    }
}

/// A built catalog together with the files that were skipped.
#[derive(Debug)]
pub struct Ingested {
    pub catalog: Catalog,
    pub warnings: Vec<String>,
}

#[derive(Clone)]
pub struct Catalog {
    entries: Vec<SoundObject>,
    vectors: Vec<Vec<f32>>,
    embedder: Arc<dyn Embedder>,
    /// Directory used to resolve relative source paths that do not exist
    /// relative to the working directory.
    base_dir: Option<PathBuf>,
}

impl fmt::Debug for Catalog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Catalog")
            .field("embedder", &self.embedder.id())
            .field("entries", &self.entries.len())
            .finish()
    }
}

/// Heap key: greater means better ranked (higher score, then smaller name).
struct Candidate<'a> {
    score: f64,
    name: &'a str,
    index: usize,
}

impl Ord for Candidate<'_> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.score
            .total_cmp(&other.score)
            .then_with(|| other.name.cmp(self.name))
    }
}

impl PartialOrd for Candidate<'_> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Candidate<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate<'_> {}

impl Catalog {
    pub fn empty(embedder: Arc<dyn Embedder>) -> Self {
        Self {
            entries: Vec::new(),
            vectors: Vec::new(),
            embedder,
            base_dir: None,
        }
    }

    /// Build a catalog from sound objects, embedding each description.
    pub fn from_objects(
        objects: Vec<SoundObject>,
        embedder: Arc<dyn Embedder>,
    ) -> Result<Self, CatalogError> {
        let mut seen = HashSet::new();
        let mut vectors = Vec::with_capacity(objects.len());
        for obj in &objects {
            if !seen.insert(obj.name.clone()) {
                return Err(CatalogError::DuplicateName(obj.name.clone()));
            }
            vectors.push(embedder.embed(&embedding_text(obj))?);
        }
        Ok(Self {
            entries: objects,
            vectors,
            embedder,
            base_dir: None,
        })
    }

    /// Extract every `.wav` file directly inside `dir`, in lexicographic path
    /// order. Unreadable files are skipped with a warning.
    pub fn ingest(
        dir: impl AsRef<Path>,
        embedder: Arc<dyn Embedder>,
    ) -> Result<Ingested, CatalogError> {
        let dir = dir.as_ref();
        let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
            .map_err(io_error(dir))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file() && p.extension().is_some_and(|e| e.eq_ignore_ascii_case("wav")))
            .collect();
        paths.sort();

        let extracted: Vec<Result<SoundObject, MetadataError>> =
            paths.par_iter().map(extract_metadata).collect();

        let mut warnings = Vec::new();
        let mut objects: Vec<SoundObject> = Vec::new();
        let mut names = HashSet::new();
        for (path, result) in paths.iter().zip(extracted) {
            match result {
                Ok(obj) if names.contains(&obj.name) => warnings.push(format!(
                    "skipping {}: duplicate asset name '{}'",
                    path.display(),
                    obj.name
                )),
                Ok(obj) => {
                    names.insert(obj.name.clone());
                    objects.push(obj);
                }
                Err(err) => warnings.push(format!("skipping {}: {err}", path.display())),
            }
        }
        Ok(Ingested {
            catalog: Self::from_objects(objects, embedder)?,
            warnings,
        })
    }

    pub fn entries(&self) -> &[SoundObject] {
        &self.entries
    }

    pub fn vectors(&self) -> &[Vec<f32>] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn embedder_id(&self) -> &str {
        self.embedder.id()
    }

    pub fn embedder(&self) -> &Arc<dyn Embedder> {
        &self.embedder
    }

    pub fn get(&self, name: &str) -> Option<&SoundObject> {
        self.entries.iter().find(|e| e.name == name)
    }

    /// Top-`k` entries by cosine similarity; ties go to the smaller name.
    pub fn query(&self, text: &str, k: usize) -> Result<RetrievalSet, CatalogError> {
        if k == 0 {
            return Err(CatalogError::InvalidK);
        }
        if self.entries.is_empty() {
            return Ok(RetrievalSet {
                query: text.to_string(),
                hits: Vec::new(),
            });
        }
        let q = self.embedder.embed(text)?;

        let mut heap: BinaryHeap<Reverse<Candidate>> = BinaryHeap::with_capacity(k + 1);
        for (index, (entry, vector)) in self.entries.iter().zip(&self.vectors).enumerate() {
            heap.push(Reverse(Candidate {
                score: dot(&q, vector).clamp(-1.0, 1.0),
                name: &entry.name,
                index,
            }));
            if heap.len() > k {
                heap.pop();
            }
        }
        let hits = heap
            .into_sorted_vec()
            .into_iter()
            .map(|Reverse(c)| RetrievalHit {
                object: self.entries[c.index].clone(),
                score: c.score,
            })
            .collect();
        Ok(RetrievalSet {
            query: text.to_string(),
            hits,
        })
    }

    /// Serialize: a header with version, embedder id and dimension, then one
    /// record per entry with its vector as sparse `index:f32-bits` pairs.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{FILE_MAGIC}\nembedder: {}\ndimension: {}\nentries: {}\n",
            self.embedder.id(),
            self.embedder.dimension(),
            self.entries.len()
        );
        for (entry, vector) in self.entries.iter().zip(&self.vectors) {
            out.push_str("\n[entry]\n");
            out.push_str(&entry.to_record());
            let sparse: Vec<String> = vector
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(i, v)| format!("{i}:{:08x}", v.to_bits()))
                .collect();
            out.push_str("vector: ");
            out.push_str(&sparse.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), CatalogError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(io_error(path))
    }

    pub fn load(path: impl AsRef<Path>, embedder: Arc<dyn Embedder>) -> Result<Self, CatalogError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(io_error(path))?;
        let mut catalog = Self::parse(&text, embedder)?;
        catalog.base_dir = path.parent().map(Path::to_path_buf);
        Ok(catalog)
    }

    pub fn parse(text: &str, embedder: Arc<dyn Embedder>) -> Result<Self, CatalogError> {
        let bad = |m: String| CatalogError::Format(m);
        let mut sections = text.split("\n[entry]\n");
        let header = sections.next().unwrap_or_default();
        let mut lines = header.lines();
        if lines.next() != Some(FILE_MAGIC) {
            return Err(bad(format!("expected first line '{FILE_MAGIC}'")));
        }
        let mut embedder_id = None;
        let mut dimension = None;
        let mut count = None;
        for line in lines.filter(|l| !l.trim().is_empty()) {
            match line.split_once(':').map(|(k, v)| (k.trim(), v.trim())) {
                Some(("embedder", v)) => embedder_id = Some(v.to_string()),
                Some(("dimension", v)) => dimension = v.parse::<usize>().ok(),
                Some(("entries", v)) => count = v.parse::<usize>().ok(),
                _ => return Err(bad(format!("unexpected header line '{line}'"))),
            }
        }
        let embedder_id = embedder_id.ok_or_else(|| bad("missing embedder".into()))?;
        if embedder_id != embedder.id() {
            return Err(CatalogError::EmbedderMismatch {
                found: embedder_id,
                expected: embedder.id().to_string(),
            });
        }
        let dimension = dimension.ok_or_else(|| bad("missing or invalid dimension".into()))?;
        if dimension != embedder.dimension() {
            return Err(bad(format!(
                "dimension {dimension} does not match embedder dimension {}",
                embedder.dimension()
            )));
        }
        let count = count.ok_or_else(|| bad("missing or invalid entry count".into()))?;

        let mut entries = Vec::with_capacity(count);
        let mut vectors = Vec::with_capacity(count);
        for section in sections {
            let (record, vector_line) = match section.rfind("vector:") {
                Some(at) => (&section[..at], section[at + "vector:".len()..].trim()),
                None => return Err(bad("entry without vector".into())),
            };
            let object = SoundObject::from_record(record).map_err(|e| bad(e.to_string()))?;
            let mut vector = vec![0.0f32; dimension];
            for pair in vector_line.split_whitespace() {
                let parsed = pair.split_once(':').and_then(|(i, bits)| {
                    Some((
                        i.parse::<usize>().ok()?,
                        u32::from_str_radix(bits, 16).ok()?,
                    ))
                });
                match parsed {
                    Some((i, bits)) if i < dimension => vector[i] = f32::from_bits(bits),
                    _ => return Err(bad(format!("bad vector component '{pair}'"))),
                }
            }
            entries.push(object);
            vectors.push(vector);
        }
        if entries.len() != count {
            return Err(bad(format!(
                "header declares {count} entries, found {}",
                entries.len()
            )));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = entries.iter().find(|e| !seen.insert(e.name.as_str())) {
            return Err(CatalogError::DuplicateName(dup.name.clone()));
        }
        Ok(Self {
            entries,
            vectors,
            embedder,
            base_dir: None,
        })
    }

    fn resolve(&self, source: &str) -> PathBuf {
        let path = PathBuf::from(source);
        match &self.base_dir {
            Some(base) if path.is_relative() && !path.exists() => base.join(path),
            _ => path,
        }
    }
}

fn embedding_text(obj: &SoundObject) -> String {
    if normalize_text(&obj.description).is_empty() {
        obj.name.clone()
    } else {
        obj.description.clone()
    }
}

impl AssetIndex for Catalog {
    fn contains_asset(&self, name: &str) -> bool {
        self.get(name).is_some()
    }
}

impl AssetSource for Catalog {
    fn load(&self, asset_ref: &str) -> Result<AudioBuffer, RenderError> {
        let entry = self
            .get(asset_ref)
            .ok_or_else(|| RenderError::MissingAsset(asset_ref.to_string()))?;
        read_wav(self.resolve(&entry.source_path)).map_err(|e| RenderError::Unreadable {
            asset: asset_ref.to_string(),
            message: e.to_string(),
        })
    }
}

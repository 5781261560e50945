use super::CatalogError;

/// Text → unit vector. Implementations must be deterministic.
pub trait Embedder: Send + Sync {
    /// Identifies the vector space; catalogs built with a different id
    /// cannot be queried with this embedder.
    fn id(&self) -> &str;
    fn dimension(&self) -> usize;
    fn embed(&self, text: &str) -> Result<Vec<f32>, CatalogError>;
}

pub const TRIGRAM_DIMENSION: usize = 512;

/// Bag of hashed character trigrams over lowercased text.
///
/// Separators (`_`, `-`, whitespace) collapse to single spaces and the text
/// is padded with one space on each side, so word boundaries contribute
/// trigrams of their own.
#[derive(Debug, Clone, Copy, Default)]
pub struct TrigramEmbedder;

impl TrigramEmbedder {
    pub const ID: &'static str = "trigram-fnv1a-512-v1";
}

fn fnv1a(bytes: &[u8]) -> u32 {
    let mut hash: u32 = 0x811c_9dc5;
    for &b in bytes {
        hash ^= b as u32;
        hash = hash.wrapping_mul(0x0100_0193);
    }
    hash
}

/// Lowercase, map separators to spaces, collapse runs of spaces.
pub fn normalize_text(text: &str) -> String {
    text.to_lowercase()
        .split(|c: char| c.is_whitespace() || c == '_' || c == '-')
        .filter(|w| !w.is_empty())
        .collect::<Vec<_>>()
        .join(" ")
}

impl Embedder for TrigramEmbedder {
    fn id(&self) -> &str {
        Self::ID
    }

    fn dimension(&self) -> usize {
        TRIGRAM_DIMENSION
    }

    fn embed(&self, text: &str) -> Result<Vec<f32>, CatalogError> {
        let normalized = normalize_text(text);
        if normalized.is_empty() {
            return Err(CatalogError::EmptyText);
        }
        let padded: Vec<char> = format!(" {normalized} ").chars().collect();
        let mut counts = vec![0.0f64; TRIGRAM_DIMENSION];
        let mut buf = [0u8; 12];
        for gram in padded.windows(3) {
            let mut len = 0;
            for c in gram {
                len += c.encode_utf8(&mut buf[len..]).len();
            }
            counts[fnv1a(&buf[..len]) as usize % TRIGRAM_DIMENSION] += 1.0;
        }
        let norm = counts.iter().map(|c| c * c).sum::<f64>().sqrt();
        Ok(counts.into_iter().map(|c| (c / norm) as f32).collect())
    }
}

pub fn dot(a: &[f32], b: &[f32]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| x as f64 * y as f64).sum()
}

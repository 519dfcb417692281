//! Document and sentence vectors, random projection and the 2-D topic map.

mod embd_file;
mod projection;

use std::collections::HashMap;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prep::{tokenize, CleanDocument, StopWords};

pub use embd_file::{parse_embeddings, write_embd, EmbeddingTable, MAGIC};
pub use projection::{map_coordinates, reduce, GaussianProjection};

pub const DEFAULT_DIMENSION: usize = 256;
pub const MIN_HASHED_DIMENSION: usize = 16;

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("invalid embedder spec: {0}")]
    InvalidSpec(String),
    #[error("no documents to embed")]
    NoDocuments,
    #[error("embedding file: {0}")]
    BadFile(String),
    #[error("cannot read embedding file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("embedding file has no vector for post {0}")]
    MissingId(u64),
    #[error("post {id}: expected dimension {expected}, found {found}")]
    DimensionMismatch {
        id: u64,
        expected: usize,
        found: usize,
    },
    #[error("post {0}: non-finite value in embedding")]
    NonFinite(u64),
    #[error("target dimension {target} must be below input dimension {input}")]
    TargetTooLarge { target: usize, input: usize },
    #[error("need at least {0} vectors")]
    TooFewVectors(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum EmbedderKind {
    HashedTfidf,
    ExternalFile,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbedderSpec {
    pub kind: EmbedderKind,
    pub dimension: usize,
    pub seed: u64,
    #[serde(default)]
    pub path: Option<PathBuf>,
}

impl Default for EmbedderSpec {
    fn default() -> Self {
        Self {
            kind: EmbedderKind::HashedTfidf,
            dimension: DEFAULT_DIMENSION,
            seed: 0,
            path: None,
        }
    }
}

impl EmbedderSpec {
    pub fn hashed(dimension: usize, seed: u64) -> Self {
        Self {
            kind: EmbedderKind::HashedTfidf,
            dimension,
            seed,
            path: None,
        }
    }

    pub fn validate(&self) -> Result<(), EmbedError> {
        match self.kind {
            EmbedderKind::HashedTfidf if self.dimension < MIN_HASHED_DIMENSION => {
                Err(EmbedError::InvalidSpec(format!(
                    "hashed_tfidf needs dimension >= {MIN_HASHED_DIMENSION}, got {}",
                    self.dimension
                )))
            }
            EmbedderKind::ExternalFile if self.path.is_none() => Err(EmbedError::InvalidSpec(
                "external_file requires a path".into(),
            )),
            _ if self.dimension == 0 => {
                Err(EmbedError::InvalidSpec("dimension must be positive".into()))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocVector {
    pub post_id: u64,
    pub full: Vec<f32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reduced: Option<Vec<f32>>,
}

impl DocVector {
    pub fn is_zero(&self) -> bool {
        self.full.iter().all(|&v| v == 0.0)
    }
}

const SIGN_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

// FNV-1a over the seed and the token, then the splitmix64 finalizer for
// avalanche. Stable across platforms and releases.
pub fn token_hash(token: &str, seed: u64) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in seed.to_le_bytes().iter().chain(token.as_bytes()) {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h = (h ^ (h >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    h = (h ^ (h >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    h ^ (h >> 31)
}

/// Bucket index and sign (+1/-1) of a token under the hashing trick.
pub fn bucket(token: &str, dimension: usize, seed: u64) -> (usize, f64) {
    let idx = (token_hash(token, seed) % dimension as u64) as usize;
    let sign = if token_hash(token, seed ^ SIGN_SALT) & 1 == 0 {
        1.0
    } else {
        -1.0
    };
    (idx, sign)
}

/// Hashed TF-IDF embedder with a document-frequency table frozen from a corpus.
#[derive(Debug, Clone)]
pub struct HashedTfIdf {
    dimension: usize,
    seed: u64,
    n_docs: usize,
    df: HashMap<String, usize>,
}

impl HashedTfIdf {
    pub fn fit(docs: &[CleanDocument], dimension: usize, seed: u64) -> Self {
        let mut df: HashMap<String, usize> = HashMap::new();
        for doc in docs {
            let mut seen: Vec<&str> = doc.tokens.iter().map(String::as_str).collect();
            seen.sort_unstable();
            seen.dedup();
            for t in seen {
                *df.entry(t.to_string()).or_default() += 1;
            }
        }
        Self {
            dimension,
            seed,
            n_docs: docs.len(),
            df,
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn document_frequency(&self, token: &str) -> usize {
        self.df.get(token).copied().unwrap_or(0)
    }

    /// `ln(1 + N / df)`; tokens unseen in the corpus count as `df = 1`.
    pub fn idf(&self, token: &str) -> f64 {
        let df = self.document_frequency(token).max(1);
        (1.0 + self.n_docs.max(1) as f64 / df as f64).ln()
    }

    /// L2-normalized hashed TF-IDF vector of a token bag. Empty bags and
    /// bags whose signed buckets cancel map to the zero vector.
    pub fn embed_tokens(&self, tokens: &[String]) -> Vec<f32> {
        let mut tf: HashMap<&str, usize> = HashMap::new();
        for t in tokens {
            *tf.entry(t.as_str()).or_default() += 1;
        }
        // Sorted accumulation keeps float sums order-independent of HashMap iteration.
        let mut terms: Vec<(&str, usize)> = tf.into_iter().collect();
        terms.sort_unstable();
        let mut acc = vec![0f64; self.dimension];
        for (term, count) in terms {
            let (idx, sign) = bucket(term, self.dimension, self.seed);
            acc[idx] += sign * count as f64 * self.idf(term);
        }
        let norm = acc.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm <= f64::EPSILON {
            return vec![0.0; self.dimension];
        }
        acc.iter().map(|v| (v / norm) as f32).collect()
    }

    /// Embeds free text (a sentence) as a one-off document against the
    /// corpus table, tokenizing it the same way documents are.
    pub fn embed_text(&self, text: &str, stop: &StopWords) -> Vec<f32> {
        self.embed_tokens(&tokenize(text, stop))
    }
}

pub fn embed_corpus(
    docs: &[CleanDocument],
    spec: &EmbedderSpec,
) -> Result<Vec<DocVector>, EmbedError> {
    spec.validate()?;
    if docs.is_empty() {
        return Err(EmbedError::NoDocuments);
    }
    match spec.kind {
        EmbedderKind::HashedTfidf => {
            let model = HashedTfIdf::fit(docs, spec.dimension, spec.seed);
            Ok(docs
                .par_iter()
                .map(|d| DocVector {
                    post_id: d.post_id,
                    full: model.embed_tokens(&d.tokens),
                    reduced: None,
                })
                .collect())
        }
        EmbedderKind::ExternalFile => {
            let path = spec.path.as_ref().expect("validated");
            let bytes = std::fs::read(path).map_err(|source| EmbedError::Io {
                path: path.clone(),
                source,
            })?;
            let table = parse_embeddings(&bytes)?;
            vectors_from_table(docs, &table, spec.dimension)
        }
    }
}

pub fn vectors_from_table(
    docs: &[CleanDocument],
    table: &EmbeddingTable,
    dimension: usize,
) -> Result<Vec<DocVector>, EmbedError> {
    let by_id: HashMap<u64, &Vec<f32>> = table.rows.iter().map(|(id, v)| (*id, v)).collect();
    docs.iter()
        .map(|d| {
            let v = by_id
                .get(&d.post_id)
                .ok_or(EmbedError::MissingId(d.post_id))?;
            if v.len() != dimension {
                return Err(EmbedError::DimensionMismatch {
                    id: d.post_id,
                    expected: dimension,
                    found: v.len(),
                });
            }
            Ok(DocVector {
                post_id: d.post_id,
                full: (*v).clone(),
                reduced: None,
            })
        })
        .collect()
}

/// Embeds sentences against a fitted corpus table.
pub fn embed_sentences(sentences: &[&str], model: &HashedTfIdf, stop: &StopWords) -> Vec<Vec<f32>> {
    sentences
        .iter()
        .map(|s| model.embed_text(s, stop))
        .collect()
}

/// Cosine similarity in f64, clamped to [-1, 1]; zero if either side is zero.
pub fn cosine(a: &[f32], b: &[f32]) -> f64 {
    let (mut dot, mut na, mut nb) = (0f64, 0f64, 0f64);
    for (x, y) in a.iter().zip(b) {
        let (x, y) = (f64::from(*x), f64::from(*y));
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0)
}

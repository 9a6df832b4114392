//! Embedding sources behind one interface: a binary vector store keyed by
//! content hash, a remote HTTP embedding service, and a deterministic toy
//! embedder for offline runs.

mod file;
mod http;
mod toy;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use file::{text_key, FileStore, StoreKey};
pub use http::{Health, HttpBackend, EMBED_URL_ENV};
pub use toy::ToyEmbedder;

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: malformed vector store: {message}")]
    Format { path: PathBuf, message: String },
    #[error("{count} {kind} missing from vector store: {}", keys.join(", "))]
    Missing { kind: &'static str, count: usize, keys: Vec<String> },
    #[error("request {request_id}: HTTP {status}: {message}")]
    Http { request_id: String, status: u16, message: String },
    #[error("request {request_id}: {message}")]
    Transport { request_id: String, message: String },
    #[error("request {request_id}: expected {expected} vectors of dimension {dimension}, got {got}")]
    Shape { request_id: String, expected: usize, dimension: usize, got: String },
    #[error("dimension mismatch: {expected} vs {got}")]
    Dimension { expected: usize, got: usize },
    #[error("{0}")]
    Unsupported(String),
    #[error("no service URL configured; set `url` or {EMBED_URL_ENV}")]
    NoUrl,
}

/// An image as the backends see it. `caption` is only consulted by the toy
/// embedder, which embeds an image as its first caption.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageRef {
    pub id: String,
    #[serde(default)]
    pub media: Option<String>,
    #[serde(default)]
    pub caption: Option<String>,
}

/// Anything that turns texts and images into vectors. Output order follows
/// input order and every vector of one call shares a dimension.
pub trait Embedder: Send + Sync {
    fn embed_texts(&self, texts: &[String]) -> Result<Vec<Vec<f32>>, BackendError>;
    fn embed_images(&self, images: &[ImageRef]) -> Result<Vec<Vec<f32>>, BackendError>;
}

fn default_batch() -> usize {
    64
}

fn default_timeout() -> u64 {
    60
}

fn default_concurrency() -> usize {
    2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum BackendConfig {
    File {
        path: PathBuf,
    },
    Http {
        /// Falls back to the environment when absent.
        #[serde(default)]
        url: Option<String>,
        model: String,
        #[serde(default = "default_batch")]
        batch_size: usize,
        #[serde(default = "default_timeout")]
        timeout_secs: u64,
        #[serde(default = "default_concurrency")]
        concurrency: usize,
    },
    Toy {
        dimension: usize,
        seed: u64,
    },
}

/// A ready-to-use backend.
pub enum Backend {
    File(FileStore),
    Http(HttpBackend),
    Toy(ToyEmbedder),
}

impl Backend {
    pub fn from_config(cfg: &BackendConfig) -> Result<Backend, BackendError> {
        Ok(match cfg {
            BackendConfig::File { path } => Backend::File(FileStore::load(path)?),
            BackendConfig::Http {
                url,
                model,
                batch_size,
                timeout_secs,
                concurrency,
            } => {
                let url = match url {
                    Some(u) => u.clone(),
                    None => std::env::var(EMBED_URL_ENV).map_err(|_| BackendError::NoUrl)?,
                };
                Backend::Http(HttpBackend::new(&url, model, *batch_size, *timeout_secs, *concurrency)?)
            }
            BackendConfig::Toy { dimension, seed } => Backend::Toy(ToyEmbedder::new(*dimension, *seed)),
        })
    }
}

impl Embedder for Backend {
    fn embed_texts(&self, texts: &[String]) -> Result<Vec<Vec<f32>>, BackendError> {
        match self {
            Backend::File(b) => b.embed_texts(texts),
            Backend::Http(b) => b.embed_texts(texts),
            Backend::Toy(b) => b.embed_texts(texts),
        }
    }

    fn embed_images(&self, images: &[ImageRef]) -> Result<Vec<Vec<f32>>, BackendError> {
        match self {
            Backend::File(b) => b.embed_images(images),
            Backend::Http(b) => b.embed_images(images),
            Backend::Toy(b) => b.embed_images(images),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_kinds_parse_from_toml() {
        let cfg: BackendConfig = toml::from_str("kind = \"toy\"\ndimension = 8\nseed = 42").unwrap();
        assert_eq!(cfg, BackendConfig::Toy { dimension: 8, seed: 42 });
        let cfg: BackendConfig = toml::from_str("kind = \"http\"\nmodel = \"m\"").unwrap();
        assert!(matches!(cfg, BackendConfig::Http { batch_size: 64, url: None, .. }));
        assert!(toml::from_str::<BackendConfig>("kind = \"toy\"\ndimension = 8\nseed = 1\npath = \"x\"").is_err());
    }
}

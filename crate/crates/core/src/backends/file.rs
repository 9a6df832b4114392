//! Binary vector store.
//!
//! Layout, all little-endian: `u32 dimension`, `u64 count`, then `count`
//! records of `u8 key_kind` (0: 32-byte SHA-256 of a text, 1: `u32` length
//! plus UTF-8 id) followed by `dimension` `f32` values.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::{BackendError, Embedder, ImageRef};

const KEY_HASH: u8 = 0;
const KEY_ID: u8 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StoreKey {
    Hash([u8; 32]),
    Id(String),
}

/// Content key of a text: SHA-256 of its UTF-8 bytes.
pub fn text_key(text: &str) -> [u8; 32] {
    Sha256::digest(text.as_bytes()).into()
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FileStore {
    dimension: usize,
    entries: HashMap<StoreKey, Vec<f32>>,
    path: PathBuf,
}

struct Reader<'b> {
    buf: &'b [u8],
    pos: usize,
}

impl<'b> Reader<'b> {
    fn take(&mut self, n: usize) -> Option<&'b [u8]> {
        let end = self.pos.checked_add(n)?;
        let out = self.buf.get(self.pos..end)?;
        self.pos = end;
        Some(out)
    }

    fn u32(&mut self) -> Option<u32> {
        self.take(4).map(|b| u32::from_le_bytes(b.try_into().unwrap()))
    }

    fn u64(&mut self) -> Option<u64> {
        self.take(8).map(|b| u64::from_le_bytes(b.try_into().unwrap()))
    }
}

impl FileStore {
    pub fn new(dimension: usize) -> Self {
        FileStore {
            dimension,
            ..FileStore::default()
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn insert(&mut self, key: StoreKey, vector: Vec<f32>) -> Result<(), BackendError> {
        if vector.len() != self.dimension {
            return Err(BackendError::Dimension {
                expected: self.dimension,
                got: vector.len(),
            });
        }
        self.entries.insert(key, vector);
        Ok(())
    }

    pub fn insert_text(&mut self, text: &str, vector: Vec<f32>) -> Result<(), BackendError> {
        self.insert(StoreKey::Hash(text_key(text)), vector)
    }

    pub fn get(&self, key: &StoreKey) -> Option<&[f32]> {
        self.entries.get(key).map(Vec::as_slice)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<FileStore, BackendError> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|source| BackendError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut store = Self::from_bytes(&bytes).map_err(|message| BackendError::Format {
            path: path.to_path_buf(),
            message,
        })?;
        store.path = path.to_path_buf();
        Ok(store)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<FileStore, String> {
        let mut r = Reader { buf: bytes, pos: 0 };
        let dimension = r.u32().ok_or("truncated header")? as usize;
        let count = r.u64().ok_or("truncated header")?;
        let mut store = FileStore::new(dimension);
        for i in 0..count {
            let at = r.pos;
            let key = match r.take(1).ok_or_else(|| format!("record {i} at byte {at}: truncated"))?[0] {
                KEY_HASH => {
                    let h = r.take(32).ok_or_else(|| format!("record {i} at byte {at}: truncated hash"))?;
                    StoreKey::Hash(h.try_into().unwrap())
                }
                KEY_ID => {
                    let len = r.u32().ok_or_else(|| format!("record {i} at byte {at}: truncated id length"))? as usize;
                    let raw = r.take(len).ok_or_else(|| format!("record {i} at byte {at}: truncated id"))?;
                    let id = std::str::from_utf8(raw).map_err(|e| format!("record {i} at byte {at}: {e}"))?;
                    StoreKey::Id(id.to_string())
                }
                other => return Err(format!("record {i} at byte {at}: unknown key kind {other}")),
            };
            let raw = r
                .take(dimension * 4)
                .ok_or_else(|| format!("record {i} at byte {at}: truncated vector"))?;
            let v: Vec<f32> = raw.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();
            if store.entries.insert(key, v).is_some() {
                return Err(format!("record {i} at byte {at}: duplicate key"));
            }
        }
        if r.pos != bytes.len() {
            return Err(format!("{} trailing bytes", bytes.len() - r.pos));
        }
        Ok(store)
    }

    /// Serializes with records sorted by key, so equal stores give equal bytes.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut keys: Vec<&StoreKey> = self.entries.keys().collect();
        keys.sort();
        let mut out = Vec::with_capacity(12 + keys.len() * (33 + self.dimension * 4));
        out.extend_from_slice(&(self.dimension as u32).to_le_bytes());
        out.extend_from_slice(&(keys.len() as u64).to_le_bytes());
        for k in keys {
            match k {
                StoreKey::Hash(h) => {
                    out.push(KEY_HASH);
                    out.extend_from_slice(h);
                }
                StoreKey::Id(id) => {
                    out.push(KEY_ID);
                    out.extend_from_slice(&(id.len() as u32).to_le_bytes());
                    out.extend_from_slice(id.as_bytes());
                }
            }
            for x in &self.entries[k] {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), BackendError> {
        let path = path.as_ref();
        fs::write(path, self.to_bytes()).map_err(|source| BackendError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    fn lookup(&self, keys: Vec<StoreKey>, kind: &'static str) -> Result<Vec<Vec<f32>>, BackendError> {
        let mut missing = Vec::new();
        let mut out = Vec::with_capacity(keys.len());
        for k in &keys {
            match self.entries.get(k) {
                Some(v) => out.push(v.clone()),
                None => missing.push(match k {
                    StoreKey::Hash(h) => hex(h),
                    StoreKey::Id(id) => id.clone(),
                }),
            }
        }
        if missing.is_empty() {
            Ok(out)
        } else {
            missing.sort();
            missing.dedup();
            Err(BackendError::Missing {
                kind,
                count: missing.len(),
                keys: missing,
            })
        }
    }
}

impl Embedder for FileStore {
    fn embed_texts(&self, texts: &[String]) -> Result<Vec<Vec<f32>>, BackendError> {
        self.lookup(texts.iter().map(|t| StoreKey::Hash(text_key(t))).collect(), "text hashes")
    }

    fn embed_images(&self, images: &[ImageRef]) -> Result<Vec<Vec<f32>>, BackendError> {
        self.lookup(images.iter().map(|im| StoreKey::Id(im.id.clone())).collect(), "image ids")
    }
}

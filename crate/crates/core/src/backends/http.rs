//! Client for the embedding service protocol:
//! `POST /embed {model, texts}` and `POST /embed_image {model, ids}` both
//! answer `{vectors, dimension}`; `GET /health` answers `{status, models}`.

use std::collections::{HashMap, HashSet};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use reqwest::blocking::Client;
use serde::{Deserialize, Serialize};

use super::{BackendError, Embedder, ImageRef};

/// Environment variable holding the service base URL.
pub const EMBED_URL_ENV: &str = "CONTRAST_EMBED_URL";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    #[serde(default)]
    pub models: Vec<String>,
}

#[derive(Deserialize)]
struct EmbedResponse {
    vectors: Vec<Vec<f32>>,
    dimension: usize,
}

#[derive(Deserialize)]
struct ErrorBody {
    error: String,
}

#[derive(Clone, Copy)]
enum Route {
    Text,
    Image,
}

/// Blocking HTTP backend with a write-through cache: each distinct text or
/// image id is requested at most once per backend instance.
pub struct HttpBackend {
    client: Client,
    base: String,
    model: String,
    batch_size: usize,
    concurrency: usize,
    text_cache: Mutex<HashMap<String, Vec<f32>>>,
    image_cache: Mutex<HashMap<String, Vec<f32>>>,
    dimension: Mutex<Option<usize>>,
    next_id: AtomicU64,
}

impl HttpBackend {
    pub fn new(base: &str, model: &str, batch_size: usize, timeout_secs: u64, concurrency: usize) -> Result<Self, BackendError> {
        let client = Client::builder()
            .timeout(Duration::from_secs(timeout_secs))
            .build()
            .map_err(|e| BackendError::Transport {
                request_id: "-".into(),
                message: e.to_string(),
            })?;
        Ok(HttpBackend {
            client,
            base: base.trim_end_matches('/').to_string(),
            model: model.to_string(),
            batch_size: batch_size.max(1),
            concurrency: concurrency.max(1),
            text_cache: Mutex::default(),
            image_cache: Mutex::default(),
            dimension: Mutex::default(),
            next_id: AtomicU64::new(0),
        })
    }

    /// Number of requests issued so far.
    pub fn requests_sent(&self) -> u64 {
        self.next_id.load(Ordering::Relaxed)
    }

    fn request_id(&self) -> String {
        format!("{}-{}", std::process::id(), self.next_id.fetch_add(1, Ordering::Relaxed))
    }

    fn transport(request_id: &str, e: impl std::fmt::Display) -> BackendError {
        BackendError::Transport {
            request_id: request_id.to_string(),
            message: e.to_string(),
        }
    }

    pub fn health(&self) -> Result<Health, BackendError> {
        let rid = self.request_id();
        let resp = self
            .client
            .get(format!("{}/health", self.base))
            .header("X-Request-Id", &rid)
            .send()
            .map_err(|e| Self::transport(&rid, e))?;
        let status = resp.status();
        let body = resp.text().map_err(|e| Self::transport(&rid, e))?;
        if !status.is_success() {
            return Err(BackendError::Http {
                request_id: rid,
                status: status.as_u16(),
                message: body,
            });
        }
        serde_json::from_str(&body).map_err(|e| Self::transport(&rid, e))
    }

    fn post_batch(&self, route: Route, items: &[String]) -> Result<Vec<Vec<f32>>, BackendError> {
        let rid = self.request_id();
        let (path, body) = match route {
            Route::Text => ("embed", serde_json::json!({ "model": self.model, "texts": items })),
            Route::Image => ("embed_image", serde_json::json!({ "model": self.model, "ids": items })),
        };
        log::debug!("request {rid}: POST /{path} with {} items", items.len());
        let resp = self
            .client
            .post(format!("{}/{path}", self.base))
            .header("X-Request-Id", &rid)
            .json(&body)
            .send()
            .map_err(|e| Self::transport(&rid, e))?;
        let status = resp.status();
        let text = resp.text().map_err(|e| Self::transport(&rid, e))?;
        if !status.is_success() {
            let message = serde_json::from_str::<ErrorBody>(&text).map(|b| b.error).unwrap_or(text);
            return Err(BackendError::Http {
                request_id: rid,
                status: status.as_u16(),
                message,
            });
        }
        let parsed: EmbedResponse = serde_json::from_str(&text).map_err(|e| Self::transport(&rid, format!("bad response body: {e}")))?;
        let bad_len = parsed.vectors.iter().find(|v| v.len() != parsed.dimension);
        if parsed.vectors.len() != items.len() || bad_len.is_some() {
            let got = match bad_len {
                Some(v) => format!("a vector of length {}", v.len()),
                None => format!("{} vectors", parsed.vectors.len()),
            };
            return Err(BackendError::Shape {
                request_id: rid,
                expected: items.len(),
                dimension: parsed.dimension,
                got,
            });
        }
        let mut dim = self.dimension.lock().unwrap();
        match *dim {
            Some(d) if d != parsed.dimension => {
                return Err(BackendError::Dimension {
                    expected: d,
                    got: parsed.dimension,
                })
            }
            _ => *dim = Some(parsed.dimension),
        }
        Ok(parsed.vectors)
    }

    fn embed_cached(&self, route: Route, keys: Vec<String>) -> Result<Vec<Vec<f32>>, BackendError> {
        let cache = match route {
            Route::Text => &self.text_cache,
            Route::Image => &self.image_cache,
        };
        let mut todo: Vec<String> = Vec::new();
        {
            let c = cache.lock().unwrap();
            let mut seen = HashSet::new();
            for k in &keys {
                if !c.contains_key(k) && seen.insert(k.as_str()) {
                    todo.push(k.clone());
                }
            }
        }
        let batches: Vec<&[String]> = todo.chunks(self.batch_size).collect();
        for wave in batches.chunks(self.concurrency) {
            let results: Vec<Result<Vec<Vec<f32>>, BackendError>> = std::thread::scope(|s| {
                let handles: Vec<_> = wave.iter().map(|b| s.spawn(move || self.post_batch(route, b))).collect();
                handles.into_iter().map(|h| h.join().expect("embedding request thread panicked")).collect()
            });
            let mut c = cache.lock().unwrap();
            for (batch, res) in wave.iter().zip(results) {
                for (k, v) in batch.iter().zip(res?) {
                    c.insert(k.clone(), v);
                }
            }
        }
        let c = cache.lock().unwrap();
        Ok(keys.iter().map(|k| c[k].clone()).collect())
    }
}

impl Embedder for HttpBackend {
    fn embed_texts(&self, texts: &[String]) -> Result<Vec<Vec<f32>>, BackendError> {
        self.embed_cached(Route::Text, texts.to_vec())
    }

    fn embed_images(&self, images: &[ImageRef]) -> Result<Vec<Vec<f32>>, BackendError> {
        self.embed_cached(Route::Image, images.iter().map(|im| im.id.clone()).collect())
    }
}

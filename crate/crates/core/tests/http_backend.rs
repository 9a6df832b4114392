//! Contract tests for the HTTP embedding client against an in-process stub.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex};
use std::thread;

use contrastive_edits::backends::{Backend, BackendConfig, BackendError, Embedder, HttpBackend, ImageRef, EMBED_URL_ENV};
use serde_json::{json, Value};

#[derive(Clone, Debug)]
struct Seen {
    method: String,
    path: String,
    request_id: Option<String>,
    body: Value,
}

type Handler = dyn Fn(&str, &Value) -> (u16, String) + Send + Sync;

/// Minimal HTTP/1.1 server: one request per connection.
fn serve(handler: Arc<Handler>) -> (String, Arc<Mutex<Vec<Seen>>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let log = Arc::new(Mutex::new(Vec::new()));
    let log2 = log.clone();
    thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { continue };
            let handler = handler.clone();
            let log = log2.clone();
            thread::spawn(move || {
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                let mut parts = line.split_whitespace();
                let method = parts.next().unwrap_or("").to_string();
                let path = parts.next().unwrap_or("").to_string();
                let mut len = 0usize;
                let mut request_id = None;
                loop {
                    let mut h = String::new();
                    reader.read_line(&mut h).unwrap();
                    let h = h.trim_end();
                    if h.is_empty() {
                        break;
                    }
                    let (k, v) = h.split_once(':').unwrap();
                    match k.to_ascii_lowercase().as_str() {
                        "content-length" => len = v.trim().parse().unwrap(),
                        "x-request-id" => request_id = Some(v.trim().to_string()),
                        _ => {}
                    }
                }
                let mut body = vec![0u8; len];
                reader.read_exact(&mut body).unwrap();
                let body: Value = if body.is_empty() { Value::Null } else { serde_json::from_slice(&body).unwrap() };
                let (status, out) = handler(&path, &body);
                log.lock().unwrap().push(Seen {
                    method,
                    path,
                    request_id,
                    body,
                });
                let resp = format!(
                    "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{out}",
                    out.len()
                );
                stream.write_all(resp.as_bytes()).unwrap();
            });
        }
    });
    (format!("http://{addr}"), log)
}

fn vector_for(text: &str) -> Vec<f32> {
    vec![text.len() as f32, text.bytes().next().unwrap_or(0) as f32, 1.0]
}

fn good_handler() -> Arc<Handler> {
    Arc::new(|path, body| match path {
        "/health" => (200, json!({"status": "ok", "models": ["stub-model"]}).to_string()),
        "/embed" => {
            if body["model"] != "stub-model" {
                return (404, json!({"error": "unknown model"}).to_string());
            }
            let vs: Vec<Vec<f32>> = body["texts"].as_array().unwrap().iter().map(|t| vector_for(t.as_str().unwrap())).collect();
            (200, json!({"vectors": vs, "dimension": 3}).to_string())
        }
        "/embed_image" => {
            let vs: Vec<Vec<f32>> = body["ids"].as_array().unwrap().iter().map(|t| vector_for(t.as_str().unwrap())).collect();
            (200, json!({"vectors": vs, "dimension": 3}).to_string())
        }
        _ => (404, json!({"error": "no route"}).to_string()),
    })
}

#[test]
fn health_lists_models() {
    let (url, log) = serve(good_handler());
    let b = HttpBackend::new(&url, "stub-model", 8, 5, 1).unwrap();
    let h = b.health().unwrap();
    assert_eq!(h.status, "ok");
    assert_eq!(h.models, vec!["stub-model"]);
    let seen = log.lock().unwrap();
    assert_eq!(seen[0].method, "GET");
    assert!(seen[0].request_id.is_some());
}

#[test]
fn texts_are_batched_cached_and_ordered() {
    let (url, log) = serve(good_handler());
    let b = HttpBackend::new(&url, "stub-model", 2, 5, 2).unwrap();
    let texts: Vec<String> = ["a dog", "a cat", "a dog", "bird", "a horse"].iter().map(|s| s.to_string()).collect();
    let out = b.embed_texts(&texts).unwrap();
    assert_eq!(out.len(), 5);
    for (t, v) in texts.iter().zip(&out) {
        assert_eq!(v, &vector_for(t));
    }
    // Four distinct texts in batches of two.
    assert_eq!(log.lock().unwrap().len(), 2);
    for s in log.lock().unwrap().iter() {
        assert_eq!(s.path, "/embed");
        assert_eq!(s.body["model"], "stub-model");
        assert!(s.body["texts"].as_array().unwrap().len() <= 2);
    }
    // Second call is served from the cache.
    let again = b.embed_texts(&texts[..2]).unwrap();
    assert_eq!(again, out[..2].to_vec());
    assert_eq!(log.lock().unwrap().len(), 2);
    let ids: Vec<String> = log.lock().unwrap().iter().filter_map(|s| s.request_id.clone()).collect();
    assert_eq!(ids.len(), 2);
    assert_ne!(ids[0], ids[1]);
}

#[test]
fn images_go_to_the_image_route() {
    let (url, log) = serve(good_handler());
    let b = HttpBackend::new(&url, "stub-model", 8, 5, 1).unwrap();
    let imgs = vec![ImageRef {
        id: "img1".into(),
        media: None,
        caption: None,
    }];
    assert_eq!(b.embed_images(&imgs).unwrap(), vec![vector_for("img1")]);
    assert_eq!(log.lock().unwrap()[0].path, "/embed_image");
    assert_eq!(log.lock().unwrap()[0].body["ids"], json!(["img1"]));
}

#[test]
fn non_200_carries_status_message_and_request_id() {
    let (url, _) = serve(good_handler());
    let b = HttpBackend::new(&url, "other-model", 8, 5, 1).unwrap();
    match b.embed_texts(&["x".into()]).unwrap_err() {
        BackendError::Http { request_id, status, message } => {
            assert_eq!(status, 404);
            assert_eq!(message, "unknown model");
            assert!(!request_id.is_empty());
        }
        e => panic!("unexpected {e}"),
    }
}

#[test]
fn oversize_batch_status_is_reported() {
    let (url, _) = serve(Arc::new(|_, _| (413, json!({"error": "batch too large"}).to_string())));
    let b = HttpBackend::new(&url, "m", 8, 5, 1).unwrap();
    let err = b.embed_texts(&["x".into()]).unwrap_err();
    assert!(matches!(err, BackendError::Http { status: 413, .. }), "{err}");
}

#[test]
fn wrong_vector_length_is_a_shape_error() {
    let (url, _) = serve(Arc::new(|_, _| (200, json!({"vectors": [[1.0, 2.0]], "dimension": 3}).to_string())));
    let b = HttpBackend::new(&url, "m", 8, 5, 1).unwrap();
    let err = b.embed_texts(&["x".into()]).unwrap_err();
    assert!(matches!(err, BackendError::Shape { .. }), "{err}");
    assert!(err.to_string().contains("request "));
}

#[test]
fn wrong_vector_count_is_a_shape_error() {
    let (url, _) = serve(Arc::new(|_, _| (200, json!({"vectors": [], "dimension": 3}).to_string())));
    let b = HttpBackend::new(&url, "m", 8, 5, 1).unwrap();
    assert!(matches!(b.embed_texts(&["x".into()]).unwrap_err(), BackendError::Shape { .. }));
}

#[test]
fn dimension_drift_between_calls_is_rejected() {
    let (url, _) = serve(Arc::new(|_, body| {
        let t = body["texts"][0].as_str().unwrap_or("");
        let v: Vec<f32> = vec![0.5; t.len()];
        (200, json!({"vectors": [v], "dimension": t.len()}).to_string())
    }));
    let b = HttpBackend::new(&url, "m", 8, 5, 1).unwrap();
    b.embed_texts(&["abc".into()]).unwrap();
    let err = b.embed_texts(&["abcd".into()]).unwrap_err();
    assert!(matches!(err, BackendError::Dimension { expected: 3, got: 4 }), "{err}");
}

#[test]
fn url_falls_back_to_environment() {
    let (url, log) = serve(good_handler());
    std::env::set_var(EMBED_URL_ENV, &url);
    let cfg: BackendConfig = toml::from_str("kind = \"http\"\nmodel = \"stub-model\"").unwrap();
    let backend = Backend::from_config(&cfg).unwrap();
    assert_eq!(backend.embed_texts(&["a".into()]).unwrap(), vec![vector_for("a")]);
    assert_eq!(log.lock().unwrap().len(), 1);
}

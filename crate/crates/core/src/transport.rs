//! Blocking HTTP seam for every outside provider.
//!
//! Clients build an [`HttpRequest`] and hand it to an [`HttpTransport`]. The
//! production transport is reqwest; [`TapeTransport`] wraps any transport
//! and records exchanges to disk, or replays them without touching the
//! network.

use crate::error::{Error, Result};
use base64::Engine;
use chrono::Utc;
use parking_lot::RwLock;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::HashMap;
use std::fs;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

#[derive(Debug, Clone, PartialEq)]
pub struct HttpRequest {
    pub method: String,
    pub url: String,
    /// Not part of the tape key, so credentials never reach fixtures.
    pub headers: Vec<(String, String)>,
    pub body: Option<Vec<u8>>,
}

impl HttpRequest {
    pub fn get(url: impl Into<String>) -> Self {
        Self {
            method: "GET".into(),
            url: url.into(),
            headers: Vec::new(),
            body: None,
        }
    }

    pub fn post(url: impl Into<String>, content_type: &str, body: Vec<u8>) -> Self {
        Self {
            method: "POST".into(),
            url: url.into(),
            headers: vec![("content-type".into(), content_type.into())],
            body: Some(body),
        }
    }

    pub fn post_json(url: impl Into<String>, body: &serde_json::Value) -> Self {
        Self::post(url, "application/json", body.to_string().into_bytes())
    }

    pub fn header(mut self, name: &str, value: impl Into<String>) -> Self {
        self.headers.push((name.to_string(), value.into()));
        self
    }

    /// Stable key over method, URL and body.
    pub fn tape_key(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.method.as_bytes());
        hasher.update(b"\n");
        hasher.update(self.url.as_bytes());
        hasher.update(b"\n");
        hasher.update(Sha256::digest(self.body.as_deref().unwrap_or_default()));
        hex::encode(hasher.finalize())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HttpResponse {
    pub status: u16,
    pub body: Vec<u8>,
}

impl HttpResponse {
    pub fn is_success(&self) -> bool {
        (200..300).contains(&self.status)
    }

    pub fn text(&self) -> String {
        String::from_utf8_lossy(&self.body).into_owned()
    }
}

/// Transport-level failure; `retryable` marks timeouts and connection errors.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportError {
    pub message: String,
    pub retryable: bool,
    pub fixture_miss: bool,
}

impl std::fmt::Display for TransportError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

pub trait HttpTransport: Send + Sync {
    fn execute(&self, request: &HttpRequest) -> std::result::Result<HttpResponse, TransportError>;
}

pub struct ReqwestTransport {
    client: reqwest::blocking::Client,
}

impl ReqwestTransport {
    pub fn new(timeout: Duration) -> Result<Self> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| Error::ProviderUnavailable(format!("http client: {e}")))?;
        Ok(Self { client })
    }
}

impl HttpTransport for ReqwestTransport {
    fn execute(&self, request: &HttpRequest) -> std::result::Result<HttpResponse, TransportError> {
        let method = reqwest::Method::from_bytes(request.method.as_bytes()).map_err(|e| TransportError {
            message: e.to_string(),
            retryable: false,
            fixture_miss: false,
        })?;
        let mut builder = self.client.request(method, &request.url);
        for (k, v) in &request.headers {
            builder = builder.header(k, v);
        }
        if let Some(body) = &request.body {
            builder = builder.body(body.clone());
        }
        let response = builder.send().map_err(|e| TransportError {
            retryable: e.is_timeout() || e.is_connect() || e.is_request(),
            message: e.to_string(),
            fixture_miss: false,
        })?;
        let status = response.status().as_u16();
        let body = response.bytes().map_err(|e| TransportError {
            message: e.to_string(),
            retryable: true,
            fixture_miss: false,
        })?;
        Ok(HttpResponse {
            status,
            body: body.to_vec(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TapeMode {
    Record,
    Replay,
}

/// One recorded exchange, stored as `<key>.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TapeEntry {
    pub key: String,
    pub method: String,
    pub url: String,
    pub status: u16,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub body: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub body_base64: Option<String>,
    pub recorded_at: String,
}

impl TapeEntry {
    pub fn new(request: &HttpRequest, response: &HttpResponse) -> Self {
        let (body, body_base64) = match String::from_utf8(response.body.clone()) {
            Ok(text) => (Some(text), None),
            Err(_) => (None, Some(base64::engine::general_purpose::STANDARD.encode(&response.body))),
        };
        Self {
            key: request.tape_key(),
            method: request.method.clone(),
            url: request.url.clone(),
            status: response.status,
            body,
            body_base64,
            recorded_at: Utc::now().to_rfc3339(),
        }
    }

    pub fn response(&self) -> Result<HttpResponse> {
        let body = match (&self.body, &self.body_base64) {
            (Some(text), _) => text.clone().into_bytes(),
            (None, Some(b64)) => base64::engine::general_purpose::STANDARD
                .decode(b64)
                .map_err(|e| Error::CorruptDocument(format!("tape {}: {e}", self.key)))?,
            (None, None) => Vec::new(),
        };
        Ok(HttpResponse {
            status: self.status,
            body,
        })
    }
}

/// Record/replay wrapper keyed by [`HttpRequest::tape_key`].
pub struct TapeTransport {
    mode: TapeMode,
    dir: Option<PathBuf>,
    inner: Option<Arc<dyn HttpTransport>>,
    entries: RwLock<HashMap<String, TapeEntry>>,
}

impl TapeTransport {
    /// Replays from `dir`; never forwards a request.
    pub fn replay(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        let entries = load_entries(&dir)?;
        Ok(Self {
            mode: TapeMode::Replay,
            dir: Some(dir),
            inner: None,
            entries: RwLock::new(entries),
        })
    }

    /// Forwards to `inner` and writes each exchange into `dir`.
    pub fn record(dir: impl Into<PathBuf>, inner: Arc<dyn HttpTransport>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        let entries = load_entries(&dir)?;
        Ok(Self {
            mode: TapeMode::Record,
            dir: Some(dir),
            inner: Some(inner),
            entries: RwLock::new(entries),
        })
    }

    /// In-memory replay of the given entries.
    pub fn from_entries(entries: impl IntoIterator<Item = TapeEntry>) -> Self {
        Self {
            mode: TapeMode::Replay,
            dir: None,
            inner: None,
            entries: RwLock::new(entries.into_iter().map(|e| (e.key.clone(), e)).collect()),
        }
    }

    pub fn mode(&self) -> TapeMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.entries.read().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn load_entries(dir: &PathBuf) -> Result<HashMap<String, TapeEntry>> {
    let mut entries = HashMap::new();
    if !dir.exists() {
        return Ok(entries);
    }
    for item in fs::read_dir(dir)? {
        let path = item?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("json") {
            continue;
        }
        let entry: TapeEntry = serde_json::from_str(&fs::read_to_string(&path)?)
            .map_err(|e| Error::CorruptDocument(format!("{}: {e}", path.display())))?;
        entries.insert(entry.key.clone(), entry);
    }
    Ok(entries)
}

impl HttpTransport for TapeTransport {
    fn execute(&self, request: &HttpRequest) -> std::result::Result<HttpResponse, TransportError> {
        let key = request.tape_key();
        if self.mode == TapeMode::Replay {
            let entries = self.entries.read();
            let entry = entries.get(&key).ok_or_else(|| TransportError {
                message: format!("no recorded response for {} {} ({key})", request.method, request.url),
                retryable: false,
                fixture_miss: true,
            })?;
            return entry.response().map_err(|e| TransportError {
                message: e.to_string(),
                retryable: false,
                fixture_miss: false,
            });
        }
        let inner = self.inner.as_ref().expect("record mode has an inner transport");
        let response = inner.execute(request)?;
        let entry = TapeEntry::new(request, &response);
        if let Some(dir) = &self.dir {
            let text = serde_json::to_string_pretty(&entry).expect("tape entry serializes");
            let path = dir.join(format!("{key}.json"));
            let tmp = dir.join(format!("{key}.json.tmp"));
            fs::write(&tmp, text)
                .and_then(|_| fs::rename(&tmp, &path))
                .map_err(|e| TransportError {
                    message: format!("writing tape {}: {e}", path.display()),
                    retryable: false,
                    fixture_miss: false,
                })?;
        }
        self.entries.write().insert(key, entry);
        Ok(response)
    }
}

/// Retry schedule for provider calls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetryPolicy {
    pub attempts: u32,
    pub initial_backoff: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            attempts: 3,
            initial_backoff: Duration::from_millis(500),
        }
    }
}

impl RetryPolicy {
    pub fn immediate(attempts: u32) -> Self {
        Self {
            attempts,
            initial_backoff: Duration::ZERO,
        }
    }

    /// Runs `request` until it returns a 2xx, a non-retryable failure, or
    /// the attempts run out. 429 and 5xx count as retryable.
    pub fn execute(&self, transport: &dyn HttpTransport, request: &HttpRequest) -> Result<HttpResponse> {
        let mut backoff = self.initial_backoff;
        let mut last = String::new();
        for attempt in 1..=self.attempts.max(1) {
            let retryable = match transport.execute(request) {
                Ok(resp) if resp.is_success() => return Ok(resp),
                Ok(resp) => {
                    last = format!("{} {} returned {}", request.method, request.url, resp.status);
                    resp.status == 429 || resp.status >= 500
                }
                Err(err) if err.fixture_miss => return Err(Error::FixtureMiss(err.message)),
                Err(err) => {
                    last = err.message;
                    err.retryable
                }
            };
            if !retryable || attempt == self.attempts {
                break;
            }
            if !backoff.is_zero() {
                std::thread::sleep(backoff);
            }
            backoff *= 2;
        }
        Err(Error::ProviderUnavailable(last))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use parking_lot::Mutex;

    struct Flaky {
        statuses: Mutex<Vec<u16>>,
        calls: Mutex<u32>,
    }

    impl HttpTransport for Flaky {
        fn execute(&self, _: &HttpRequest) -> std::result::Result<HttpResponse, TransportError> {
            *self.calls.lock() += 1;
            let status = self.statuses.lock().remove(0);
            Ok(HttpResponse {
                status,
                body: b"ok".to_vec(),
            })
        }
    }

    #[test]
    fn retries_server_errors_then_succeeds() {
        let t = Flaky {
            statuses: Mutex::new(vec![503, 500, 200]),
            calls: Mutex::new(0),
        };
        let resp = RetryPolicy::immediate(3).execute(&t, &HttpRequest::get("http://x")).unwrap();
        assert_eq!(resp.status, 200);
        assert_eq!(*t.calls.lock(), 3);
    }

    #[test]
    fn gives_up_after_three_attempts() {
        let t = Flaky {
            statuses: Mutex::new(vec![503, 503, 503, 200]),
            calls: Mutex::new(0),
        };
        let err = RetryPolicy::immediate(3).execute(&t, &HttpRequest::get("http://x")).unwrap_err();
        assert_eq!(err.code(), "ProviderUnavailable");
        assert_eq!(*t.calls.lock(), 3);
    }

    #[test]
    fn client_errors_are_not_retried() {
        let t = Flaky {
            statuses: Mutex::new(vec![404, 200]),
            calls: Mutex::new(0),
        };
        assert!(RetryPolicy::immediate(3).execute(&t, &HttpRequest::get("http://x")).is_err());
        assert_eq!(*t.calls.lock(), 1);
    }

    #[test]
    fn record_then_replay_binary_body() {
        struct Pdf;
        impl HttpTransport for Pdf {
            fn execute(&self, _: &HttpRequest) -> std::result::Result<HttpResponse, TransportError> {
                Ok(HttpResponse {
                    status: 200,
                    body: vec![0x25, 0x50, 0xff, 0xfe],
                })
            }
        }
        let dir = tempfile::tempdir().unwrap();
        let req = HttpRequest::get("http://example.org/a.pdf").header("x-api-key", "secret");
        let recorder = TapeTransport::record(dir.path(), Arc::new(Pdf)).unwrap();
        let live = recorder.execute(&req).unwrap();
        let replay = TapeTransport::replay(dir.path()).unwrap();
        assert_eq!(replay.execute(&req).unwrap(), live);
        let on_disk = fs::read_to_string(dir.path().join(format!("{}.json", req.tape_key()))).unwrap();
        assert!(!on_disk.contains("secret"));
        let miss = replay.execute(&HttpRequest::get("http://example.org/b.pdf")).unwrap_err();
        assert!(miss.fixture_miss);
    }
}

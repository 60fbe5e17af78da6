//! HTTP backend for hosted language models.

use std::time::Duration;

use serde_json::{json, Value};

use super::{TranslateError, TranslationBackend, TranslationBackendSpec};

pub const API_KEY_ENV: &str = "BANGLA_AI_API_KEY";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpReply {
    pub status: u16,
    pub body: String,
}

/// Sends one JSON POST. `Err` means the request never got a response.
pub trait Transport: Send + Sync {
    fn post_json(&self, url: &str, body: &Value, bearer: Option<&str>, timeout: Duration) -> Result<HttpReply, String>;
}

#[derive(Debug, Default)]
pub struct ReqwestTransport {
    client: std::sync::OnceLock<reqwest::blocking::Client>,
}

impl Transport for ReqwestTransport {
    fn post_json(&self, url: &str, body: &Value, bearer: Option<&str>, timeout: Duration) -> Result<HttpReply, String> {
        let client = self.client.get_or_init(reqwest::blocking::Client::new);
        let mut req = client.post(url).timeout(timeout).json(body);
        if let Some(token) = bearer {
            req = req.bearer_auth(token);
        }
        let resp = req.send().map_err(|e| e.without_url().to_string())?;
        let status = resp.status().as_u16();
        let body = resp.text().map_err(|e| e.to_string())?;
        Ok(HttpReply { status, body })
    }
}

/// One request per chunk: `{"model": model_name, "prompt": rendered}`.
///
/// Transport failures, 429 and 5xx replies are retried up to `max_retries`
/// times; other non-success replies fail immediately.
pub struct RemoteBackend<T: Transport = ReqwestTransport> {
    spec: TranslationBackendSpec,
    api_key: Option<String>,
    transport: T,
    backoff: Duration,
}

impl<T: Transport> std::fmt::Debug for RemoteBackend<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RemoteBackend")
            .field("id", &self.spec.id)
            .field("endpoint", &self.spec.endpoint)
            .field("api_key", &self.api_key.as_ref().map(|_| "<redacted>"))
            .finish()
    }
}

impl RemoteBackend<ReqwestTransport> {
    /// Reads the bearer token from `BANGLA_AI_API_KEY` when set.
    pub fn from_env(spec: TranslationBackendSpec) -> Result<Self, TranslateError> {
        let key = std::env::var(API_KEY_ENV).ok().filter(|k| !k.is_empty());
        Self::new(spec, key, ReqwestTransport::default())
    }
}

impl<T: Transport> RemoteBackend<T> {
    pub fn new(spec: TranslationBackendSpec, api_key: Option<String>, transport: T) -> Result<Self, TranslateError> {
        spec.validate()?;
        if spec.endpoint.is_none() {
            return Err(TranslateError::InvalidBackend(format!("{}: remote backend needs an endpoint", spec.id)));
        }
        Ok(Self {
            spec,
            api_key,
            transport,
            backoff: Duration::from_millis(250),
        })
    }

    /// Base delay before retry `k` is `backoff * 2^k`.
    pub fn with_backoff(mut self, backoff: Duration) -> Self {
        self.backoff = backoff;
        self
    }

    pub fn transport(&self) -> &T {
        &self.transport
    }

    fn extract(&self, body: &str) -> Result<String, TranslateError> {
        let refusal = || TranslateError::BackendRefusal {
            status: 200,
            body: body.to_owned(),
        };
        let value: Value = serde_json::from_str(body).map_err(|_| refusal())?;
        let path = self.spec.response_path.as_deref().unwrap_or("text");
        let mut cur = &value;
        for seg in path.split('.') {
            cur = match seg.parse::<usize>() {
                Ok(i) => cur.get(i),
                Err(_) => cur.get(seg),
            }
            .ok_or_else(refusal)?;
        }
        cur.as_str().map(str::to_owned).ok_or_else(refusal)
    }
}

impl<T: Transport> TranslationBackend for RemoteBackend<T> {
    fn id(&self) -> &str {
        &self.spec.id
    }

    fn translate_chunk(&self, chunk: &str) -> Result<String, TranslateError> {
        let endpoint = self.spec.endpoint.as_deref().expect("checked in new");
        let body = json!({
            "model": self.spec.model_name.clone().unwrap_or_default(),
            "prompt": self.spec.render_prompt(chunk),
        });
        let timeout = Duration::from_millis(self.spec.timeout_ms);
        let attempts = self.spec.max_retries as usize + 1;
        let mut last_reason = String::new();
        for attempt in 0..attempts {
            if attempt > 0 && !self.backoff.is_zero() {
                std::thread::sleep(self.backoff * (1 << (attempt - 1).min(6)));
            }
            match self.transport.post_json(endpoint, &body, self.api_key.as_deref(), timeout) {
                Err(reason) => {
                    tracing::warn!(backend = %self.spec.id, attempt, %reason, "translation request failed");
                    last_reason = reason;
                }
                Ok(reply) if (200..300).contains(&reply.status) => return self.extract(&reply.body),
                Ok(reply) if reply.status == 429 || reply.status >= 500 => {
                    tracing::warn!(backend = %self.spec.id, attempt, status = reply.status, "retryable reply");
                    last_reason = format!("HTTP {}: {}", reply.status, reply.body);
                }
                Ok(reply) => {
                    return Err(TranslateError::BackendRefusal {
                        status: reply.status,
                        body: reply.body,
                    })
                }
            }
        }
        Err(TranslateError::BackendUnavailable {
            attempts,
            reason: last_reason,
        })
    }
}

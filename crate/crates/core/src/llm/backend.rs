use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::cassette::{prompt_sha256, Cassette};
use crate::error::{Error, Result};

/// Environment variable that overrides the HTTP endpoint from any config.
pub const ENDPOINT_ENV: &str = "CASCADE_LLM_ENDPOINT";

pub struct CompletionRequest<'a> {
    pub prompt: &'a str,
    pub max_tokens: u32,
    pub temperature: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Completion {
    pub text: String,
    /// Latency reported by the backend itself (recorded or simulated). When
    /// absent the gateway measures the call.
    pub latency: Option<Duration>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BackendError {
    /// Worth retrying: timeouts, connection failures, 5xx, 429.
    #[error("{0}")]
    Transient(String),
    /// Retrying cannot help: bad request, missing cassette entry, bad response shape.
    #[error("{0}")]
    Permanent(String),
}

pub trait CompletionBackend: Send + Sync {
    fn complete(&self, request: &CompletionRequest<'_>) -> Result<Completion, BackendError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Mock,
    Replay,
    Http,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BackendConfig {
    pub kind: BackendKind,
    /// Completions endpoint (http only).
    pub endpoint: Option<String>,
    pub model: String,
    /// Where the generated text sits in the JSON response.
    pub response_path: String,
    pub max_tokens: u32,
    pub temperature: f64,
    pub timeout_s: f64,
    pub max_retries: u32,
    pub retry_backoff_ms: u64,
    pub max_concurrent: usize,
    /// Cassette file (replay only).
    pub cassette: Option<PathBuf>,
    /// Fixed completion returned by the mock backend.
    pub mock_completion: String,
}

impl Default for BackendConfig {
    fn default() -> Self {
        Self {
            kind: BackendKind::Mock,
            endpoint: None,
            model: "bloom-7b1".into(),
            response_path: "choices[0].text".into(),
            max_tokens: 2048,
            temperature: 1.0,
            timeout_s: 60.0,
            max_retries: 3,
            retry_backoff_ms: 250,
            max_concurrent: 4,
            cassette: None,
            mock_completion: " negative.".into(),
        }
    }
}

impl BackendConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_concurrent < 1 {
            return Err(Error::Config("max_concurrent must be at least 1".into()));
        }
        if !(self.temperature >= 0.0) {
            return Err(Error::Config("temperature must be non-negative".into()));
        }
        if !(self.timeout_s > 0.0) {
            return Err(Error::Config("timeout must be positive".into()));
        }
        Ok(())
    }

    /// Endpoint after applying the environment override.
    pub fn effective_endpoint(&self) -> Option<String> {
        std::env::var(ENDPOINT_ENV)
            .ok()
            .filter(|s| !s.is_empty())
            .or_else(|| self.endpoint.clone())
    }

    pub fn build(&self) -> Result<Arc<dyn CompletionBackend>> {
        self.validate()?;
        Ok(match self.kind {
            BackendKind::Mock => Arc::new(MockBackend::new(self.mock_completion.clone())),
            BackendKind::Replay => {
                let path = self
                    .cassette
                    .as_ref()
                    .ok_or_else(|| Error::Config("replay backend needs a cassette path".into()))?;
                Arc::new(ReplayBackend::new(Cassette::load(path)?))
            }
            BackendKind::Http => {
                let endpoint = self
                    .effective_endpoint()
                    .ok_or_else(|| Error::Config("http backend needs an endpoint".into()))?;
                Arc::new(HttpBackend::new(
                    endpoint,
                    self.model.clone(),
                    &self.response_path,
                    Duration::from_secs_f64(self.timeout_s),
                )?)
            }
        })
    }
}

/// Answers every prompt with the same text, reporting zero latency.
#[derive(Debug, Clone)]
pub struct MockBackend {
    completion: String,
}

impl MockBackend {
    pub fn new(completion: impl Into<String>) -> Self {
        Self {
            completion: completion.into(),
        }
    }
}

impl CompletionBackend for MockBackend {
    fn complete(&self, _request: &CompletionRequest<'_>) -> Result<Completion, BackendError> {
        Ok(Completion {
            text: self.completion.clone(),
            latency: Some(Duration::ZERO),
        })
    }
}

/// Looks prompts up by SHA-256 in a cassette.
#[derive(Debug, Clone)]
pub struct ReplayBackend {
    cassette: Cassette,
}

impl ReplayBackend {
    pub fn new(cassette: Cassette) -> Self {
        Self { cassette }
    }
}

impl CompletionBackend for ReplayBackend {
    fn complete(&self, request: &CompletionRequest<'_>) -> Result<Completion, BackendError> {
        let hash = prompt_sha256(request.prompt);
        let entry = self.cassette.get(&hash).ok_or_else(|| {
            BackendError::Permanent(format!("no cassette entry for prompt {hash}"))
        })?;
        Ok(Completion {
            text: entry.completion.clone(),
            latency: Some(Duration::from_secs_f64(entry.latency_s.unwrap_or(0.0))),
        })
    }
}

/// JSON-over-HTTP completions endpoint: POSTs
/// `{model, prompt, max_tokens, temperature}` and reads the text at a
/// configurable path such as `choices[0].text`.
pub struct HttpBackend {
    client: reqwest::blocking::Client,
    endpoint: String,
    model: String,
    path: Vec<PathSegment>,
}

impl HttpBackend {
    pub fn new(
        endpoint: String,
        model: String,
        response_path: &str,
        timeout: Duration,
    ) -> Result<Self> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| Error::Config(format!("http client: {e}")))?;
        Ok(Self {
            client,
            endpoint,
            model,
            path: parse_path(response_path)?,
        })
    }
}

impl CompletionBackend for HttpBackend {
    fn complete(&self, request: &CompletionRequest<'_>) -> Result<Completion, BackendError> {
        let body = serde_json::json!({
            "model": self.model,
            "prompt": request.prompt,
            "max_tokens": request.max_tokens,
            "temperature": request.temperature,
        });
        let resp = self
            .client
            .post(&self.endpoint)
            .header("content-type", "application/json")
            .body(body.to_string())
            .send()
            .map_err(|e| BackendError::Transient(format!("request failed: {e}")))?;
        let status = resp.status();
        let text = resp
            .text()
            .map_err(|e| BackendError::Transient(format!("reading response: {e}")))?;
        if status.is_server_error() || status.as_u16() == 429 {
            return Err(BackendError::Transient(format!("HTTP {status}")));
        }
        if !status.is_success() {
            return Err(BackendError::Permanent(format!("HTTP {status}: {text}")));
        }
        let value: Value = serde_json::from_str(&text)
            .map_err(|e| BackendError::Permanent(format!("response is not JSON: {e}")))?;
        let text = lookup(&value, &self.path)
            .and_then(Value::as_str)
            .ok_or_else(|| {
                BackendError::Permanent("completion text not found in response".into())
            })?;
        Ok(Completion {
            text: text.to_string(),
            latency: None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
enum PathSegment {
    Key(String),
    Index(usize),
}

fn parse_path(path: &str) -> Result<Vec<PathSegment>> {
    let bad = || Error::Config(format!("invalid response path `{path}`"));
    let mut out = Vec::new();
    for part in path.split('.') {
        let (key, mut rest) = match part.find('[') {
            Some(i) => part.split_at(i),
            None => (part, ""),
        };
        if key.is_empty() && out.is_empty() && rest.is_empty() {
            return Err(bad());
        }
        if !key.is_empty() {
            out.push(PathSegment::Key(key.to_string()));
        }
        while !rest.is_empty() {
            let close = rest.find(']').ok_or_else(bad)?;
            let idx = rest[1..close].parse().map_err(|_| bad())?;
            out.push(PathSegment::Index(idx));
            rest = &rest[close + 1..];
            if !rest.is_empty() && !rest.starts_with('[') {
                return Err(bad());
            }
        }
    }
    Ok(out)
}

fn lookup<'a>(value: &'a Value, path: &[PathSegment]) -> Option<&'a Value> {
    path.iter().try_fold(value, |v, seg| match seg {
        PathSegment::Key(k) => v.get(k),
        PathSegment::Index(i) => v.get(i),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn response_paths() {
        let v: Value = serde_json::json!({"choices": [{"text": "pos"}], "out": {"a": [[1, "x"]]}});
        let p = parse_path("choices[0].text").unwrap();
        assert_eq!(lookup(&v, &p).unwrap(), "pos");
        let p = parse_path("out.a[0][1]").unwrap();
        assert_eq!(lookup(&v, &p).unwrap(), "x");
        assert!(lookup(&v, &parse_path("choices[3].text").unwrap()).is_none());
        assert!(parse_path("choices[x]").is_err());
        assert!(parse_path("a[0]b").is_err());
    }

    #[test]
    fn config_validation() {
        let mut cfg = BackendConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.max_concurrent = 0;
        assert!(cfg.validate().is_err());
        let cfg = BackendConfig {
            kind: BackendKind::Replay,
            ..BackendConfig::default()
        };
        assert!(cfg.build().is_err());
    }

    #[test]
    fn mock_is_constant() {
        let b = MockBackend::new("negative");
        let req = CompletionRequest {
            prompt: "anything",
            max_tokens: 4,
            temperature: 0.0,
        };
        assert_eq!(b.complete(&req).unwrap().text, "negative");
    }
}

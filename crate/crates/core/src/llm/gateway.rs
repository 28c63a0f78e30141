use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::backend::{BackendConfig, BackendError, CompletionBackend, CompletionRequest};
use crate::error::Result;

/// Completion characters inspected when looking for a class name.
pub const PARSE_WINDOW: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmVerdict {
    pub id: String,
    pub raw_completion: String,
    /// `None` means UNPARSED.
    pub parsed_label: Option<usize>,
    pub latency_s: f64,
    pub attempts: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl LlmVerdict {
    pub fn is_parsed(&self) -> bool {
        self.parsed_label.is_some()
    }

    /// Verdict for a request that never reached the backend.
    pub fn unsent(id: impl Into<String>, note: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            raw_completion: String::new(),
            parsed_label: None,
            latency_s: 0.0,
            attempts: 0,
            error: Some(note.into()),
        }
    }
}

/// Earliest class name occurring (case-insensitively) at a position among
/// the first [`PARSE_WINDOW`] characters of `completion`. When two names
/// start at the same position the longer one wins.
pub fn parse_label<S: AsRef<str>>(completion: &str, classes: &[S]) -> Option<usize> {
    // Lowercase char by char, remembering which source char each came from.
    let mut lowered: Vec<char> = Vec::new();
    let mut origin: Vec<usize> = Vec::new();
    for (pos, ch) in completion.chars().enumerate() {
        for lc in ch.to_lowercase() {
            lowered.push(lc);
            origin.push(pos);
        }
    }
    let names: Vec<Vec<char>> = classes
        .iter()
        .map(|c| c.as_ref().chars().flat_map(char::to_lowercase).collect())
        .collect();

    for start in 0..lowered.len() {
        if origin[start] >= PARSE_WINDOW {
            break;
        }
        // (name length, class index) of the longest name starting here
        let mut best: Option<(usize, usize)> = None;
        for (c, name) in names.iter().enumerate() {
            let end = start + name.len();
            if name.is_empty() || end > lowered.len() || lowered[start..end] != name[..] {
                continue;
            }
            if best.is_none_or(|(len, _)| name.len() > len) {
                best = Some((name.len(), c));
            }
        }
        if let Some((_, c)) = best {
            return Some(c);
        }
    }
    None
}

#[derive(Debug, Clone)]
pub struct BatchOutcome {
    pub verdicts: Vec<LlmVerdict>,
    /// Measured wall time of the whole batch, including waits.
    pub wall_seconds: f64,
}

/// Sends prompts to a completion backend with retries and bounded
/// parallelism.
#[derive(Clone)]
pub struct Gateway {
    backend: Arc<dyn CompletionBackend>,
    max_tokens: u32,
    temperature: f64,
    max_retries: u32,
    backoff: Duration,
    max_concurrent: usize,
}

impl std::fmt::Debug for Gateway {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Gateway")
            .field("max_retries", &self.max_retries)
            .field("max_concurrent", &self.max_concurrent)
            .finish_non_exhaustive()
    }
}

impl Gateway {
    pub fn from_config(config: &BackendConfig) -> Result<Self> {
        let backend = config.build()?;
        Ok(Self::with_backend(config, backend))
    }

    /// Use `backend` with the retry, concurrency and sampling settings of
    /// `config`; its `kind` is ignored.
    pub fn with_backend(config: &BackendConfig, backend: Arc<dyn CompletionBackend>) -> Self {
        Self {
            backend,
            max_tokens: config.max_tokens,
            temperature: config.temperature,
            max_retries: config.max_retries,
            backoff: Duration::from_millis(config.retry_backoff_ms),
            max_concurrent: config.max_concurrent.max(1),
        }
    }

    pub fn max_concurrent(&self) -> usize {
        self.max_concurrent
    }

    pub fn classify<S: AsRef<str>>(&self, id: &str, prompt: &str, classes: &[S]) -> LlmVerdict {
        let request = CompletionRequest {
            prompt,
            max_tokens: self.max_tokens,
            temperature: self.temperature,
        };
        let mut latency = Duration::ZERO;
        let mut attempts = 0;
        loop {
            attempts += 1;
            let started = Instant::now();
            let result = self.backend.complete(&request);
            let elapsed = started.elapsed();
            match result {
                Ok(completion) => {
                    latency += completion.latency.unwrap_or(elapsed);
                    return LlmVerdict {
                        id: id.to_string(),
                        parsed_label: parse_label(&completion.text, classes),
                        raw_completion: completion.text,
                        latency_s: latency.as_secs_f64(),
                        attempts,
                        error: None,
                    };
                }
                Err(err) => {
                    latency += elapsed;
                    let retry =
                        matches!(err, BackendError::Transient(_)) && attempts <= self.max_retries;
                    if !retry {
                        log::debug!("document {id}: giving up after {attempts} attempts: {err}");
                        return LlmVerdict {
                            id: id.to_string(),
                            raw_completion: String::new(),
                            parsed_label: None,
                            latency_s: latency.as_secs_f64(),
                            attempts,
                            error: Some(err.to_string()),
                        };
                    }
                    if !self.backoff.is_zero() {
                        thread::sleep(self.backoff * 2u32.saturating_pow(attempts - 1));
                    }
                }
            }
        }
    }

    /// Classify `(id, prompt)` pairs with at most `max_concurrent` requests
    /// in flight. `verdicts[i]` always answers `items[i]`.
    pub fn classify_batch<S: AsRef<str> + Sync>(
        &self,
        items: &[(String, String)],
        classes: &[S],
    ) -> BatchOutcome {
        let started = Instant::now();
        let slots: Vec<Mutex<Option<LlmVerdict>>> =
            items.iter().map(|_| Mutex::new(None)).collect();
        let next = AtomicUsize::new(0);
        let workers = self.max_concurrent.min(items.len());
        thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    let Some((id, prompt)) = items.get(i) else {
                        break;
                    };
                    let verdict = self.classify(id, prompt, classes);
                    *slots[i].lock().expect("slot lock") = Some(verdict);
                });
            }
        });
        let verdicts = slots
            .into_iter()
            .map(|s| {
                s.into_inner()
                    .expect("slot lock")
                    .expect("every slot filled")
            })
            .collect();
        BatchOutcome {
            verdicts,
            wall_seconds: started.elapsed().as_secs_f64(),
        }
    }
}

/// Completion time of `latencies` dispatched in order onto `workers` slots,
/// each job taking the first slot to free up.
pub fn makespan(latencies: &[f64], workers: usize) -> f64 {
    let mut free_at = vec![0.0f64; workers.max(1)];
    for &l in latencies {
        let slot = free_at
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .expect("at least one worker");
        free_at[slot] += l;
    }
    free_at.into_iter().fold(0.0, f64::max)
}

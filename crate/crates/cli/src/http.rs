//! OpenAI-compatible chat and embedding clients.

use std::sync::{Condvar, Mutex};
use std::time::Duration;

use drq_core::analysis::{EmbedError, Embedder};
use drq_core::mutation::{ChatClientSpec, ChatRequest, ChatTransport, TransportError};
use serde::Deserialize;
use serde_json::json;

/// Counting semaphore bounding concurrent requests.
pub struct InFlight {
    limit: usize,
    busy: Mutex<usize>,
    freed: Condvar,
}

pub struct Permit<'a>(&'a InFlight);

impl InFlight {
    pub fn new(limit: usize) -> Self {
        InFlight { limit: limit.max(1), busy: Mutex::new(0), freed: Condvar::new() }
    }

    pub fn acquire(&self) -> Permit<'_> {
        let mut busy = self.busy.lock().unwrap_or_else(|e| e.into_inner());
        while *busy >= self.limit {
            busy = self.freed.wait(busy).unwrap_or_else(|e| e.into_inner());
        }
        *busy += 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.busy.lock().unwrap_or_else(|e| e.into_inner()) -= 1;
        self.0.freed.notify_one();
    }
}

/// `endpoint` may be a base URL or already end in `path`.
pub fn join_url(endpoint: &str, path: &str) -> String {
    let trimmed = endpoint.trim_end_matches('/');
    if trimmed.ends_with(path) {
        trimmed.to_string()
    } else {
        format!("{trimmed}/{path}")
    }
}

fn agent(timeout_secs: f64) -> ureq::Agent {
    ureq::Agent::config_builder()
        .timeout_global(Some(Duration::from_secs_f64(timeout_secs)))
        .http_status_as_error(false)
        .build()
        .into()
}

fn post(
    agent: &ureq::Agent,
    url: &str,
    key: Option<&str>,
    body: serde_json::Value,
) -> Result<serde_json::Value, String> {
    let mut req = agent.post(url).header("Content-Type", "application/json");
    if let Some(key) = key {
        req = req.header("Authorization", format!("Bearer {key}"));
    }
    let mut resp = req.send_json(body).map_err(|e| format!("{url}: {e}"))?;
    let status = resp.status();
    let text = resp.body_mut().read_to_string().map_err(|e| format!("{url}: {e}"))?;
    if !status.is_success() {
        let snippet: String = text.chars().take(200).collect();
        return Err(format!("{url}: HTTP {}: {snippet}", status.as_u16()));
    }
    serde_json::from_str(&text).map_err(|e| format!("{url}: malformed response: {e}"))
}

pub struct HttpChat {
    agent: ureq::Agent,
    in_flight: InFlight,
}

impl HttpChat {
    pub fn new(spec: &ChatClientSpec) -> Self {
        HttpChat { agent: agent(spec.timeout_secs), in_flight: InFlight::new(spec.max_in_flight) }
    }
}

#[derive(Deserialize)]
struct ChatReply {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ReplyMessage,
}

#[derive(Deserialize)]
struct ReplyMessage {
    #[serde(default)]
    content: Option<String>,
}

impl ChatTransport for HttpChat {
    fn complete(&self, spec: &ChatClientSpec, req: &ChatRequest) -> Result<String, TransportError> {
        let _permit = self.in_flight.acquire();
        let url = join_url(&spec.endpoint, "chat/completions");
        let body = json!({
            "model": req.model,
            "messages": req.messages,
            "temperature": req.temperature,
            "seed": req.seed,
        });
        let value = post(&self.agent, &url, spec.api_key.as_deref(), body).map_err(TransportError)?;
        let reply: ChatReply =
            serde_json::from_value(value).map_err(|e| TransportError(format!("{url}: unexpected reply: {e}")))?;
        reply
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or_else(|| TransportError(format!("{url}: reply has no message content")))
    }
}

pub struct HttpEmbedder {
    agent: ureq::Agent,
    in_flight: InFlight,
    spec: ChatClientSpec,
    batch: usize,
}

impl HttpEmbedder {
    pub fn new(spec: ChatClientSpec) -> Self {
        HttpEmbedder { agent: agent(spec.timeout_secs), in_flight: InFlight::new(spec.max_in_flight), spec, batch: 64 }
    }

    fn embed_batch(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, String> {
        let _permit = self.in_flight.acquire();
        let url = join_url(&self.spec.endpoint, "embeddings");
        let body = json!({ "model": self.spec.model, "input": texts });
        let mut last = String::new();
        for _ in 0..=self.spec.max_retries {
            match post(&self.agent, &url, self.spec.api_key.as_deref(), body.clone()) {
                Ok(value) => return parse_embeddings(value, texts.len()).map_err(|e| format!("{url}: {e}")),
                Err(e) => last = e,
            }
        }
        Err(last)
    }
}

#[derive(Deserialize)]
struct EmbeddingReply {
    data: Vec<EmbeddingItem>,
}

#[derive(Deserialize)]
struct EmbeddingItem {
    #[serde(default)]
    index: Option<usize>,
    embedding: Vec<f64>,
}

fn parse_embeddings(value: serde_json::Value, expected: usize) -> Result<Vec<Vec<f64>>, String> {
    let reply: EmbeddingReply = serde_json::from_value(value).map_err(|e| format!("unexpected reply: {e}"))?;
    let mut items: Vec<(usize, Vec<f64>)> =
        reply.data.into_iter().enumerate().map(|(i, item)| (item.index.unwrap_or(i), item.embedding)).collect();
    items.sort_by_key(|(i, _)| *i);
    if items.len() != expected || items.iter().enumerate().any(|(k, (i, _))| k != *i) {
        return Err(format!("expected {expected} embeddings indexed 0..{expected}"));
    }
    Ok(items.into_iter().map(|(_, v)| v).collect())
}

impl Embedder for HttpEmbedder {
    fn id(&self) -> String {
        format!("remote:{}", self.spec.model)
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, EmbedError> {
        let mut out = Vec::with_capacity(texts.len());
        for chunk in texts.chunks(self.batch) {
            out.extend(self.embed_batch(chunk).map_err(EmbedError::Unavailable)?);
        }
        Ok(out)
    }
}

//! Client for an embedding service speaking
//! `POST /embed {"texts": [...]}` -> `{"embeddings": [[...], ...]}`.

use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{build_query_text, EmbeddingStore, EntryKind, SemanticError};
use crate::align::{HypothesisSet, Keyword};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);
pub const DEFAULT_RETRIES: u32 = 2;
pub const DEFAULT_BATCH_SIZE: usize = 64;

#[derive(Serialize)]
struct EmbedRequest<'a> {
    texts: &'a [String],
}

#[derive(Deserialize)]
struct EmbedResponse {
    embeddings: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct EmbeddingClient {
    endpoint: String,
    retries: u32,
    http: reqwest::blocking::Client,
}

impl EmbeddingClient {
    /// `base_url` is the server root; requests go to `<base_url>/embed`.
    pub fn new(base_url: &str, timeout: Duration, retries: u32) -> Result<Self, SemanticError> {
        let http = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| SemanticError::Service(e.to_string()))?;
        Ok(Self {
            endpoint: format!("{}/embed", base_url.trim_end_matches('/')),
            retries,
            http,
        })
    }

    pub fn with_defaults(base_url: &str) -> Result<Self, SemanticError> {
        Self::new(base_url, DEFAULT_TIMEOUT, DEFAULT_RETRIES)
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    pub fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, SemanticError> {
        let mut attempt = 0;
        loop {
            match self.embed_once(texts) {
                Ok(v) => return Ok(v),
                Err(Attempt::Fatal(e)) => return Err(e),
                Err(Attempt::Retryable(e)) if attempt >= self.retries => return Err(e),
                Err(Attempt::Retryable(e)) => {
                    attempt += 1;
                    log::warn!("embedding request failed ({e}); retry {attempt}/{}", self.retries);
                    thread::sleep(Duration::from_millis(200 * u64::from(attempt)));
                }
            }
        }
    }

    fn embed_once(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, Attempt> {
        let service = |msg: String| SemanticError::Service(msg);
        let resp = self
            .http
            .post(&self.endpoint)
            .json(&EmbedRequest { texts })
            .send()
            .map_err(|e| Attempt::Retryable(service(e.to_string())))?;
        let status = resp.status();
        if status.is_server_error() {
            return Err(Attempt::Retryable(service(format!("HTTP {status}"))));
        }
        if !status.is_success() {
            return Err(Attempt::Fatal(service(format!("HTTP {status}"))));
        }
        let body: EmbedResponse = resp
            .json()
            .map_err(|e| Attempt::Fatal(service(format!("bad response body: {e}"))))?;
        if body.embeddings.len() != texts.len() {
            return Err(Attempt::Fatal(service(format!(
                "expected {} embeddings, got {}",
                texts.len(),
                body.embeddings.len()
            ))));
        }
        Ok(body.embeddings)
    }
}

enum Attempt {
    Retryable(SemanticError),
    Fatal(SemanticError),
}

/// Embeds every keyword (raw text) and every utterance query
/// ([`build_query_text`]) and assembles a store equivalent to the JSONL file
/// an offline exporter would produce.
pub fn fetch_store<'a>(
    client: &EmbeddingClient,
    keywords: impl IntoIterator<Item = &'a Keyword>,
    utterances: impl IntoIterator<Item = &'a HypothesisSet>,
    batch_size: usize,
) -> Result<EmbeddingStore, SemanticError> {
    let batch_size = batch_size.max(1);
    let mut entries: Vec<(EntryKind, String, String)> = Vec::new();
    for w in keywords {
        entries.push((EntryKind::Keyword, w.text().to_owned(), w.text().to_owned()));
    }
    for q in utterances {
        entries.push((EntryKind::Query, q.utterance_id().to_owned(), build_query_text(q)));
    }

    let mut store = EmbeddingStore::default();
    for (batch_no, batch) in entries.chunks(batch_size).enumerate() {
        let texts: Vec<String> = batch.iter().map(|(_, _, text)| text.clone()).collect();
        let vectors = client.embed(&texts)?;
        for (offset, ((kind, key, _), values)) in batch.iter().zip(vectors).enumerate() {
            store
                .insert(*kind, key.clone(), values)
                .map_err(|message| SemanticError::Record {
                    source_name: client.endpoint().to_owned(),
                    record: batch_no * batch_size + offset + 1,
                    message,
                })?;
        }
    }
    Ok(store)
}

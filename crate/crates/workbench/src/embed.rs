//! Client for an external embedding service.
//!
//! Protocol: `POST {"texts": [...]}` answered by
//! `{"embeddings": [[...], ...]}`, one vector per text, same order.

use std::time::Duration;

use serde::Deserialize;

use crate::error::{Error, Result};

/// Environment variable consulted when no endpoint flag is given.
pub const ENDPOINT_ENV: &str = "MUPO_EMBED_ENDPOINT";

#[derive(Deserialize)]
struct EmbedResponse {
    embeddings: Vec<Vec<serde_json::Value>>,
}

#[derive(Debug, Clone)]
pub struct EmbedClient {
    endpoint: String,
    retries: u32,
    backoff: Duration,
    agent: ureq::Agent,
}

impl EmbedClient {
    /// Three retries, 500 ms base backoff, 30 s per-request timeout.
    pub fn new(endpoint: impl Into<String>) -> Self {
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(30)))
            .build()
            .new_agent();
        Self {
            endpoint: endpoint.into(),
            retries: 3,
            backoff: Duration::from_millis(500),
            agent,
        }
    }

    /// The flag value if given, else [`ENDPOINT_ENV`].
    pub fn from_flag_or_env(flag: Option<&str>) -> Option<Self> {
        flag.map(str::to_string)
            .or_else(|| std::env::var(ENDPOINT_ENV).ok().filter(|s| !s.is_empty()))
            .map(Self::new)
    }

    pub fn with_retries(mut self, retries: u32, backoff: Duration) -> Self {
        self.retries = retries;
        self.backoff = backoff;
        self
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    /// Embeds `texts`, normalizing each vector on receipt.
    ///
    /// Transport failures and 408/429/5xx answers are retried with
    /// exponential backoff; any other non-2xx status fails immediately.
    pub fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>> {
        if texts.is_empty() {
            return Ok(Vec::new());
        }
        let body = serde_json::to_string(&serde_json::json!({ "texts": texts }))?;
        let mut attempt = 0;
        let text = loop {
            match self.post(&body) {
                Ok(text) => break text,
                Err(err) if attempt < self.retries && transient(&err) => {
                    std::thread::sleep(self.backoff * 2u32.pow(attempt));
                    attempt += 1;
                }
                Err(err) => return Err(err),
            }
        };
        decode(&text, texts.len())
    }

    fn post(&self, body: &str) -> Result<String> {
        let mut resp = self
            .agent
            .post(&self.endpoint)
            .header("Content-Type", "application/json")
            .send(body)
            .map_err(|e| Error::Transport(e.to_string()))?;
        let status = resp.status().as_u16();
        if !(200..300).contains(&status) {
            return Err(Error::HttpStatus { status });
        }
        resp.body_mut()
            .read_to_string()
            .map_err(|e| Error::Transport(e.to_string()))
    }
}

fn transient(err: &Error) -> bool {
    match err {
        Error::Transport(_) => true,
        Error::HttpStatus { status } => *status == 408 || *status == 429 || *status >= 500,
        _ => false,
    }
}

fn decode(text: &str, sent: usize) -> Result<Vec<Vec<f64>>> {
    let parsed: EmbedResponse = match serde_json::from_str(text) {
        Ok(p) => p,
        // bare NaN / Infinity tokens are not JSON but some services emit them
        Err(_) if text.contains("NaN") || text.contains("Infinity") => {
            return Err(Error::NonFiniteEmbedding { index: 0 })
        }
        Err(e) => return Err(Error::BadResponse(e.to_string())),
    };
    if parsed.embeddings.len() != sent {
        return Err(Error::CountMismatch {
            sent,
            received: parsed.embeddings.len(),
        });
    }
    parsed
        .embeddings
        .iter()
        .enumerate()
        .map(|(index, row)| {
            let v: Vec<f64> = row
                .iter()
                .map(|x| x.as_f64().filter(|f| f.is_finite()))
                .collect::<Option<_>>()
                .ok_or(Error::NonFiniteEmbedding { index })?;
            Ok(mupo_core::normalize(&v)?)
        })
        .collect()
}

/// One-shot [`EmbedClient::embed`] with default retry settings.
pub fn fetch_embeddings(texts: &[String], endpoint: &str) -> Result<Vec<Vec<f64>>> {
    EmbedClient::new(endpoint).embed(texts)
}

//! Line-delimited JSON rollouts.
//!
//! One object per line:
//!
//! ```json
//! {"example_id": "q1", "response": "<think>...</think> 42", "correct": true}
//! ```
//!
//! `reasoning`, `embedding` and `well_formed` are optional. Records are
//! grouped by `example_id` in order of first appearance, and a record's
//! `rollout_id` is its position inside its example.

use std::io::BufRead;
use std::path::Path;

use mupo_core::reward::{reasoning_segment, DEFAULT_CLOSE_TAG, DEFAULT_OPEN_TAG};
use mupo_core::{normalize, verify_format, EmbeddingMatrix, RolloutRecord};
use serde::Deserialize;

use crate::embed::EmbedClient;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct RolloutFileRecord {
    pub example_id: String,
    pub response: String,
    #[serde(default)]
    pub reasoning: Option<String>,
    #[serde(default)]
    pub embedding: Option<Vec<f64>>,
    pub correct: bool,
    #[serde(default)]
    pub well_formed: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct IngestOptions {
    pub open_tag: String,
    pub close_tag: String,
    /// Every line must carry something to embed: an embedding, a
    /// `reasoning` field, or a tagged reasoning segment in the response.
    pub require_diversity_inputs: bool,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            open_tag: DEFAULT_OPEN_TAG.into(),
            close_tag: DEFAULT_CLOSE_TAG.into(),
            require_diversity_inputs: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IngestedRollout {
    /// 1-based line in the source file.
    pub line: usize,
    pub rollout_id: usize,
    pub response: String,
    /// The `reasoning` field, else the tagged segment, else the response.
    pub reasoning: String,
    /// Unit-norm embedding, once known.
    pub embedding: Option<Vec<f64>>,
    pub correct: bool,
    /// Taken from the file, or checked against the reasoning tags.
    pub well_formed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IngestedExample {
    pub example_id: String,
    pub rollouts: Vec<IngestedRollout>,
}

impl IngestedExample {
    pub fn verdicts(&self) -> Vec<bool> {
        self.rollouts.iter().map(|r| r.correct).collect()
    }

    /// Embedding matrix of the example; every rollout must be embedded.
    pub fn embeddings(&self) -> Result<EmbeddingMatrix> {
        let rows: Vec<&[f64]> = self
            .rollouts
            .iter()
            .map(|r| {
                r.embedding
                    .as_deref()
                    .ok_or(Error::MissingDiversityInput { line: r.line })
            })
            .collect::<Result<_>>()?;
        Ok(EmbeddingMatrix::new(&rows)?)
    }

    /// Core records; token counts are whitespace-separated words.
    pub fn records(&self) -> Result<Vec<RolloutRecord>> {
        self.rollouts
            .iter()
            .map(|r| {
                let embedding = r
                    .embedding
                    .clone()
                    .ok_or(Error::MissingDiversityInput { line: r.line })?;
                let tokens = r.response.split_whitespace().count().max(1);
                Ok(RolloutRecord::new(
                    r.rollout_id,
                    self.example_id.clone(),
                    tokens,
                    r.correct,
                    r.well_formed,
                    embedding,
                )?)
            })
            .collect()
    }
}

/// Reads and groups a rollout file.
pub fn ingest_rollouts(path: &Path, opts: &IngestOptions) -> Result<Vec<IngestedExample>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let examples = parse_rollouts(std::io::BufReader::new(file), opts)?;
    if examples.is_empty() {
        return Err(Error::NoRecords(path.to_path_buf()));
    }
    Ok(examples)
}

/// [`ingest_rollouts`] over any reader. Blank lines are skipped; an input
/// without records yields an empty list.
pub fn parse_rollouts<R: BufRead>(reader: R, opts: &IngestOptions) -> Result<Vec<IngestedExample>> {
    let mut examples: Vec<IngestedExample> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let text = line.map_err(|e| Error::Line {
            line: line_no,
            message: e.to_string(),
        })?;
        if text.trim().is_empty() {
            continue;
        }
        let rec: RolloutFileRecord = serde_json::from_str(&text).map_err(|e| Error::Line {
            line: line_no,
            message: e.to_string(),
        })?;

        let tagged = reasoning_segment(&rec.response, &opts.open_tag, &opts.close_tag);
        if opts.require_diversity_inputs
            && rec.embedding.is_none()
            && rec.reasoning.is_none()
            && tagged.is_none()
        {
            return Err(Error::MissingDiversityInput { line: line_no });
        }
        let reasoning = rec
            .reasoning
            .clone()
            .or_else(|| tagged.map(str::to_string))
            .unwrap_or_else(|| rec.response.clone());
        let embedding = rec
            .embedding
            .as_deref()
            .map(normalize)
            .transpose()
            .map_err(|e| Error::Line {
                line: line_no,
                message: e.to_string(),
            })?;
        let well_formed = rec
            .well_formed
            .unwrap_or_else(|| verify_format(&rec.response, &opts.open_tag, &opts.close_tag));

        let pos = match examples.iter().position(|e| e.example_id == rec.example_id) {
            Some(p) => p,
            None => {
                examples.push(IngestedExample {
                    example_id: rec.example_id.clone(),
                    rollouts: Vec::new(),
                });
                examples.len() - 1
            }
        };
        let example = &mut examples[pos];
        example.rollouts.push(IngestedRollout {
            line: line_no,
            rollout_id: example.rollouts.len(),
            response: rec.response,
            reasoning,
            embedding,
            correct: rec.correct,
            well_formed,
        });
    }
    Ok(examples)
}

/// Fetches embeddings for every rollout that lacks one, in a single request.
pub fn fill_embeddings(
    examples: &mut [IngestedExample],
    client: Option<&EmbedClient>,
) -> Result<()> {
    let missing: Vec<(usize, usize)> = examples
        .iter()
        .enumerate()
        .flat_map(|(e, ex)| {
            ex.rollouts
                .iter()
                .enumerate()
                .filter(|(_, r)| r.embedding.is_none())
                .map(move |(r, _)| (e, r))
        })
        .collect();
    if missing.is_empty() {
        return Ok(());
    }
    let client = client.ok_or(Error::NoEndpoint)?;
    let texts: Vec<String> = missing
        .iter()
        .map(|&(e, r)| examples[e].rollouts[r].reasoning.clone())
        .collect();
    let vectors = client.embed(&texts)?;
    for (&(e, r), v) in missing.iter().zip(vectors) {
        examples[e].rollouts[r].embedding = Some(v);
    }
    Ok(())
}

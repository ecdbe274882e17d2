//! acc@k, EMA smoothing and per-step diversity curves.

use alloc::string::String;
use alloc::vec::Vec;

use crate::embedding::{pairwise_diversity, EmbeddingMatrix};
use crate::error::{Error, Result};

/// Sampled responses for one example.
#[derive(Debug, Clone, PartialEq)]
pub struct ExampleSamples {
    pub example_id: String,
    pub verdicts: Vec<bool>,
    pub embeddings: Option<EmbeddingMatrix>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SampleSet {
    pub examples: Vec<ExampleSamples>,
}

impl SampleSet {
    /// Builds a set from verdict lists; example ids are their indices.
    pub fn from_verdicts<V: AsRef<[bool]>>(verdicts: &[V]) -> Self {
        Self {
            examples: verdicts
                .iter()
                .enumerate()
                .map(|(i, v)| ExampleSamples {
                    example_id: alloc::format!("{i}"),
                    verdicts: v.as_ref().to_vec(),
                    embeddings: None,
                })
                .collect(),
        }
    }
}

/// Whether any of the first `k` stored responses is correct.
pub fn solved_within(example: &ExampleSamples, k: usize) -> Result<bool> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if example.verdicts.len() < k {
        return Err(Error::InsufficientResponses {
            example: example.example_id.clone(),
            k,
            have: example.verdicts.len(),
        });
    }
    Ok(example.verdicts[..k].iter().any(|&c| c))
}

/// Fraction of examples with a correct response among their first `k`.
pub fn acc_at_k(samples: &SampleSet, k: usize) -> Result<f64> {
    if samples.examples.is_empty() {
        return Err(Error::Empty("sample set"));
    }
    let mut solved = 0usize;
    for example in &samples.examples {
        if example.verdicts.is_empty() {
            return Err(Error::InsufficientResponses {
                example: example.example_id.clone(),
                k: 1,
                have: 0,
            });
        }
        solved += solved_within(example, k)? as usize;
    }
    Ok(solved as f64 / samples.examples.len() as f64)
}

/// Exponential moving average `y_t = y_{t-1} + alpha (x_t - y_{t-1})`,
/// seeded with `y_0 = x_0`.
pub fn ema_smooth(series: &[f64], alpha: f64) -> Result<Vec<f64>> {
    if series.is_empty() {
        return Err(Error::Empty("series"));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidArgument("alpha must lie in (0, 1]".into()));
    }
    if alpha == 1.0 {
        return Ok(series.to_vec());
    }
    let mut out = Vec::with_capacity(series.len());
    let mut y = series[0];
    out.push(y);
    for &x in &series[1..] {
        let next = y + alpha * (x - y);
        // the update is a convex combination; keep rounding inside it
        y = next.clamp(x.min(y), x.max(y));
        out.push(y);
    }
    Ok(out)
}

/// Pairwise diversity of each step's embeddings, in step order.
pub fn diversity_curve(per_step: &[EmbeddingMatrix]) -> Result<Vec<f64>> {
    per_step.iter().map(pairwise_diversity).collect()
}

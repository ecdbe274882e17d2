//! Per-rollout reward: accuracy, format, and the accuracy-gated diversity
//! bonus under a cosine-annealed weight.

use crate::embedding::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::model::GroupPartition;

/// Default delimiters of the reasoning segment.
pub const DEFAULT_OPEN_TAG: &str = "<think>";
pub const DEFAULT_CLOSE_TAG: &str = "</think>";

/// The components of one rollout's scalar reward.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RewardBreakdown {
    pub r_acc: f64,
    pub r_fmt: f64,
    pub r_div: f64,
    pub lambda: f64,
    pub total: f64,
}

impl RewardBreakdown {
    /// The diversity term actually paid out (zero for incorrect rollouts).
    pub fn gated_div(&self) -> f64 {
        if self.r_acc == 1.0 {
            self.r_div
        } else {
            0.0
        }
    }
}

/// Diversity weight at step `t_cur`, decaying from `lambda_max` at step 0 to
/// `lambda_min` at `t_max` along a half cosine.
pub fn lambda_schedule(
    t_cur: usize,
    t_max: usize,
    lambda_max: f64,
    lambda_min: f64,
) -> Result<f64> {
    if t_max < 1 {
        return Err(Error::InvalidArgument("t_max must be at least 1".into()));
    }
    if t_cur > t_max {
        return Err(Error::StepOutOfRange { t_cur, t_max });
    }
    let progress = t_cur as f64 / t_max as f64;
    let cosine = libm::cos(core::f64::consts::PI * progress);
    Ok(lambda_min + (lambda_max - lambda_min) / 2.0 * (1.0 + cosine))
}

/// Mean cosine distance from rollout `i` to every rollout outside its group.
///
/// Zero when the group holds the whole batch.
pub fn diversity_reward(i: usize, partition: &GroupPartition, e: &EmbeddingMatrix) -> Result<f64> {
    if partition.n() != e.len() {
        return Err(Error::LengthMismatch(alloc::format!(
            "partition covers {} rollouts, embeddings have {} rows",
            partition.n(),
            e.len()
        )));
    }
    if i >= e.len() {
        return Err(Error::InvalidArgument(alloc::format!(
            "rollout {i} out of range"
        )));
    }
    Ok(outside_mean(i, partition, e))
}

fn outside_mean(i: usize, partition: &GroupPartition, e: &EmbeddingMatrix) -> f64 {
    let own = partition.group_of(i);
    let outside = partition.n() - partition.group_sizes()[own];
    if outside == 0 {
        return 0.0;
    }
    let total: f64 = (0..partition.n())
        .filter(|&j| partition.group_of(j) != own)
        .map(|j| e.distance(i, j))
        .sum();
    total / outside as f64
}

/// [`diversity_reward`] for every rollout in the batch.
pub fn diversity_rewards(
    partition: &GroupPartition,
    e: &EmbeddingMatrix,
) -> Result<alloc::vec::Vec<f64>> {
    if partition.n() != e.len() {
        return Err(Error::LengthMismatch(alloc::format!(
            "partition covers {} rollouts, embeddings have {} rows",
            partition.n(),
            e.len()
        )));
    }
    Ok((0..e.len())
        .map(|i| outside_mean(i, partition, e))
        .collect())
}

/// Combines the binary verdicts with the diversity bonus. Incorrect
/// rollouts never receive any diversity reward.
pub fn total_reward(correct: bool, well_formed: bool, r_div: f64, lambda: f64) -> RewardBreakdown {
    let r_acc = if correct { 1.0 } else { 0.0 };
    let r_fmt = if well_formed { 1.0 } else { 0.0 };
    let total = if correct {
        r_acc + r_fmt + lambda * r_div
    } else {
        r_acc + r_fmt
    };
    RewardBreakdown {
        r_acc,
        r_fmt,
        r_div,
        lambda,
        total,
    }
}

/// True iff `text` holds exactly one `open_tag` and exactly one
/// `close_tag`, with the close tag after the open tag.
pub fn verify_format(text: &str, open_tag: &str, close_tag: &str) -> bool {
    if open_tag.is_empty() || close_tag.is_empty() {
        return false;
    }
    if text.matches(open_tag).count() != 1 || text.matches(close_tag).count() != 1 {
        return false;
    }
    match (text.find(open_tag), text.rfind(close_tag)) {
        (Some(open), Some(close)) => close >= open + open_tag.len(),
        _ => false,
    }
}

/// The text between the first `open_tag` and the following `close_tag`.
pub fn reasoning_segment<'a>(text: &'a str, open_tag: &str, close_tag: &str) -> Option<&'a str> {
    if open_tag.is_empty() || close_tag.is_empty() {
        return None;
    }
    let start = text.find(open_tag)? + open_tag.len();
    let len = text[start..].find(close_tag)?;
    Some(&text[start..start + len])
}

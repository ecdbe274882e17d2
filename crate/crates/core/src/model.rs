//! Rollout records and group partitions.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::embedding::{norm, UNIT_NORM_TOL};
use crate::error::{Error, Result};
use crate::reward::RewardBreakdown;

/// One sampled response.
#[derive(Debug, Clone, PartialEq)]
pub struct RolloutRecord {
    pub rollout_id: usize,
    pub example_id: String,
    /// Length of the sampled sequence; advantages are broadcast over it.
    pub token_count: usize,
    pub correct: bool,
    pub well_formed: bool,
    /// Unit-norm embedding of the reasoning segment.
    pub embedding: Vec<f64>,
    pub reward: Option<RewardBreakdown>,
    pub group: Option<usize>,
}

impl RolloutRecord {
    pub fn new(
        rollout_id: usize,
        example_id: impl Into<String>,
        token_count: usize,
        correct: bool,
        well_formed: bool,
        embedding: Vec<f64>,
    ) -> Result<Self> {
        if token_count < 1 {
            return Err(Error::InvalidArgument(format!(
                "rollout {rollout_id}: token_count must be at least 1"
            )));
        }
        let n = norm(&embedding);
        if !n.is_finite() {
            return Err(Error::NonFiniteEmbedding);
        }
        if (n - 1.0).abs() > UNIT_NORM_TOL {
            return Err(Error::NotUnitNorm {
                row: rollout_id,
                norm: n,
            });
        }
        Ok(Self {
            rollout_id,
            example_id: example_id.into(),
            token_count,
            correct,
            well_formed,
            embedding,
            reward: None,
            group: None,
        })
    }
}

/// Assignment of `N` rollouts (by batch position) to `K` groups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupPartition {
    assignments: Vec<usize>,
    group_sizes: Vec<usize>,
}

impl GroupPartition {
    /// Builds a partition from per-rollout group labels in `0..k`.
    ///
    /// Empty groups are allowed here; [`GroupPartition::check`] rejects them.
    pub fn from_assignments(assignments: Vec<usize>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidPartition("K must be at least 1".into()));
        }
        let mut group_sizes = vec![0; k];
        for (i, &g) in assignments.iter().enumerate() {
            if g >= k {
                return Err(Error::InvalidPartition(format!(
                    "rollout {i} assigned to group {g}, but K = {k}"
                )));
            }
            group_sizes[g] += 1;
        }
        Ok(Self {
            assignments,
            group_sizes,
        })
    }

    /// Every rollout in group 0.
    pub fn single(n: usize) -> Self {
        Self {
            assignments: vec![0; n],
            group_sizes: vec![n],
        }
    }

    pub fn n(&self) -> usize {
        self.assignments.len()
    }

    pub fn k(&self) -> usize {
        self.group_sizes.len()
    }

    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    pub fn group_sizes(&self) -> &[usize] {
        &self.group_sizes
    }

    pub fn group_of(&self, i: usize) -> usize {
        self.assignments[i]
    }

    /// Batch positions in group `g`, ascending.
    pub fn members(&self, g: usize) -> impl Iterator<Item = usize> + '_ {
        self.assignments
            .iter()
            .enumerate()
            .filter(move |&(_, &a)| a == g)
            .map(|(i, _)| i)
    }

    /// Asserts every partition invariant.
    ///
    /// The size floor is `min(g_min, N)`, so a single group smaller than
    /// `g_min` is accepted when it holds the whole batch.
    pub fn check(&self, g_min: usize) -> Result<()> {
        let n = self.n();
        if n == 0 {
            return Err(Error::InvalidPartition("no rollouts".into()));
        }
        let mut counted = vec![0usize; self.k()];
        for &g in &self.assignments {
            if g >= self.k() {
                return Err(Error::InvalidPartition(format!(
                    "group index {g} out of range"
                )));
            }
            counted[g] += 1;
        }
        if counted != self.group_sizes {
            return Err(Error::InvalidPartition(
                "group sizes disagree with assignments".into(),
            ));
        }
        if self.group_sizes.iter().sum::<usize>() != n {
            return Err(Error::InvalidPartition(
                "group sizes do not sum to N".into(),
            ));
        }
        let floor = g_min.min(n).max(1);
        if let Some((g, &s)) = self
            .group_sizes
            .iter()
            .enumerate()
            .find(|(_, &s)| s < floor)
        {
            return Err(Error::InvalidPartition(format!(
                "group {g} has {s} members, minimum is {floor}"
            )));
        }
        Ok(())
    }
}

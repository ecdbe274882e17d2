//! Advantage estimation and clipped surrogate objectives.
//!
//! Rewards are standardized per normalization scope (the whole batch for
//! GRPO, each group for group-local MUPO). When a scope's standard
//! deviation falls below the floor every advantage in it is zero: a scope
//! of tied rewards carries no learning signal.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::config::{AdvantageScope, MupoConfig, StdEstimator};
use crate::error::{Error, Result};
use crate::model::GroupPartition;

#[derive(Debug, Clone, PartialEq)]
pub struct AdvantageSet {
    /// One advantage per rollout, by batch position.
    pub per_rollout: Vec<f64>,
    pub scope: AdvantageScope,
    /// Number of scopes whose std fell below the floor.
    pub std_floor_hits: usize,
}

/// Reward standardization settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Standardizer {
    pub std_floor: f64,
    pub estimator: StdEstimator,
}

impl Default for Standardizer {
    fn default() -> Self {
        Self {
            std_floor: 1e-6,
            estimator: StdEstimator::Population,
        }
    }
}

impl From<&MupoConfig> for Standardizer {
    fn from(cfg: &MupoConfig) -> Self {
        Self {
            std_floor: cfg.std_floor,
            estimator: cfg.std_estimator,
        }
    }
}

impl Standardizer {
    /// Writes standardized `values` into `out`; returns true if the floor
    /// rule fired.
    fn apply(&self, values: &[f64], out: &mut [f64]) -> bool {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let ss: f64 = values.iter().map(|r| (r - mean) * (r - mean)).sum();
        let denom = match self.estimator {
            StdEstimator::Population => n,
            StdEstimator::Sample => n - 1.0,
        };
        let std = libm::sqrt(ss / denom);
        if std.is_nan() || std < self.std_floor || std == 0.0 {
            out.iter_mut().for_each(|a| *a = 0.0);
            return true;
        }
        for (a, r) in out.iter_mut().zip(values) {
            *a = (r - mean) / std;
        }
        false
    }
}

/// Batch-normalized advantages: `(R_i - mean) / std` over all rewards.
pub fn grpo_advantages(rewards: &[f64], standardizer: &Standardizer) -> Result<AdvantageSet> {
    if rewards.len() < 2 {
        return Err(Error::InvalidArgument(
            "advantages need at least two rewards".into(),
        ));
    }
    let mut per_rollout = vec![0.0; rewards.len()];
    let hit = standardizer.apply(rewards, &mut per_rollout);
    Ok(AdvantageSet {
        per_rollout,
        scope: AdvantageScope::Global,
        std_floor_hits: hit as usize,
    })
}

/// Load-balance weight `(N / (K * |G_k|))^beta`.
pub fn load_balance_weight(n: usize, k: usize, group_size: usize, beta: f64) -> f64 {
    let ratio = n as f64 / (k as f64 * group_size as f64);
    if beta == 1.0 {
        ratio
    } else {
        libm::pow(ratio, beta)
    }
}

/// Advantages under the multi-group objective.
///
/// `GroupLocal` standardizes each group independently; `Global` uses batch
/// statistics for every rollout.
pub fn mupo_advantages(
    rewards: &[f64],
    partition: &GroupPartition,
    scope: AdvantageScope,
    standardizer: &Standardizer,
) -> Result<AdvantageSet> {
    if rewards.len() != partition.n() {
        return Err(Error::LengthMismatch(format!(
            "{} rewards for a partition of {} rollouts",
            rewards.len(),
            partition.n()
        )));
    }
    match scope {
        AdvantageScope::Global => grpo_advantages(rewards, standardizer),
        AdvantageScope::GroupLocal => {
            let mut per_rollout = vec![0.0; rewards.len()];
            let mut std_floor_hits = 0;
            for g in 0..partition.k() {
                let members: Vec<usize> = partition.members(g).collect();
                if members.len() < 2 {
                    return Err(Error::SingletonGroup { group: g });
                }
                let values: Vec<f64> = members.iter().map(|&i| rewards[i]).collect();
                let mut adv = vec![0.0; members.len()];
                std_floor_hits += standardizer.apply(&values, &mut adv) as usize;
                for (&i, a) in members.iter().zip(adv) {
                    per_rollout[i] = a;
                }
            }
            Ok(AdvantageSet {
                per_rollout,
                scope,
                std_floor_hits,
            })
        }
    }
}

/// `min(r * A, clip(r, 1 - eps, 1 + eps) * A)`.
pub fn clipped_surrogate(ratio: f64, advantage: f64, clip_eps: f64) -> f64 {
    let clipped = ratio.clamp(1.0 - clip_eps, 1.0 + clip_eps);
    (ratio * advantage).min(clipped * advantage)
}

/// Everything the surrogate objectives need for one batch.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateInputs {
    /// `pi_theta(o_i) / pi_theta_old(o_i)` per rollout.
    pub ratios: Vec<f64>,
    pub advantages: AdvantageSet,
    pub clip_eps: f64,
    /// Sequence lengths; each rollout's advantage is broadcast over them.
    pub token_counts: Vec<usize>,
}

impl SurrogateInputs {
    fn validate(&self) -> Result<()> {
        let n = self.ratios.len();
        if n == 0 {
            return Err(Error::Empty("surrogate batch"));
        }
        if self.advantages.per_rollout.len() != n || self.token_counts.len() != n {
            return Err(Error::LengthMismatch(format!(
                "{n} ratios, {} advantages, {} token counts",
                self.advantages.per_rollout.len(),
                self.token_counts.len()
            )));
        }
        if let Some(i) = self.ratios.iter().position(|r| !r.is_finite() || *r <= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "ratio of rollout {i} must be positive and finite"
            )));
        }
        if let Some(i) = self.token_counts.iter().position(|&t| t == 0) {
            return Err(Error::InvalidArgument(format!("rollout {i} has no tokens")));
        }
        Ok(())
    }

    /// Per-rollout surrogate term. Every token position of a rollout carries
    /// the same broadcast advantage and ratio, so the token mean equals the
    /// sequence-level term.
    fn term(&self, i: usize) -> f64 {
        clipped_surrogate(
            self.ratios[i],
            self.advantages.per_rollout[i],
            self.clip_eps,
        )
    }
}

/// Single-group clipped surrogate, averaged over the batch.
pub fn grpo_objective(inputs: &SurrogateInputs) -> Result<f64> {
    inputs.validate()?;
    let n = inputs.ratios.len();
    let sum: f64 = (0..n).map(|i| inputs.term(i)).sum();
    Ok(sum / n as f64)
}

/// Sum over groups of `w_k / |G_k|` times the group's surrogate sum.
pub fn mupo_objective(
    inputs: &SurrogateInputs,
    partition: &GroupPartition,
    beta: f64,
) -> Result<f64> {
    inputs.validate()?;
    if partition.n() != inputs.ratios.len() {
        return Err(Error::LengthMismatch(format!(
            "partition covers {} rollouts, batch has {}",
            partition.n(),
            inputs.ratios.len()
        )));
    }
    let (n, k) = (partition.n(), partition.k());
    let mut total = 0.0;
    for g in 0..k {
        let size = partition.group_sizes()[g];
        if size == 0 {
            return Err(Error::InvalidPartition(format!("group {g} is empty")));
        }
        let sum: f64 = partition.members(g).map(|i| inputs.term(i)).sum();
        total += load_balance_weight(n, k, size, beta) * (sum / size as f64);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn adv(r: &[f64]) -> Vec<f64> {
        grpo_advantages(r, &Standardizer::default())
            .unwrap()
            .per_rollout
    }

    #[test]
    fn grpo_advantage_examples() {
        assert_eq!(adv(&[1.0, 0.0]), vec![1.0, -1.0]);
        let flat = grpo_advantages(&[1.0, 1.0, 1.0], &Standardizer::default()).unwrap();
        assert_eq!(flat.per_rollout, vec![0.0; 3]);
        assert_eq!(flat.std_floor_hits, 1);
        assert_eq!(adv(&[1.0, 1.0, 0.0, 0.0]), vec![1.0, 1.0, -1.0, -1.0]);
        assert!(grpo_advantages(&[1.0], &Standardizer::default()).is_err());
    }

    #[test]
    fn sample_estimator() {
        let s = Standardizer {
            estimator: StdEstimator::Sample,
            ..Standardizer::default()
        };
        // mean 0.5, sample std sqrt(0.5)
        let a = grpo_advantages(&[1.0, 0.0], &s).unwrap().per_rollout;
        assert!((a[0] - 0.5 / libm::sqrt(0.5)).abs() < 1e-15);
    }

    #[test]
    fn weight_examples() {
        assert_eq!(load_balance_weight(15, 3, 5, 1.0), 1.0);
        assert_eq!(load_balance_weight(15, 3, 3, 0.0), 1.0);
        assert_eq!(load_balance_weight(15, 3, 3, 1.0), 5.0 / 3.0);
        assert!((load_balance_weight(15, 3, 3, 2.0) - 25.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn mupo_advantage_examples() {
        let s = Standardizer::default();
        let p = GroupPartition::from_assignments(vec![0, 0, 1, 1], 2).unwrap();
        let a = mupo_advantages(&[1.0, 0.0, 1.0, 0.0], &p, AdvantageScope::GroupLocal, &s).unwrap();
        assert_eq!(a.per_rollout, vec![1.0, -1.0, 1.0, -1.0]);

        let a = mupo_advantages(&[1.0, 1.0, 1.0, 0.0], &p, AdvantageScope::GroupLocal, &s).unwrap();
        assert_eq!(a.per_rollout, vec![0.0, 0.0, 1.0, -1.0]);
        assert_eq!(a.std_floor_hits, 1);

        let rewards = [0.3, 1.7, 2.0, 0.0, 1.0];
        let single = GroupPartition::single(5);
        let a = mupo_advantages(&rewards, &single, AdvantageScope::GroupLocal, &s).unwrap();
        assert_eq!(a.per_rollout, adv(&rewards));

        let p = GroupPartition::from_assignments(vec![0, 0, 1], 2).unwrap();
        assert_eq!(
            mupo_advantages(&[1.0, 0.0, 1.0], &p, AdvantageScope::GroupLocal, &s),
            Err(Error::SingletonGroup { group: 1 })
        );
        assert!(mupo_advantages(&[1.0, 0.0, 1.0], &p, AdvantageScope::Global, &s).is_ok());
    }

    #[test]
    fn clip_examples() {
        for a in [-3.0, -0.5, 0.0, 0.7, 2.0] {
            assert_eq!(clipped_surrogate(1.0, a, 0.2), a);
        }
        assert!((clipped_surrogate(1.5, 2.0, 0.2) - 2.4).abs() < 1e-12);
        assert!((clipped_surrogate(0.5, -1.0, 0.2) - -0.8).abs() < 1e-12);
    }

    fn inputs(ratios: Vec<f64>, advantages: Vec<f64>) -> SurrogateInputs {
        let n = ratios.len();
        SurrogateInputs {
            ratios,
            advantages: AdvantageSet {
                per_rollout: advantages,
                scope: AdvantageScope::Global,
                std_floor_hits: 0,
            },
            clip_eps: 0.2,
            token_counts: vec![4; n],
        }
    }

    #[test]
    fn grpo_objective_examples() {
        assert_eq!(
            grpo_objective(&inputs(vec![1.0, 1.0], vec![1.0, -1.0])).unwrap(),
            0.0
        );
        let v = grpo_objective(&inputs(vec![1.5, 1.0], vec![1.0, -1.0])).unwrap();
        assert!((v - 0.1).abs() < 1e-12);
        assert_eq!(
            grpo_objective(&inputs(vec![], vec![])),
            Err(Error::Empty("surrogate batch"))
        );
        assert!(grpo_objective(&inputs(vec![0.0, 1.0], vec![1.0, -1.0])).is_err());
    }

    #[test]
    fn mupo_objective_composes_weighted_groups() {
        // sizes (3, 5, 7) out of N = 15, K = 3
        let mut assignments = vec![0; 3];
        assignments.extend(vec![1; 5]);
        assignments.extend(vec![2; 7]);
        let p = GroupPartition::from_assignments(assignments, 3).unwrap();
        let ratios: Vec<f64> = (0..15).map(|i| 0.7 + 0.05 * i as f64).collect();
        let advs: Vec<f64> = (0..15).map(|i| ((i * 7) % 5) as f64 - 2.0).collect();
        let all = inputs(ratios.clone(), advs.clone());
        let got = mupo_objective(&all, &p, 1.0).unwrap();

        let part = |lo: usize, hi: usize| {
            grpo_objective(&inputs(ratios[lo..hi].to_vec(), advs[lo..hi].to_vec())).unwrap()
        };
        let expected = 5.0 / 3.0 * part(0, 3) + 1.0 * part(3, 8) + 5.0 / 7.0 * part(8, 15);
        assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");

        assert!(mupo_objective(&all, &GroupPartition::single(14), 1.0).is_err());
    }

    #[test]
    fn balanced_groups_ignore_beta() {
        let p = GroupPartition::from_assignments(vec![0, 1, 2, 0, 1, 2], 3).unwrap();
        let x = inputs(
            vec![1.1, 0.9, 1.3, 1.0, 0.7, 1.25],
            vec![1.0, -0.5, 2.0, -1.0, 0.5, -2.0],
        );
        assert_eq!(
            mupo_objective(&x, &p, 1.0).unwrap(),
            mupo_objective(&x, &p, 0.0).unwrap()
        );
    }
}

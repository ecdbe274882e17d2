use alloc::vec;
use alloc::vec::Vec;

use super::landscape::{
    exact_expected_reward, trajectory_embedding, trajectory_reward, LandscapeConfig,
    ENUMERATION_LIMIT,
};
use super::policy::{sample_batch, TabularPolicy};
use super::Trajectory;
use crate::config::MupoConfig;
use crate::embedding::{pairwise_diversity, EmbeddingMatrix};
use crate::error::{Error, Result};
use crate::grouping::constrained_kmeans;
use crate::model::GroupPartition;
use crate::policy::{
    grpo_advantages, grpo_objective, load_balance_weight, mupo_advantages, mupo_objective,
    AdvantageSet, Standardizer, SurrogateInputs,
};
use crate::reward::{diversity_rewards, lambda_schedule, total_reward, RewardBreakdown};
use crate::rng::keyed;

/// Fresh trajectories drawn each step to measure policy diversity.
pub const VALIDATION_SIZE: usize = 10;

const STREAM_SAMPLE: u64 = 1;
const STREAM_REWARD: u64 = 2;
const STREAM_VALIDATION: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Algorithm {
    Grpo,
    Mupo,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainSettings {
    pub learning_rate: f64,
    /// Log the enumerated expected accuracy each step (needs `A^T <= 10^6`).
    pub track_expected_reward: bool,
}

impl Default for TrainSettings {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            track_expected_reward: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub mean_r_acc: f64,
    /// Mean diversity reward actually paid (zero for incorrect rollouts).
    pub mean_r_div: f64,
    pub lambda: f64,
    pub objective: f64,
    pub validation_diversity: f64,
    pub expected_reward_exact: Option<f64>,
    /// [`TabularPolicy::fingerprint`] of the policy that sampled this step.
    pub policy_hash: u64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainLog {
    pub records: Vec<StepRecord>,
}

impl TrainLog {
    pub fn series(&self, f: impl Fn(&StepRecord) -> f64) -> Vec<f64> {
        self.records.iter().map(f).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub log: TrainLog,
    /// Policy after the last update.
    pub policy: TabularPolicy,
    /// Validation trajectories of the final step.
    pub final_validation: Vec<Trajectory>,
    pub final_validation_embeddings: Vec<Vec<f64>>,
}

/// Everything scored for one training step, frozen at sampling time.
#[derive(Debug, Clone, PartialEq)]
pub struct StepBatch {
    pub algo: Algorithm,
    pub trajectories: Vec<Trajectory>,
    /// Log-probabilities under the sampling (old) policy.
    pub old_log_probs: Vec<f64>,
    pub rewards: Vec<RewardBreakdown>,
    pub partition: GroupPartition,
    pub advantages: AdvantageSet,
    /// Weight of each rollout's surrogate term in the objective.
    pub coefficients: Vec<f64>,
    pub lambda: f64,
    pub clip_eps: f64,
    pub beta: f64,
}

/// Samples and scores step `step` of a run.
///
/// GRPO scores `R_acc + R_fmt` and normalizes over the batch. MUPO embeds
/// the batch, clusters it, adds the gated diversity reward under the
/// annealed weight and normalizes per the configured scope.
pub fn build_step(
    algo: Algorithm,
    cfg: &MupoConfig,
    land: &LandscapeConfig,
    policy: &TabularPolicy,
    step: usize,
) -> Result<StepBatch> {
    let n = cfg.n;
    let rollouts = sample_batch(
        policy,
        n,
        &mut keyed(cfg.seed, STREAM_SAMPLE, &[step as u64]),
    );
    let mut verdicts = Vec::with_capacity(n);
    for (i, r) in rollouts.iter().enumerate() {
        let mut rng = keyed(cfg.seed, STREAM_REWARD, &[step as u64, i as u64]);
        verdicts.push(trajectory_reward(&r.actions, land, &mut rng)?);
    }
    let standardizer = Standardizer::from(cfg);

    let (rewards, partition, advantages, coefficients, lambda) = match algo {
        Algorithm::Grpo => {
            let rewards: Vec<RewardBreakdown> = verdicts
                .iter()
                .map(|&(c, f)| total_reward(c, f, 0.0, 0.0))
                .collect();
            let totals: Vec<f64> = rewards.iter().map(|r| r.total).collect();
            let advantages = grpo_advantages(&totals, &standardizer)?;
            let coefficients = vec![1.0 / n as f64; n];
            (
                rewards,
                GroupPartition::single(n),
                advantages,
                coefficients,
                0.0,
            )
        }
        Algorithm::Mupo => {
            let embeddings: Vec<Vec<f64>> = rollouts
                .iter()
                .map(|r| trajectory_embedding(&r.actions, land))
                .collect::<Result<_>>()?;
            let e = EmbeddingMatrix::new(&embeddings)?;
            let partition = constrained_kmeans(&e, cfg)?;
            let lambda = lambda_schedule(step, cfg.t_max, cfg.lambda_max, cfg.lambda_min)?;
            let r_div = diversity_rewards(&partition, &e)?;
            let rewards: Vec<RewardBreakdown> = verdicts
                .iter()
                .zip(&r_div)
                .map(|(&(c, f), &d)| total_reward(c, f, d, lambda))
                .collect();
            let totals: Vec<f64> = rewards.iter().map(|r| r.total).collect();
            let advantages =
                mupo_advantages(&totals, &partition, cfg.advantage_scope, &standardizer)?;
            let k = partition.k();
            let coefficients = (0..n)
                .map(|i| {
                    let size = partition.group_sizes()[partition.group_of(i)];
                    load_balance_weight(n, k, size, cfg.beta) / size as f64
                })
                .collect();
            (rewards, partition, advantages, coefficients, lambda)
        }
    };

    Ok(StepBatch {
        algo,
        old_log_probs: rollouts.iter().map(|r| r.log_prob).collect(),
        trajectories: rollouts.into_iter().map(|r| r.actions).collect(),
        rewards,
        partition,
        advantages,
        coefficients,
        lambda,
        clip_eps: cfg.clip_eps,
        beta: cfg.beta,
    })
}

impl StepBatch {
    fn ratios(&self, policy: &TabularPolicy) -> Result<Vec<f64>> {
        self.trajectories
            .iter()
            .zip(&self.old_log_probs)
            .map(|(traj, old)| Ok(libm::exp(policy.log_prob(traj)? - old)))
            .collect()
    }

    fn surrogate_inputs(&self, policy: &TabularPolicy) -> Result<SurrogateInputs> {
        Ok(SurrogateInputs {
            ratios: self.ratios(policy)?,
            advantages: self.advantages.clone(),
            clip_eps: self.clip_eps,
            token_counts: self.trajectories.iter().map(|t| t.len()).collect(),
        })
    }

    /// Surrogate objective of `policy` against the frozen batch.
    pub fn objective(&self, policy: &TabularPolicy) -> Result<f64> {
        let inputs = self.surrogate_inputs(policy)?;
        match self.algo {
            Algorithm::Grpo => grpo_objective(&inputs),
            Algorithm::Mupo => mupo_objective(&inputs, &self.partition, self.beta),
        }
    }

    /// Analytic gradient of [`StepBatch::objective`] with respect to every
    /// logit, row-major `T x A`.
    ///
    /// Each rollout contributes `c_i * s_i * r_i * d log pi(o_i)`, where
    /// `s_i` is the advantage when the unclipped branch of the surrogate is
    /// active and zero otherwise. The per-token log-probability gradients are
    /// `(onehot(a_t) - p_t) / temperature`.
    pub fn gradient(&self, policy: &TabularPolicy) -> Result<Vec<f64>> {
        let ratios = self.ratios(policy)?;
        let (t_len, a_len) = (policy.steps(), policy.actions());
        let probs = policy.probabilities();
        let tau = policy.temperature();
        let eps = self.clip_eps;
        let mut grad = vec![0.0; t_len * a_len];
        for (i, traj) in self.trajectories.iter().enumerate() {
            let (r, adv) = (ratios[i], self.advantages.per_rollout[i]);
            let slope = if r > 1.0 + eps {
                if adv < 0.0 {
                    adv
                } else {
                    0.0
                }
            } else if r < 1.0 - eps {
                if adv > 0.0 {
                    adv
                } else {
                    0.0
                }
            } else {
                adv
            };
            let scale = self.coefficients[i] * slope * r / tau;
            if scale == 0.0 {
                continue;
            }
            for (t, &a) in traj.iter().enumerate() {
                let row = &mut grad[t * a_len..(t + 1) * a_len];
                for (g, p) in row.iter_mut().zip(&probs[t * a_len..(t + 1) * a_len]) {
                    *g -= scale * p;
                }
                row[a] += scale;
            }
        }
        Ok(grad)
    }

    pub fn mean_r_acc(&self) -> f64 {
        self.rewards.iter().map(|r| r.r_acc).sum::<f64>() / self.rewards.len() as f64
    }

    pub fn mean_gated_div(&self) -> f64 {
        self.rewards.iter().map(|r| r.gated_div()).sum::<f64>() / self.rewards.len() as f64
    }
}

fn validation_batch(
    policy: &TabularPolicy,
    land: &LandscapeConfig,
    seed: u64,
    step: usize,
) -> Result<(Vec<Trajectory>, Vec<Vec<f64>>, f64)> {
    let mut rng = keyed(seed, STREAM_VALIDATION, &[step as u64]);
    let trajectories: Vec<Trajectory> = sample_batch(policy, VALIDATION_SIZE, &mut rng)
        .into_iter()
        .map(|r| r.actions)
        .collect();
    let embeddings: Vec<Vec<f64>> = trajectories
        .iter()
        .map(|t| trajectory_embedding(t, land))
        .collect::<Result<_>>()?;
    let diversity = pairwise_diversity(&EmbeddingMatrix::new(&embeddings)?)?;
    Ok((trajectories, embeddings, diversity))
}

/// Runs `cfg.t_max + 1` steps (0 through `t_max`) of GRPO or MUPO on the
/// landscape, one gradient-ascent update per sampled batch.
///
/// Every random draw is keyed by `cfg.seed`, so a run is a pure function
/// of its inputs.
pub fn train(
    algo: Algorithm,
    cfg: &MupoConfig,
    land: &LandscapeConfig,
    settings: &TrainSettings,
) -> Result<TrainOutcome> {
    let cfg = cfg.validate()?.config;
    land.validate()?;
    if !settings.learning_rate.is_finite() || settings.learning_rate < 0.0 {
        return Err(Error::InvalidArgument(
            "learning rate must be finite and >= 0".into(),
        ));
    }
    let track =
        settings.track_expected_reward && land.space_size().is_some_and(|s| s <= ENUMERATION_LIMIT);

    let mut policy = land.initial_policy()?;
    let mut log = TrainLog::default();
    let mut last_validation = (Vec::new(), Vec::new());
    for step in 0..=cfg.t_max {
        let batch = build_step(algo, &cfg, land, &policy, step)?;
        let objective = batch.objective(&policy)?;
        let (trajectories, embeddings, validation_diversity) =
            validation_batch(&policy, land, cfg.seed, step)?;
        let expected_reward_exact = if track {
            Some(exact_expected_reward(&policy, land)?)
        } else {
            None
        };
        log.records.push(StepRecord {
            step,
            mean_r_acc: batch.mean_r_acc(),
            mean_r_div: batch.mean_gated_div(),
            lambda: batch.lambda,
            objective,
            validation_diversity,
            expected_reward_exact,
            policy_hash: policy.fingerprint(),
        });
        last_validation = (trajectories, embeddings);

        let grad = batch.gradient(&policy)?;
        policy.ascend(&grad, settings.learning_rate)?;
    }
    Ok(TrainOutcome {
        log,
        policy,
        final_validation: last_validation.0,
        final_validation_embeddings: last_validation.1,
    })
}

//! Run configuration shared by every module.

use crate::error::{Error, Result};

/// Where advantage statistics are computed under the multi-group objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum AdvantageScope {
    /// Mean and std are taken inside each group.
    #[default]
    GroupLocal,
    /// Mean and std are taken over the whole batch.
    Global,
}

/// Standard deviation convention used when normalizing rewards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum StdEstimator {
    /// Divide by `n`.
    #[default]
    Population,
    /// Divide by `n - 1`.
    Sample,
}

/// Hyperparameters of a GRPO / MUPO run.
///
/// Serialized field names are the canonical config-file keys.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MupoConfig {
    /// Responses sampled per example.
    #[cfg_attr(feature = "serde", serde(rename = "N"))]
    pub n: usize,
    /// Number of groups.
    #[cfg_attr(feature = "serde", serde(rename = "K"))]
    pub k: usize,
    /// Minimum group size.
    #[cfg_attr(feature = "serde", serde(rename = "G_min"))]
    pub g_min: usize,
    /// Load-balance exponent.
    pub beta: f64,
    pub lambda_max: f64,
    pub lambda_min: f64,
    /// Total training steps; the diversity weight reaches `lambda_min` here.
    pub t_max: usize,
    pub clip_eps: f64,
    /// Standard deviations below this produce all-zero advantages.
    pub std_floor: f64,
    pub advantage_scope: AdvantageScope,
    pub std_estimator: StdEstimator,
    pub seed: u64,
}

impl Default for MupoConfig {
    fn default() -> Self {
        Self {
            n: 15,
            k: 3,
            g_min: 3,
            beta: 1.0,
            lambda_max: 0.4,
            lambda_min: 0.1,
            t_max: 200,
            clip_eps: 0.2,
            std_floor: 1e-6,
            advantage_scope: AdvantageScope::GroupLocal,
            std_estimator: StdEstimator::Population,
            seed: 0,
        }
    }
}

/// A config that passed [`validate_config`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidatedConfig {
    pub config: MupoConfig,
    /// The requested group count when it had to be reduced to fit `N`.
    pub k_reduced_from: Option<usize>,
}

impl ValidatedConfig {
    pub fn warned(&self) -> bool {
        self.k_reduced_from.is_some()
    }
}

fn reject(field: &'static str, reason: &'static str) -> Error {
    Error::InvalidConfig { field, reason }
}

/// Checks every config invariant.
///
/// An infeasible group count (`K * G_min > N`) is not an error: `K` is
/// reduced to `max(1, N / G_min)` and the original value is reported in
/// [`ValidatedConfig::k_reduced_from`]. With `K = 1` the single group holds
/// all `N` rollouts even when `N < G_min`.
pub fn validate_config(cfg: MupoConfig) -> Result<ValidatedConfig> {
    if cfg.n < 1 {
        return Err(reject("N", "must be at least 1"));
    }
    if cfg.k < 1 {
        return Err(reject("K", "must be at least 1"));
    }
    if cfg.g_min < 1 {
        return Err(reject("G_min", "must be at least 1"));
    }
    if !cfg.beta.is_finite() || cfg.beta < 0.0 {
        return Err(reject("beta", "must be a finite value >= 0"));
    }
    if !cfg.lambda_min.is_finite() || !cfg.lambda_max.is_finite() {
        return Err(reject("lambda_min", "lambda endpoints must be finite"));
    }
    if cfg.lambda_min < 0.0 {
        return Err(reject("lambda_min", "must be >= 0"));
    }
    if cfg.lambda_min > cfg.lambda_max {
        return Err(reject("lambda_min", "lambda_min > lambda_max"));
    }
    if cfg.t_max < 1 {
        return Err(reject("t_max", "must be at least 1"));
    }
    if !(cfg.clip_eps > 0.0 && cfg.clip_eps < 1.0) {
        return Err(reject("clip_eps", "must lie in (0, 1)"));
    }
    if !cfg.std_floor.is_finite() || cfg.std_floor < 0.0 {
        return Err(reject("std_floor", "must be a finite value >= 0"));
    }

    let mut config = cfg;
    let mut k_reduced_from = None;
    if cfg.k > 1 && cfg.k * cfg.g_min > cfg.n {
        config.k = (cfg.n / cfg.g_min).max(1);
        k_reduced_from = Some(cfg.k);
    }
    Ok(ValidatedConfig {
        config,
        k_reduced_from,
    })
}

impl MupoConfig {
    pub fn validate(self) -> Result<ValidatedConfig> {
        validate_config(self)
    }
}

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand_core::RngCore;

use super::policy::TabularPolicy;
use crate::error::{Error, Result};
use crate::rng::uniform;

/// Largest trajectory space [`exact_expected_reward`] will enumerate.
pub const ENUMERATION_LIMIT: u64 = 1_000_000;

/// A reward mode: every trajectory within `radius` (Hamming) of
/// `prototype` succeeds with probability `success_prob`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModeSpec {
    pub prototype: Vec<usize>,
    pub radius: usize,
    pub success_prob: f64,
}

/// Reward landscape over `A^T` trajectories.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LandscapeConfig {
    /// Alphabet size.
    #[cfg_attr(feature = "serde", serde(rename = "A"))]
    pub actions: usize,
    /// Trajectory length.
    #[cfg_attr(feature = "serde", serde(rename = "T"))]
    pub steps: usize,
    #[cfg_attr(feature = "serde", serde(default))]
    pub modes: Vec<ModeSpec>,
    /// Initial policy logits, `T` rows of `A`; uniform when absent.
    #[cfg_attr(
        feature = "serde",
        serde(default, skip_serializing_if = "Option::is_none")
    )]
    pub init_logits: Option<Vec<Vec<f64>>>,
}

fn hamming(a: &[usize], b: &[usize]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

impl LandscapeConfig {
    pub fn embedding_dim(&self) -> usize {
        self.actions * self.steps
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: alloc::string::String| Err(Error::InvalidLandscape(msg));
        if self.actions < 1 || self.steps < 1 {
            return bad("A and T must be at least 1".into());
        }
        for (m, mode) in self.modes.iter().enumerate() {
            if mode.prototype.len() != self.steps {
                return bad(format!(
                    "mode {m}: prototype length {} != T",
                    mode.prototype.len()
                ));
            }
            if mode.prototype.iter().any(|&a| a >= self.actions) {
                return bad(format!("mode {m}: prototype action outside alphabet"));
            }
            if mode.radius >= self.steps {
                return bad(format!("mode {m}: radius {} must be < T", mode.radius));
            }
            if !(0.0..=1.0).contains(&mode.success_prob) {
                return bad(format!("mode {m}: success_prob outside [0, 1]"));
            }
        }
        let max_radius = self.modes.iter().map(|m| m.radius).max().unwrap_or(0);
        for i in 0..self.modes.len() {
            for j in (i + 1)..self.modes.len() {
                let d = hamming(&self.modes[i].prototype, &self.modes[j].prototype);
                if d <= 2 * max_radius {
                    return bad(format!(
                        "modes {i} and {j} overlap: distance {d} <= 2 * max radius {max_radius}"
                    ));
                }
            }
        }
        if let Some(rows) = &self.init_logits {
            if rows.len() != self.steps || rows.iter().any(|r| r.len() != self.actions) {
                return bad("init_logits must be T rows of A values".into());
            }
        }
        Ok(())
    }

    fn check(&self, traj: &[usize]) -> Result<()> {
        if traj.len() != self.steps || traj.iter().any(|&a| a >= self.actions) {
            return Err(Error::MalformedTrajectory(format!(
                "{traj:?} is not a length-{} trajectory over {} actions",
                self.steps, self.actions
            )));
        }
        Ok(())
    }

    /// The mode whose ball contains `traj`, if any.
    pub fn mode_of(&self, traj: &[usize]) -> Option<&ModeSpec> {
        self.modes
            .iter()
            .find(|m| hamming(&m.prototype, traj) <= m.radius)
    }

    /// Policy at the start of training.
    pub fn initial_policy(&self) -> Result<TabularPolicy> {
        match &self.init_logits {
            Some(rows) => TabularPolicy::from_logits(rows, 1.0),
            None => Ok(TabularPolicy::uniform(self.steps, self.actions)),
        }
    }

    /// Number of trajectories, if it fits in `u64`.
    pub fn space_size(&self) -> Option<u64> {
        (self.actions as u64).checked_pow(self.steps as u32)
    }
}

/// One-hot position/action encoding scaled to unit norm. Trajectories that
/// differ in `h` positions sit at cosine distance `h / T`.
pub fn trajectory_embedding(traj: &[usize], cfg: &LandscapeConfig) -> Result<Vec<f64>> {
    cfg.check(traj)?;
    let scale = 1.0 / libm::sqrt(cfg.steps as f64);
    let mut v = vec![0.0; cfg.embedding_dim()];
    for (t, &a) in traj.iter().enumerate() {
        v[t * cfg.actions + a] = scale;
    }
    Ok(v)
}

/// Accuracy and format verdicts for one trajectory.
///
/// In-mode trajectories are correct with the mode's success probability;
/// everything else is incorrect. Simulated responses are always well formed.
pub fn trajectory_reward<R: RngCore + ?Sized>(
    traj: &[usize],
    cfg: &LandscapeConfig,
    rng: &mut R,
) -> Result<(bool, bool)> {
    cfg.check(traj)?;
    let correct = match cfg.mode_of(traj) {
        Some(mode) => uniform(rng) < mode.success_prob,
        None => false,
    };
    Ok((correct, true))
}

/// Expected accuracy reward of `policy`, by enumerating every trajectory.
pub fn exact_expected_reward(policy: &TabularPolicy, cfg: &LandscapeConfig) -> Result<f64> {
    if policy.steps() != cfg.steps || policy.actions() != cfg.actions {
        return Err(Error::DimensionMismatch {
            left: cfg.embedding_dim(),
            right: policy.steps() * policy.actions(),
        });
    }
    match cfg.space_size() {
        Some(s) if s <= ENUMERATION_LIMIT => {}
        _ => {
            return Err(Error::TooLarge(format!(
                "{}^{} trajectories",
                cfg.actions, cfg.steps
            )))
        }
    }
    if cfg.modes.is_empty() {
        return Ok(0.0);
    }
    let probs = policy.probabilities();
    let (t_len, a_len) = (cfg.steps, cfg.actions);
    let mut traj = vec![0usize; t_len];
    let mut total = 0.0;
    loop {
        if let Some(mode) = cfg.mode_of(&traj) {
            let p: f64 = traj
                .iter()
                .enumerate()
                .map(|(t, &a)| probs[t * a_len + a])
                .product();
            total += p * mode.success_prob;
        }
        let mut pos = t_len;
        loop {
            if pos == 0 {
                return Ok(total);
            }
            pos -= 1;
            traj[pos] += 1;
            if traj[pos] < a_len {
                break;
            }
            traj[pos] = 0;
        }
    }
}

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand_core::RngCore;

use super::Trajectory;
use crate::error::{Error, Result};
use crate::rng::uniform;

/// Logits beyond this magnitude are treated as divergence.
pub const LOGIT_BOUND: f64 = 1e6;

/// Factorized categorical policy: one softmax over `A` actions per step.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularPolicy {
    steps: usize,
    actions: usize,
    /// Row-major `T x A`.
    logits: Vec<f64>,
    temperature: f64,
}

impl TabularPolicy {
    /// Uniform policy.
    pub fn uniform(steps: usize, actions: usize) -> Self {
        Self {
            steps,
            actions,
            logits: vec![0.0; steps * actions],
            temperature: 1.0,
        }
    }

    pub fn from_logits<R: AsRef<[f64]>>(rows: &[R], temperature: f64) -> Result<Self> {
        let steps = rows.len();
        let actions = rows.first().map_or(0, |r| r.as_ref().len());
        if steps == 0 || actions == 0 {
            return Err(Error::InvalidArgument(
                "policy needs T >= 1 and A >= 1".into(),
            ));
        }
        if !temperature.is_finite() || temperature <= 0.0 {
            return Err(Error::InvalidArgument(
                "temperature must be positive".into(),
            ));
        }
        let mut logits = Vec::with_capacity(steps * actions);
        for (t, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != actions {
                return Err(Error::DimensionMismatch {
                    left: actions,
                    right: row.len(),
                });
            }
            if row.iter().any(|x| !x.is_finite()) {
                return Err(Error::Numerical(format!("non-finite logit in step {t}")));
            }
            logits.extend_from_slice(row);
        }
        Ok(Self {
            steps,
            actions,
            logits,
            temperature,
        })
    }

    pub fn with_temperature(mut self, temperature: f64) -> Result<Self> {
        if !temperature.is_finite() || temperature <= 0.0 {
            return Err(Error::InvalidArgument(
                "temperature must be positive".into(),
            ));
        }
        self.temperature = temperature;
        Ok(self)
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn actions(&self) -> usize {
        self.actions
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn logits(&self) -> &[f64] {
        &self.logits
    }

    pub fn logits_mut(&mut self) -> &mut [f64] {
        &mut self.logits
    }

    /// Action distribution at step `t`.
    pub fn step_probs(&self, t: usize) -> Vec<f64> {
        let row = &self.logits[t * self.actions..(t + 1) * self.actions];
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut p: Vec<f64> = row
            .iter()
            .map(|&z| libm::exp((z - max) / self.temperature))
            .collect();
        let total: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= total);
        p
    }

    /// All step distributions, row-major `T x A`.
    pub fn probabilities(&self) -> Vec<f64> {
        (0..self.steps).flat_map(|t| self.step_probs(t)).collect()
    }

    fn step_log_probs(&self, t: usize) -> Vec<f64> {
        let row = &self.logits[t * self.actions..(t + 1) * self.actions];
        let scaled: Vec<f64> = row.iter().map(|z| z / self.temperature).collect();
        let max = scaled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + libm::log(scaled.iter().map(|z| libm::exp(z - max)).sum::<f64>());
        scaled.iter().map(|z| z - lse).collect()
    }

    pub fn check_trajectory(&self, traj: &[usize]) -> Result<()> {
        if traj.len() != self.steps {
            return Err(Error::MalformedTrajectory(format!(
                "length {} for a policy over {} steps",
                traj.len(),
                self.steps
            )));
        }
        if let Some(t) = traj.iter().position(|&a| a >= self.actions) {
            return Err(Error::MalformedTrajectory(format!(
                "action {} at step {t} outside alphabet of {}",
                traj[t], self.actions
            )));
        }
        Ok(())
    }

    /// Sum of per-step log-probabilities.
    pub fn log_prob(&self, traj: &[usize]) -> Result<f64> {
        self.check_trajectory(traj)?;
        Ok(traj
            .iter()
            .enumerate()
            .map(|(t, &a)| self.step_log_probs(t)[a])
            .sum())
    }

    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> Trajectory {
        (0..self.steps)
            .map(|t| {
                let p = self.step_probs(t);
                let u = uniform(rng);
                let mut acc = 0.0;
                for (a, &pa) in p.iter().enumerate() {
                    acc += pa;
                    if u < acc {
                        return a;
                    }
                }
                // u fell in the rounding gap above the cumulative sum
                p.iter()
                    .rposition(|&pa| pa > 0.0)
                    .unwrap_or(self.actions - 1)
            })
            .collect()
    }

    /// Gradient-ascent step `logits += lr * grad`.
    pub fn ascend(&mut self, grad: &[f64], learning_rate: f64) -> Result<()> {
        if grad.len() != self.logits.len() {
            return Err(Error::DimensionMismatch {
                left: self.logits.len(),
                right: grad.len(),
            });
        }
        for (z, g) in self.logits.iter_mut().zip(grad) {
            *z += learning_rate * g;
        }
        if let Some(i) = self
            .logits
            .iter()
            .position(|z| !z.is_finite() || z.abs() > LOGIT_BOUND)
        {
            return Err(Error::Numerical(format!(
                "logit {i} diverged to {}",
                self.logits[i]
            )));
        }
        Ok(())
    }

    /// FNV-1a over the logit bit patterns; identical policies hash equal.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for z in &self.logits {
            for b in z.to_bits().to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        }
        h
    }
}

/// A sampled trajectory and its log-probability under the sampling policy.
#[derive(Debug, Clone, PartialEq)]
pub struct Rollout {
    pub actions: Trajectory,
    pub log_prob: f64,
}

/// `n` i.i.d. trajectories.
pub fn sample_batch<R: RngCore + ?Sized>(
    policy: &TabularPolicy,
    n: usize,
    rng: &mut R,
) -> Vec<Rollout> {
    (0..n)
        .map(|_| {
            let actions = policy.sample(rng);
            let log_prob = policy
                .log_prob(&actions)
                .expect("sampled trajectories match the policy shape");
            Rollout { actions, log_prob }
        })
        .collect()
}

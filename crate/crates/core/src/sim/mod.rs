//! Desk-scale divergence simulator.
//!
//! A factorized softmax policy emits length-`T` trajectories over an
//! alphabet of `A` actions. Reward modes are Hamming balls around
//! prototype trajectories, each with its own success probability, so the
//! landscape is multimodal and small enough to enumerate exactly.

mod landscape;
mod policy;
mod train;

pub use landscape::{
    exact_expected_reward, trajectory_embedding, trajectory_reward, LandscapeConfig, ModeSpec,
    ENUMERATION_LIMIT,
};
pub use policy::{sample_batch, Rollout, TabularPolicy, LOGIT_BOUND};
pub use train::{
    build_step, train, Algorithm, StepBatch, StepRecord, TrainLog, TrainOutcome, TrainSettings,
    VALIDATION_SIZE,
};

/// One trajectory: an action index per step.
pub type Trajectory = alloc::vec::Vec<usize>;

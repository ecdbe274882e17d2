//! Group-relative (GRPO) and multi-group (MUPO) policy optimization.
//!
//! The crate is `no_std` with `alloc`. It covers:
//!
//!  - embedding geometry: normalization, cosine distance, pairwise diversity
//!    ([`embedding`]);
//!  - size-constrained k-means over rollout embeddings, with an exact
//!    min-cost-flow assignment step and a brute-force oracle ([`grouping`]);
//!  - the accuracy-gated diversity reward and its cosine-annealed weight
//!    ([`reward`]);
//!  - group-normalized advantages, load-balance weights and clipped
//!    surrogate objectives ([`policy`]);
//!  - a deterministic tabular-policy simulator with a multimodal reward
//!    landscape and exact enumeration oracles ([`sim`]);
//!  - acc@k, EMA smoothing and diversity curves ([`metrics`]).
//!
//! IO, config files, and the command line live in the `mupo-workbench` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod config;
pub mod embedding;
pub mod error;
pub mod grouping;
pub mod metrics;
pub mod model;
pub mod policy;
pub mod reward;
pub mod rng;
pub mod sim;

pub use sim::{train, Algorithm, LandscapeConfig, ModeSpec, TabularPolicy, TrainLog};

pub use config::{validate_config, AdvantageScope, MupoConfig, StdEstimator, ValidatedConfig};
pub use embedding::{cosine_distance, normalize, pairwise_diversity, EmbeddingMatrix};
pub use error::{Error, Result};
pub use grouping::{
    assign_min_size, assignment_cost, brute_force_assignment, constrained_kmeans, init_centroids,
    ClusterState,
};
pub use model::{GroupPartition, RolloutRecord};
pub use policy::{
    clipped_surrogate, grpo_advantages, grpo_objective, load_balance_weight, mupo_advantages,
    mupo_objective, AdvantageSet, Standardizer, SurrogateInputs,
};
pub use reward::{diversity_reward, lambda_schedule, total_reward, verify_format, RewardBreakdown};

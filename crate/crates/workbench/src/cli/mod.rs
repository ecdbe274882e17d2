use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use mupo_core::{AdvantageScope, StdEstimator};
use mupo_workbench::output::write_atomic;
use mupo_workbench::{ConfigOverrides, MockBehavior, MockEmbedServer, Resolved, Source};

pub mod offline;
pub mod simulate;

/// A bad flag or flag combination; exits with status 2.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Parser)]
#[command(
    name = "mupo",
    version,
    about = "GRPO / MUPO simulator and rollout analysis"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Train a tabular policy on a reward landscape and log its dynamics
    Simulate(simulate::SimulateArgs),
    /// acc@k and pairwise diversity per example
    Metrics(offline::MetricsArgs),
    /// Size-constrained clustering of each example's rollouts
    Partition(offline::PartitionArgs),
    /// Rewards and advantages of recorded rollouts
    Advantages(offline::AdvantagesArgs),
    /// Serve deterministic hash-based embeddings over HTTP
    MockEmbed(MockEmbedArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum AlgoArg {
    Grpo,
    Mupo,
}

impl From<AlgoArg> for mupo_core::Algorithm {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Grpo => Self::Grpo,
            AlgoArg::Mupo => Self::Mupo,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ScopeArg {
    GroupLocal,
    Global,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum EstimatorArg {
    Population,
    Sample,
}

/// Every config field as a flag, plus the file they override.
#[derive(Args, Debug, Default)]
pub struct ConfigFlags {
    /// TOML file with any of the config keys (N, K, G_min, beta, ...)
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Responses per example
    #[arg(long = "n", value_name = "N")]
    pub n: Option<usize>,
    /// Number of groups
    #[arg(long = "k", value_name = "K")]
    pub k: Option<usize>,
    /// Minimum group size
    #[arg(long = "gmin", visible_alias = "g-min", value_name = "G_MIN")]
    pub g_min: Option<usize>,
    /// Load-balance exponent
    #[arg(long)]
    pub beta: Option<f64>,
    /// Diversity weight at step 0
    #[arg(long)]
    pub lambda_max: Option<f64>,
    /// Diversity weight at the last step
    #[arg(long)]
    pub lambda_min: Option<f64>,
    /// Length of the diversity-weight schedule (and of a simulation run)
    #[arg(long)]
    pub t_max: Option<usize>,
    /// Ratio clip range
    #[arg(long)]
    pub clip_eps: Option<f64>,
    /// Advantages are zero when the reward std is below this
    #[arg(long)]
    pub std_floor: Option<f64>,
    /// Standardize rewards within each group or over the whole batch
    #[arg(long, value_enum)]
    pub advantage_scope: Option<ScopeArg>,
    /// Divide by N or by N - 1
    #[arg(long, value_enum)]
    pub std_estimator: Option<EstimatorArg>,
    /// Seed for every random stream
    #[arg(long)]
    pub seed: Option<u64>,
}

impl ConfigFlags {
    fn overrides(&self) -> ConfigOverrides {
        ConfigOverrides {
            n: self.n,
            k: self.k,
            g_min: self.g_min,
            beta: self.beta,
            lambda_max: self.lambda_max,
            lambda_min: self.lambda_min,
            t_max: self.t_max,
            clip_eps: self.clip_eps,
            std_floor: self.std_floor,
            advantage_scope: self.advantage_scope.map(|s| match s {
                ScopeArg::GroupLocal => AdvantageScope::GroupLocal,
                ScopeArg::Global => AdvantageScope::Global,
            }),
            std_estimator: self.std_estimator.map(|s| match s {
                EstimatorArg::Population => StdEstimator::Population,
                EstimatorArg::Sample => StdEstimator::Sample,
            }),
            seed: self.seed,
            learning_rate: None,
        }
    }

    /// defaults < `base` layers < config file < `extra` < flags.
    pub fn resolve(
        &self,
        default_learning_rate: f64,
        base: &[(Source, &ConfigOverrides)],
        extra: &ConfigOverrides,
    ) -> anyhow::Result<Resolved> {
        let file = match &self.config {
            Some(p) => ConfigOverrides::from_toml_file(p).map_err(|e| usage(e.to_string()))?,
            None => ConfigOverrides::default(),
        };
        let flags = self.overrides();
        let mut layers = base.to_vec();
        layers.push((Source::File, &file));
        layers.push((Source::Flag, extra));
        layers.push((Source::Flag, &flags));
        let resolved = Resolved::from_layers(default_learning_rate, &layers);
        mupo_core::validate_config(resolved.config).map_err(|e| usage(e.to_string()))?;
        Ok(resolved)
    }
}

/// Writes to `path` atomically, or to stdout when no path is given.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> anyhow::Result<()> {
    match path {
        Some(p) => write_atomic(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

#[derive(Args, Debug)]
pub struct MockEmbedArgs {
    /// Address to listen on
    #[arg(long, default_value = "127.0.0.1:8089")]
    pub listen: String,
    /// Embedding dimension
    #[arg(long, default_value_t = 8)]
    pub dim: usize,
}

pub fn mock_embed(args: MockEmbedArgs) -> anyhow::Result<()> {
    if args.dim == 0 {
        return Err(usage("--dim must be at least 1"));
    }
    let server = MockEmbedServer::bind(
        &args.listen,
        MockBehavior {
            dim: args.dim,
            ..MockBehavior::default()
        },
    )
    .with_context(|| format!("binding {}", args.listen))?;
    println!("listening on {}", server.url());
    server.wait();
    Ok(())
}

//! Commands over recorded rollout files.

use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use mupo_core::metrics::{acc_at_k, solved_within, ExampleSamples, SampleSet};
use mupo_core::reward::diversity_rewards;
use mupo_core::{
    constrained_kmeans, grpo_advantages, lambda_schedule, mupo_advantages, pairwise_diversity,
    total_reward, Algorithm, GroupPartition, MupoConfig, Standardizer,
};
use mupo_workbench::ingest::fill_embeddings;
use mupo_workbench::output::{csv_bytes, num};
use mupo_workbench::{
    ingest_rollouts, ConfigOverrides, EmbedClient, IngestOptions, IngestedExample,
};

use super::{emit, usage, AlgoArg, ConfigFlags};

#[derive(Args, Debug)]
pub struct IngestArgs {
    /// Rollouts, one JSON object per line
    #[arg(long = "in", value_name = "PATH")]
    pub input: PathBuf,
    /// Embedding service for rollouts without an `embedding` field
    /// (falls back to MUPO_EMBED_ENDPOINT)
    #[arg(long)]
    pub embed_endpoint: Option<String>,
    #[arg(long, default_value = mupo_core::reward::DEFAULT_OPEN_TAG)]
    pub open_tag: String,
    #[arg(long, default_value = mupo_core::reward::DEFAULT_CLOSE_TAG)]
    pub close_tag: String,
}

impl IngestArgs {
    fn load(&self, need_embeddings: bool) -> anyhow::Result<Vec<IngestedExample>> {
        let opts = IngestOptions {
            open_tag: self.open_tag.clone(),
            close_tag: self.close_tag.clone(),
            require_diversity_inputs: need_embeddings,
        };
        let mut examples = ingest_rollouts(&self.input, &opts)
            .with_context(|| format!("reading {}", self.input.display()))?;
        if need_embeddings {
            let client = EmbedClient::from_flag_or_env(self.embed_endpoint.as_deref());
            fill_embeddings(&mut examples, client.as_ref())?;
        }
        Ok(examples)
    }
}

#[derive(Args, Debug)]
pub struct MetricsArgs {
    #[command(flatten)]
    pub ingest: IngestArgs,
    /// Sample budgets for acc@k
    #[arg(long = "k", value_delimiter = ',', default_value = "1,2,4")]
    pub ks: Vec<usize>,
    /// Skip pairwise diversity (no embeddings needed)
    #[arg(long)]
    pub no_diversity: bool,
    /// Output CSV (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Label of the row aggregating every example.
const AGGREGATE_ID: &str = "__all__";

pub fn metrics(args: MetricsArgs) -> anyhow::Result<()> {
    if args.ks.is_empty() || args.ks.contains(&0) {
        return Err(usage("--k needs one or more values >= 1"));
    }
    let examples = args.ingest.load(!args.no_diversity)?;
    let mut set = SampleSet::default();
    let mut diversities = Vec::with_capacity(examples.len());
    for ex in &examples {
        let diversity = if args.no_diversity || ex.rollouts.len() < 2 {
            None
        } else {
            Some(pairwise_diversity(&ex.embeddings()?)?)
        };
        diversities.push(diversity);
        set.examples.push(ExampleSamples {
            example_id: ex.example_id.clone(),
            verdicts: ex.verdicts(),
            embeddings: None,
        });
    }

    let mut header = vec!["example_id".to_string(), "responses".to_string()];
    header.extend(args.ks.iter().map(|k| format!("acc@{k}")));
    header.push("diversity".into());
    let header: Vec<&str> = header.iter().map(String::as_str).collect();

    let mut rows = Vec::with_capacity(examples.len() + 1);
    for (ex, div) in set.examples.iter().zip(&diversities) {
        let mut row = vec![ex.example_id.clone(), ex.verdicts.len().to_string()];
        for &k in &args.ks {
            row.push(if solved_within(ex, k)? { "1" } else { "0" }.to_string());
        }
        row.push(div.map(num).unwrap_or_default());
        rows.push(row);
    }
    let responses: usize = set.examples.iter().map(|e| e.verdicts.len()).sum();
    let mut aggregate = vec![AGGREGATE_ID.to_string(), responses.to_string()];
    for &k in &args.ks {
        aggregate.push(num(acc_at_k(&set, k)?));
    }
    let defined: Vec<f64> = diversities.iter().flatten().copied().collect();
    aggregate.push(if defined.is_empty() {
        String::new()
    } else {
        num(defined.iter().sum::<f64>() / defined.len() as f64)
    });
    rows.push(aggregate);

    emit(args.out.as_deref(), &csv_bytes(&header, rows)?)
}

/// `cfg` with `N` set to the example's size, validated.
fn example_config(cfg: &MupoConfig, n: usize) -> anyhow::Result<MupoConfig> {
    let sized = MupoConfig { n, ..*cfg };
    Ok(sized.validate()?.config)
}

fn cluster(ex: &IngestedExample, cfg: &MupoConfig) -> anyhow::Result<GroupPartition> {
    let cfg = example_config(cfg, ex.rollouts.len())?;
    constrained_kmeans(&ex.embeddings()?, &cfg)
        .with_context(|| format!("clustering example `{}`", ex.example_id))
}

#[derive(Args, Debug)]
pub struct PartitionArgs {
    #[command(flatten)]
    pub ingest: IngestArgs,
    /// `N` is taken from each example's rollout count.
    #[command(flatten)]
    pub config: ConfigFlags,
    /// Output CSV (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn partition(args: PartitionArgs) -> anyhow::Result<()> {
    let resolved = args.config.resolve(0.0, &[], &ConfigOverrides::default())?;
    let examples = args.ingest.load(true)?;
    let mut rows = Vec::new();
    for ex in &examples {
        let partition = cluster(ex, &resolved.config)?;
        for r in &ex.rollouts {
            rows.push([
                ex.example_id.clone(),
                r.rollout_id.to_string(),
                partition.group_of(r.rollout_id).to_string(),
            ]);
        }
    }
    emit(
        args.out.as_deref(),
        &csv_bytes(&["example_id", "rollout_id", "group"], rows)?,
    )
}

#[derive(Args, Debug)]
pub struct AdvantagesArgs {
    #[command(flatten)]
    pub ingest: IngestArgs,
    #[arg(long, value_enum, default_value = "mupo")]
    pub algo: AlgoArg,
    /// Training step that sets the diversity weight
    #[arg(long, default_value_t = 0)]
    pub step: usize,
    #[command(flatten)]
    pub config: ConfigFlags,
    /// Output CSV (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn advantages(args: AdvantagesArgs) -> anyhow::Result<()> {
    let resolved = args.config.resolve(0.0, &[], &ConfigOverrides::default())?;
    let cfg = resolved.config;
    let algo: Algorithm = args.algo.into();
    if algo == Algorithm::Mupo && args.step > cfg.t_max {
        return Err(usage(format!(
            "--step {} is past t_max = {}",
            args.step, cfg.t_max
        )));
    }
    let examples = args.ingest.load(algo == Algorithm::Mupo)?;
    let standardizer = Standardizer::from(&cfg);

    let mut rows = Vec::new();
    for ex in &examples {
        let n = ex.rollouts.len();
        let (partition, r_div, lambda) = match algo {
            Algorithm::Grpo => (GroupPartition::single(n), vec![0.0; n], 0.0),
            Algorithm::Mupo => {
                let partition = cluster(ex, &cfg)?;
                let r_div = diversity_rewards(&partition, &ex.embeddings()?)?;
                let lambda = lambda_schedule(args.step, cfg.t_max, cfg.lambda_max, cfg.lambda_min)?;
                (partition, r_div, lambda)
            }
        };
        let rewards: Vec<_> = ex
            .rollouts
            .iter()
            .zip(&r_div)
            .map(|(r, &d)| total_reward(r.correct, r.well_formed, d, lambda))
            .collect();
        let totals: Vec<f64> = rewards.iter().map(|r| r.total).collect();
        let adv = match algo {
            Algorithm::Grpo => grpo_advantages(&totals, &standardizer),
            Algorithm::Mupo => {
                mupo_advantages(&totals, &partition, cfg.advantage_scope, &standardizer)
            }
        }
        .with_context(|| format!("advantages for example `{}`", ex.example_id))?;
        for (r, (rw, a)) in ex.rollouts.iter().zip(rewards.iter().zip(&adv.per_rollout)) {
            rows.push([
                ex.example_id.clone(),
                r.rollout_id.to_string(),
                partition.group_of(r.rollout_id).to_string(),
                num(rw.r_acc),
                num(rw.r_fmt),
                num(rw.r_div),
                num(rw.lambda),
                num(rw.total),
                num(*a),
            ]);
        }
    }
    emit(
        args.out.as_deref(),
        &csv_bytes(
            &[
                "example_id",
                "rollout_id",
                "group",
                "r_acc",
                "r_fmt",
                "r_div",
                "lambda",
                "reward",
                "advantage",
            ],
            rows,
        )?,
    )
}

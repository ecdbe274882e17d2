use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use mupo_core::sim::{train, Algorithm, TrainSettings};
use mupo_core::{LandscapeConfig, MupoConfig};
use mupo_workbench::output::{csv_bytes, num, write_atomic};
use mupo_workbench::{load_landscape, ConfigOverrides, Source};
use serde::Serialize;

use super::{usage, AlgoArg, ConfigFlags};

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub algo: AlgoArg,
    /// easy, collapse-demo, deceptive-modes, or a landscape TOML file
    #[arg(long)]
    pub landscape: String,
    /// Training steps; same as --t-max. The log has steps + 1 rows.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Gradient-ascent step size (defaults to the landscape's, else 0.1)
    #[arg(long)]
    pub learning_rate: Option<f64>,
    /// Output directory
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    #[command(flatten)]
    pub config: ConfigFlags,
}

#[derive(Serialize)]
struct LandscapeEcho<'a> {
    name: &'a str,
    #[serde(flatten)]
    landscape: &'a LandscapeConfig,
}

#[derive(Serialize)]
struct RunConfig<'a> {
    algo: Algorithm,
    landscape: LandscapeEcho<'a>,
    learning_rate: f64,
    config: MupoConfig,
    k_reduced_from: Option<usize>,
    sources: &'a std::collections::BTreeMap<&'static str, Source>,
}

const DEFAULT_LEARNING_RATE: f64 = 0.1;

pub fn run(args: SimulateArgs) -> anyhow::Result<()> {
    if let (Some(steps), Some(t_max)) = (args.steps, args.config.t_max) {
        if steps != t_max {
            return Err(usage(format!(
                "--steps {steps} conflicts with --t-max {t_max}; they name the same setting"
            )));
        }
    }
    if let Some(lr) = args.learning_rate {
        if !(lr >= 0.0 && lr.is_finite()) {
            return Err(usage("--learning-rate must be finite and >= 0"));
        }
    }
    let loaded = load_landscape(&args.landscape).map_err(|e| usage(e.to_string()))?;

    let from_landscape = ConfigOverrides {
        learning_rate: loaded.learning_rate,
        ..Default::default()
    };
    let from_flags = ConfigOverrides {
        t_max: args.steps,
        learning_rate: args.learning_rate,
        ..Default::default()
    };
    let resolved = args.config.resolve(
        DEFAULT_LEARNING_RATE,
        &[(Source::Landscape, &from_landscape)],
        &from_flags,
    )?;
    let validated = resolved.config.validate()?;
    if let Some(k) = validated.k_reduced_from {
        eprintln!(
            "warning: K = {k} with G_min = {} does not fit N = {}; using K = {}",
            resolved.config.g_min, resolved.config.n, validated.config.k
        );
    }
    let algo: Algorithm = args.algo.into();
    let settings = TrainSettings {
        learning_rate: resolved.learning_rate,
        track_expected_reward: true,
    };
    let outcome =
        train(algo, &resolved.config, &loaded.landscape, &settings).context("training failed")?;

    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;

    let metrics = csv_bytes(
        &[
            "step",
            "mean_r_acc",
            "mean_r_div",
            "lambda",
            "objective",
            "validation_diversity",
            "expected_reward_exact",
        ],
        outcome.log.records.iter().map(|r| {
            [
                r.step.to_string(),
                num(r.mean_r_acc),
                num(r.mean_r_div),
                num(r.lambda),
                num(r.objective),
                num(r.validation_diversity),
                r.expected_reward_exact.map(num).unwrap_or_default(),
            ]
        }),
    )?;
    write_atomic(&args.out.join("metrics.csv"), &metrics)?;

    let run_config = RunConfig {
        algo,
        landscape: LandscapeEcho {
            name: &loaded.name,
            landscape: &loaded.landscape,
        },
        learning_rate: resolved.learning_rate,
        config: validated.config,
        k_reduced_from: validated.k_reduced_from,
        sources: &resolved.sources,
    };
    let mut json = serde_json::to_string_pretty(&run_config)?;
    json.push('\n');
    write_atomic(&args.out.join("run_config.json"), json.as_bytes())?;

    let dim = loaded.landscape.embedding_dim();
    let mut header = vec!["index".to_string(), "trajectory".to_string()];
    header.extend((0..dim).map(|j| format!("e{j}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let embeddings = csv_bytes(
        &header,
        outcome
            .final_validation
            .iter()
            .zip(&outcome.final_validation_embeddings)
            .enumerate()
            .map(|(i, (traj, emb))| {
                let mut row = vec![
                    i.to_string(),
                    traj.iter()
                        .map(|a| a.to_string())
                        .collect::<Vec<_>>()
                        .join(" "),
                ];
                row.extend(emb.iter().map(|&x| num(x)));
                row
            }),
    )?;
    write_atomic(&args.out.join("embeddings_final.csv"), &embeddings)?;

    let last = outcome.log.records.last().expect("at least one step");
    println!(
        "{} steps on {}: mean_r_acc {:.3}, validation diversity {:.3} -> {:.3}; wrote {}",
        outcome.log.records.len(),
        loaded.name,
        last.mean_r_acc,
        outcome.log.records[0].validation_diversity,
        last.validation_diversity,
        args.out.display()
    );
    Ok(())
}

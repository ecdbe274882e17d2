//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the summary lines always reach
//! stdout. Exits non-zero if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use mupo_core::metrics::{acc_at_k, ema_smooth, SampleSet};
use mupo_core::reward::diversity_rewards;
use mupo_core::rng::{keyed, uniform, SimRng};
use mupo_core::sim::{
    build_step, train, Algorithm, LandscapeConfig, ModeSpec, TabularPolicy, TrainSettings,
};
use mupo_core::{
    assign_min_size, assignment_cost, brute_force_assignment, grpo_advantages, grpo_objective,
    init_centroids, lambda_schedule, load_balance_weight, mupo_advantages, mupo_objective,
    normalize, total_reward, AdvantageScope, EmbeddingMatrix, GroupPartition, MupoConfig,
    Standardizer, SurrogateInputs,
};
use mupo_workbench::{load_landscape, mock_embedding, MockBehavior, MockEmbedServer};

type Outcome = Result<String, String>;

struct Draw(SimRng);

impl Draw {
    fn new(seed: u64, stream: u64) -> Self {
        Draw(keyed(seed, stream, &[]))
    }

    fn unit(&mut self) -> f64 {
        uniform(&mut self.0)
    }

    fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    /// Integer in `lo..=hi`.
    fn int(&mut self, lo: usize, hi: usize) -> usize {
        lo + (self.unit() * (hi - lo + 1) as f64) as usize
    }

    fn unit_vector(&mut self, dim: usize) -> Vec<f64> {
        loop {
            let v: Vec<f64> = (0..dim).map(|_| self.range(-1.0, 1.0)).collect();
            if let Ok(u) = normalize(&v) {
                return u;
            }
        }
    }

    /// Random partition of `n` rollouts into `k` groups of at least `min` each.
    fn partition(&mut self, n: usize, k: usize, min: usize) -> GroupPartition {
        let mut labels: Vec<usize> = (0..k).flat_map(|g| std::iter::repeat_n(g, min)).collect();
        while labels.len() < n {
            labels.push(self.int(0, k - 1));
        }
        for i in (1..n).rev() {
            labels.swap(i, self.int(0, i));
        }
        GroupPartition::from_assignments(labels, k).unwrap()
    }
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn equation_exactness() -> Outcome {
    let tol = 1e-12;
    let start = lambda_schedule(0, 200, 0.4, 0.1).map_err(|e| e.to_string())?;
    let end = lambda_schedule(200, 200, 0.4, 0.1).map_err(|e| e.to_string())?;
    check(
        (start - 0.4).abs() <= tol && (end - 0.1).abs() <= tol,
        || format!("lambda endpoints {start}, {end}"),
    )?;
    let w = load_balance_weight(15, 3, 3, 1.0);
    check((w - 5.0 / 3.0).abs() <= tol, || format!("w_k = {w}"))?;
    for wf in [false, true] {
        let a = total_reward(false, wf, 0.0, 0.4).total;
        let b = total_reward(false, wf, 0.93, 0.4).total;
        check(a == b, || {
            format!("incorrect rollout total moved with r_div: {a} vs {b}")
        })?;
    }
    let same = EmbeddingMatrix::new(&vec![vec![0.6, 0.8, 0.0]; 9]).map_err(|e| e.to_string())?;
    let partition = GroupPartition::from_assignments(vec![0, 0, 0, 1, 1, 1, 2, 2, 2], 3).unwrap();
    let r = diversity_rewards(&partition, &same).map_err(|e| e.to_string())?;
    check(r.iter().all(|x| x.abs() <= tol), || {
        format!("R_div on identical embeddings {r:?}")
    })?;
    Ok(format!("lambda {start} -> {end}, w_k {w}"))
}

fn k1_degeneration() -> Outcome {
    let mut d = Draw::new(2, 0);
    let mut worst: f64 = 0.0;
    for case in 0..1000 {
        let n = d.int(2, 20);
        let rewards: Vec<f64> = (0..n).map(|_| d.range(-2.0, 3.0)).collect();
        let advantages =
            grpo_advantages(&rewards, &Standardizer::default()).map_err(|e| e.to_string())?;
        let inputs = SurrogateInputs {
            ratios: (0..n).map(|_| d.range(0.5, 1.5)).collect(),
            advantages,
            clip_eps: 0.2,
            token_counts: (0..n).map(|_| d.int(1, 64)).collect(),
        };
        let g = grpo_objective(&inputs).map_err(|e| e.to_string())?;
        let m = mupo_objective(&inputs, &GroupPartition::single(n), d.range(0.0, 3.0))
            .map_err(|e| e.to_string())?;
        let rel = if g == m { 0.0 } else { (g - m).abs() / g.abs() };
        worst = worst.max(rel);
        check(rel <= 1e-12, || {
            format!("case {case}: grpo {g} vs mupo {m}")
        })?;
    }
    Ok(format!("1000 instances, worst relative gap {worst:e}"))
}

fn advantage_properties() -> Outcome {
    let mut d = Draw::new(3, 0);
    let std = Standardizer::default();
    let mut worst_moment: f64 = 0.0;
    let mut worst_invariance: f64 = 0.0;
    for case in 0..1000 {
        let n = d.int(6, 15);
        let k = d.int(1, 3);
        let partition = d.partition(n, k, 2);
        let rewards: Vec<f64> = (0..n).map(|_| d.range(-1.0, 2.0)).collect();
        let scope = if case % 2 == 0 {
            AdvantageScope::GroupLocal
        } else {
            AdvantageScope::Global
        };
        let adv = mupo_advantages(&rewards, &partition, scope, &std).map_err(|e| e.to_string())?;
        check(adv.std_floor_hits == 0, || {
            format!("case {case}: floor fired on continuous rewards")
        })?;
        let scopes: Vec<Vec<usize>> = match scope {
            AdvantageScope::Global => vec![(0..n).collect()],
            AdvantageScope::GroupLocal => (0..k).map(|g| partition.members(g).collect()).collect(),
        };
        for members in &scopes {
            let m = members.len() as f64;
            let mean = members.iter().map(|&i| adv.per_rollout[i]).sum::<f64>() / m;
            let var = members
                .iter()
                .map(|&i| (adv.per_rollout[i] - mean).powi(2))
                .sum::<f64>()
                / m;
            let dev = mean.abs().max((var.sqrt() - 1.0).abs());
            worst_moment = worst_moment.max(dev);
            check(dev <= 1e-9, || {
                format!("case {case}: scope mean {mean}, std {}", var.sqrt())
            })?;
        }
        let (shift, scale) = (d.range(-10.0, 10.0), d.range(0.1, 10.0));
        let moved: Vec<f64> = rewards.iter().map(|r| scale * r + shift).collect();
        let adv2 = mupo_advantages(&moved, &partition, scope, &std).map_err(|e| e.to_string())?;
        for (a, b) in adv.per_rollout.iter().zip(&adv2.per_rollout) {
            worst_invariance = worst_invariance.max((a - b).abs());
            check((a - b).abs() <= 1e-9, || {
                format!("case {case}: {a} vs {b} after affine map")
            })?;
        }
    }
    Ok(format!(
        "1000 instances, moment error {worst_moment:e}, affine drift {worst_invariance:e}"
    ))
}

fn clustering_oracle() -> Outcome {
    let mut d = Draw::new(4, 0);
    let mut ties = 0;
    for case in 0..500 {
        let n = d.int(1, 8);
        let k = d.int(1, 3.min(n));
        let g_min = d.int(1, 2.min(n / k));
        let dim = d.int(2, 4);
        // a third of the instances draw rows from a small pool to force ties
        let rows: Vec<Vec<f64>> = if case % 3 == 0 {
            let pool: Vec<Vec<f64>> = (0..2).map(|_| d.unit_vector(dim)).collect();
            (0..n).map(|_| pool[d.int(0, 1)].clone()).collect()
        } else {
            (0..n).map(|_| d.unit_vector(dim)).collect()
        };
        let e = EmbeddingMatrix::new(&rows).map_err(|e| e.to_string())?;
        let centroids = if case % 2 == 0 {
            init_centroids(&e, k, 0)
                .map_err(|e| e.to_string())?
                .centroids
        } else {
            (0..k).map(|_| d.unit_vector(dim)).collect()
        };
        let fast =
            assign_min_size(&e, &centroids, g_min).map_err(|e| format!("case {case}: {e}"))?;
        let slow = brute_force_assignment(&e, &centroids, g_min)
            .map_err(|e| format!("case {case}: {e}"))?;
        let cf = assignment_cost(&e, &centroids, &fast).unwrap();
        let cs = assignment_cost(&e, &centroids, &slow).unwrap();
        check(cf == cs, || {
            format!("case {case}: cost {cf} vs brute force {cs}")
        })?;
        check(fast.assignments() == slow.assignments(), || {
            format!(
                "case {case}: {:?} vs brute force {:?}",
                fast.assignments(),
                slow.assignments()
            )
        })?;
        fast.check(g_min).map_err(|e| format!("case {case}: {e}"))?;
        if case % 3 == 0 {
            ties += 1;
        }
    }
    Ok(format!(
        "500 instances ({ties} with duplicated rows), costs and labels identical"
    ))
}

fn gradient_fidelity() -> Outcome {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut worst: f64 = 0.0;
    let mut informative = 0;
    for case in 0..50u64 {
        let mut d = Draw::new(case, 5);
        let (a, t, n) = (d.int(2, 3), d.int(1, 3), d.int(4, 6));
        let algo = if case % 2 == 0 {
            Algorithm::Grpo
        } else {
            Algorithm::Mupo
        };
        let land = LandscapeConfig {
            actions: a,
            steps: t,
            modes: vec![ModeSpec {
                prototype: (0..t).map(|_| d.int(0, a - 1)).collect(),
                radius: d.int(0, t - 1),
                success_prob: 0.7,
            }],
            init_logits: None,
        };
        let cfg = MupoConfig {
            n,
            k: d.int(1, 2),
            g_min: 2,
            t_max: 10,
            seed: case,
            ..MupoConfig::default()
        };
        let rows: Vec<Vec<f64>> = (0..t)
            .map(|_| (0..a).map(|_| d.range(-1.0, 1.0)).collect())
            .collect();
        let policy = TabularPolicy::from_logits(&rows, 1.0).map_err(|e| e.to_string())?;
        let batch = build_step(algo, &cfg, &land, &policy, (case % 7) as usize)
            .map_err(|e| e.to_string())?;
        let analytic = batch.gradient(&policy).map_err(|e| e.to_string())?;
        let h = 1e-5;
        let numeric: Vec<f64> = (0..analytic.len())
            .map(|j| {
                let (mut up, mut down) = (policy.clone(), policy.clone());
                up.logits_mut()[j] += h;
                down.logits_mut()[j] -= h;
                (batch.objective(&up).unwrap() - batch.objective(&down).unwrap()) / (2.0 * h)
            })
            .collect();
        let diff: Vec<f64> = analytic.iter().zip(&numeric).map(|(x, y)| x - y).collect();
        // both sides are pure rounding noise when the gradient vanishes
        let rel = norm(&diff) / norm(&analytic).max(norm(&numeric)).max(1e-6);
        worst = worst.max(rel);
        check(rel < 1e-4, || {
            format!("case {case}: relative error {rel:e}")
        })?;
        if norm(&analytic) > 1e-3 {
            informative += 1;
        }
    }
    check(informative >= 30, || {
        format!("only {informative} instances had a nonzero gradient")
    })?;
    Ok(format!(
        "50 instances ({informative} nonzero), worst relative error {worst:e}"
    ))
}

const SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

fn run_landscape(
    name: &str,
    algo: Algorithm,
    seed: u64,
) -> Result<mupo_core::sim::TrainOutcome, String> {
    let loaded = load_landscape(name).map_err(|e| e.to_string())?;
    let cfg = MupoConfig {
        t_max: 200,
        seed,
        ..MupoConfig::default()
    };
    let settings = TrainSettings {
        learning_rate: loaded.learning_rate.unwrap_or(0.1),
        track_expected_reward: true,
    };
    train(algo, &cfg, &loaded.landscape, &settings).map_err(|e| e.to_string())
}

fn collapse_dynamics() -> Outcome {
    let mut detail = Vec::new();
    let mut passes = 0;
    for seed in SEEDS {
        let ratio = |algo| -> Result<f64, String> {
            let log = run_landscape("collapse-demo", algo, seed)?.log;
            Ok(log.records[200].validation_diversity / log.records[0].validation_diversity)
        };
        let (g, m) = (ratio(Algorithm::Grpo)?, ratio(Algorithm::Mupo)?);
        if g < 0.5 && m > 0.8 {
            passes += 1;
        }
        detail.push(format!("seed {seed}: grpo {g:.2} mupo {m:.2}"));
    }
    let detail = detail.join(", ");
    check(passes >= 4, || format!("{passes}/5 seeds; {detail}"))?;
    Ok(format!("{passes}/5 seeds; {detail}"))
}

/// Means of the four quarters of `series`; the last absorbs the remainder.
fn quartile_means(series: &[f64]) -> [f64; 4] {
    let q = series.len() / 4;
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    [
        mean(&series[..q]),
        mean(&series[q..2 * q]),
        mean(&series[2 * q..3 * q]),
        mean(&series[3 * q..]),
    ]
}

fn exploration_advantage() -> Outcome {
    let mut wins = 0;
    let mut shaped = 0;
    let mut detail = Vec::new();
    for seed in SEEDS {
        let g = run_landscape("deceptive-modes", Algorithm::Grpo, seed)?.log;
        let m = run_landscape("deceptive-modes", Algorithm::Mupo, seed)?.log;
        let (gf, mf) = (
            g.records[200].expected_reward_exact.unwrap(),
            m.records[200].expected_reward_exact.unwrap(),
        );
        if mf > gf {
            wins += 1;
        }
        let q = quartile_means(&m.series(|r| r.mean_r_div));
        let peak = q.iter().copied().fold(f64::MIN, f64::max);
        if q[0] < peak && peak > q[3] {
            shaped += 1;
        }
        detail.push(format!(
            "seed {seed}: {gf:.3} vs {mf:.3}, r_div quartiles [{:.3} {:.3} {:.3} {:.3}]",
            q[0], q[1], q[2], q[3]
        ));
    }
    let detail = detail.join("; ");
    check(wins >= 4 && shaped >= 4, || {
        format!("mupo ahead {wins}/5, rise-then-decline {shaped}/5; {detail}")
    })?;
    Ok(format!(
        "mupo ahead {wins}/5, rise-then-decline {shaped}/5; {detail}"
    ))
}

fn metrics_contracts() -> Outcome {
    let mut d = Draw::new(8, 0);
    for case in 0..1000 {
        let examples = d.int(1, 6);
        let width = d.int(1, 8);
        let p = d.unit();
        let verdicts: Vec<Vec<bool>> = (0..examples)
            .map(|_| (0..width).map(|_| d.unit() < p).collect())
            .collect();
        let set = SampleSet::from_verdicts(&verdicts);
        let accs: Vec<f64> = (1..=width).map(|k| acc_at_k(&set, k).unwrap()).collect();
        check(accs.windows(2).all(|w| w[0] <= w[1]), || {
            format!("case {case}: {accs:?}")
        })?;
    }
    let acc = |v: &[&[bool]], k| acc_at_k(&SampleSet::from_verdicts(v), k).unwrap();
    let (t, f) = (true, false);
    let hand = [
        (acc(&[&[t, f, f, f]], 1), 1.0),
        (acc(&[&[t, f, f, f]], 4), 1.0),
        (acc(&[&[f, f, t, f]], 1), 0.0),
        (acc(&[&[f, f, t, f]], 4), 1.0),
        (acc(&[&[f, f, f, f], &[f, t, f, f]], 2), 0.5),
        (acc(&[&[t; 5], &[t; 5]], 3), 1.0),
        (acc(&[&[f; 5], &[f; 5]], 5), 0.0),
    ];
    check(hand.iter().all(|(got, want)| got == want), || {
        format!("hand examples {hand:?}")
    })?;

    check(
        ema_smooth(&[0.3; 20], 0.1).unwrap() == vec![0.3; 20],
        || "EMA moved a constant series".into(),
    )?;
    check(
        ema_smooth(&[0.0, 1.0], 0.5).unwrap() == vec![0.0, 0.5],
        || "EMA one-step recurrence".into(),
    )?;
    for case in 0..1000 {
        let len = d.int(1, 40);
        let series: Vec<f64> = (0..len).map(|_| d.range(-50.0, 50.0)).collect();
        let alpha = d.range(1e-3, 1.0);
        let out = ema_smooth(&series, alpha).unwrap();
        let lo = series.iter().copied().fold(f64::MAX, f64::min);
        let hi = series.iter().copied().fold(f64::MIN, f64::max);
        check(out.iter().all(|y| (lo..=hi).contains(y)), || {
            format!("case {case}: EMA left [{lo}, {hi}]")
        })?;
    }
    Ok("1000 monotone sample sets, 7 hand examples, 1000 bounded EMA series".into())
}

fn mupo(args: &[&str]) -> Result<std::process::Output, String> {
    Command::new(env!("CARGO_BIN_EXE_mupo"))
        .args(args)
        .env_remove("MUPO_EMBED_ENDPOINT")
        .output()
        .map_err(|e| e.to_string())
}

fn ok(out: &std::process::Output) -> Result<String, String> {
    if out.status.success() {
        Ok(String::from_utf8_lossy(&out.stdout).into_owned())
    } else {
        Err(format!(
            "exit {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        ))
    }
}

fn csv_column(text: &str, name: &str) -> Vec<String> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or("").split(',').collect();
    let idx = header
        .iter()
        .position(|h| *h == name)
        .expect("column present");
    lines
        .map(|l| l.split(',').nth(idx).unwrap_or("").to_string())
        .collect()
}

fn write_jsonl(path: &Path, rows: &[serde_json::Value]) {
    let text: String = rows.iter().map(|r| format!("{r}\n")).collect();
    std::fs::write(path, text).unwrap();
}

fn end_to_end_cli() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let p = |name: &str| dir.path().join(name).to_string_lossy().into_owned();

    let sim = |out: &str| {
        mupo(&[
            "simulate",
            "--algo",
            "mupo",
            "--landscape",
            "collapse-demo",
            "--steps",
            "200",
            "--seed",
            "1",
            "--k",
            "3",
            "--gmin",
            "3",
            "--n",
            "15",
            "--out",
            out,
        ])
    };
    ok(&sim(&p("run_a"))?)?;
    ok(&sim(&p("run_b"))?)?;
    let a = std::fs::read(p("run_a/metrics.csv")).map_err(|e| e.to_string())?;
    let b = std::fs::read(p("run_b/metrics.csv")).map_err(|e| e.to_string())?;
    check(a == b, || {
        "metrics.csv differs between identical runs".into()
    })?;
    let files = std::fs::read_dir(p("run_a"))
        .map_err(|e| e.to_string())?
        .count();
    check(files == 3, || format!("{files} output files"))?;
    let metrics = String::from_utf8(a).unwrap();
    check(metrics.lines().count() == 202, || {
        format!("{} metric lines", metrics.lines().count())
    })?;
    let lambdas = csv_column(&metrics, "lambda");
    let (l0, l_end): (f64, f64) = (lambdas[0].parse().unwrap(), lambdas[200].parse().unwrap());
    check(
        (l0 - 0.4).abs() < 1e-12 && (l_end - 0.1).abs() < 1e-12,
        || format!("lambda {l0} -> {l_end}"),
    )?;
    let run: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(p("run_a/run_config.json")).unwrap())
            .map_err(|e| e.to_string())?;
    let c = &run["config"];
    check(
        c["N"] == 15
            && c["K"] == 3
            && c["G_min"] == 3
            && c["beta"] == 1.0
            && c["lambda_max"] == 0.4
            && c["lambda_min"] == 0.1,
        || format!("run_config echo {c}"),
    )?;

    let server = MockEmbedServer::start(MockBehavior::default()).map_err(|e| e.to_string())?;
    let url = server.url();

    let verdicts = [false, false, true, false];
    let rows: Vec<_> = verdicts
        .iter()
        .enumerate()
        .map(|(i, &c)| serde_json::json!({"example_id": "q1", "response": format!("<think>try {i}</think> {i}"), "correct": c}))
        .collect();
    write_jsonl(Path::new(&p("acc.jsonl")), &rows);
    let out = ok(&mupo(&[
        "metrics",
        "--in",
        &p("acc.jsonl"),
        "--k",
        "1,4",
        "--embed-endpoint",
        &url,
    ])?)?;
    let (acc1, acc4) = (csv_column(&out, "acc@1"), csv_column(&out, "acc@4"));
    check(acc1[0] == "0" && acc4[0] == "1", || {
        format!("acc@1 {acc1:?}, acc@4 {acc4:?}")
    })?;

    let labels = [0usize, 1, 0, 1, 1, 0];
    let rows: Vec<_> = labels
        .iter()
        .map(|l| serde_json::json!({"example_id": "q2", "response": "r", "reasoning": format!("axis:{l}"), "correct": true}))
        .collect();
    write_jsonl(Path::new(&p("clusters.jsonl")), &rows);
    let out = ok(&mupo(&[
        "partition",
        "--in",
        &p("clusters.jsonl"),
        "--k",
        "2",
        "--gmin",
        "3",
        "--embed-endpoint",
        &url,
    ])?)?;
    let groups: Vec<usize> = csv_column(&out, "group")
        .iter()
        .map(|g| g.parse().unwrap())
        .collect();
    let e = EmbeddingMatrix::new(
        &labels
            .iter()
            .map(|l| mock_embedding(&format!("axis:{l}"), 8))
            .collect::<Vec<_>>(),
    )
    .unwrap();
    let centroids = vec![mock_embedding("axis:0", 8), mock_embedding("axis:1", 8)];
    let oracle = brute_force_assignment(&e, &centroids, 3).map_err(|e| e.to_string())?;
    check(groups == oracle.assignments() && groups == labels, || {
        format!("groups {groups:?}, oracle {:?}", oracle.assignments())
    })?;

    let rows = vec![
        serde_json::json!({"example_id": "q3", "response": "<think>a</think> 1", "correct": true}),
        serde_json::json!({"example_id": "q3", "response": "<think>b</think> 2", "correct": false}),
    ];
    write_jsonl(Path::new(&p("adv.jsonl")), &rows);
    for algo in ["grpo", "mupo"] {
        let out = ok(&mupo(&[
            "advantages",
            "--in",
            &p("adv.jsonl"),
            "--algo",
            algo,
            "--embed-endpoint",
            &url,
        ])?)?;
        let adv = csv_column(&out, "advantage");
        check(adv == ["1", "-1"], || format!("{algo} advantages {adv:?}"))?;
    }
    check(server.requests() >= 3, || {
        format!("mock saw {} requests", server.requests())
    })?;
    Ok(format!(
        "byte-identical reruns, 201 rows, config echoed, offline examples via mock ({} requests)",
        server.requests()
    ))
}

type Criterion = (&'static str, fn() -> Outcome, Duration);

fn main() {
    let criteria: [Criterion; 9] = [
        (
            "equation exactness",
            equation_exactness,
            Duration::from_secs(1),
        ),
        ("K=1 degeneration", k1_degeneration, Duration::from_secs(5)),
        (
            "advantage properties",
            advantage_properties,
            Duration::from_secs(5),
        ),
        (
            "clustering oracle equivalence",
            clustering_oracle,
            Duration::from_secs(30),
        ),
        (
            "gradient fidelity",
            gradient_fidelity,
            Duration::from_secs(30),
        ),
        (
            "collapse dynamics",
            collapse_dynamics,
            Duration::from_secs(120),
        ),
        (
            "exploration advantage",
            exploration_advantage,
            Duration::from_secs(180),
        ),
        (
            "metrics contracts",
            metrics_contracts,
            Duration::from_secs(5),
        ),
        ("end-to-end CLI", end_to_end_cli, Duration::from_secs(60)),
    ];
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let result = match result {
            Ok(d) if elapsed > *budget => {
                Err(format!("took {elapsed:.2?}, budget {budget:?}; {d}"))
            }
            other => other,
        };
        match result {
            Ok(detail) => println!(
                "criterion {} ({name}): PASS in {elapsed:.2?} | {detail}",
                i + 1
            ),
            Err(detail) => {
                failed += 1;
                println!(
                    "criterion {} ({name}): FAIL in {elapsed:.2?} | {detail}",
                    i + 1
                );
            }
        }
    }
    println!(
        "acceptance: {}/{} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

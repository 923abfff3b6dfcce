//! `gamimp` — train boosted additive models and measure grouped feature
//! importance from the command line.
//!
//! Every subcommand is deterministic given its flags: rerunning with the same
//! arguments reproduces byte-identical output files (the manifest's wall time
//! is the only exception, and it lives only in the manifest). Usage errors
//! exit 2, runtime failures exit 1 and leave no partial outputs.

mod output;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use gamimp::baselines::{
    greedy_forward_selection, grouped_permutation_importance, selection_csv, GpiMetric,
    GpiResult, SelectionObjective,
};
use gamimp::bench::{bench_csv, scaling_probe, wide_dataset};
use gamimp::evaluation::{
    cumulative_curve_csv, cumulative_importance_curve, cv_evaluate, top_k_curve_csv,
    top_k_groups_curve,
};
use gamimp::importance::importance_report_with_pairs;
use gamimp::synthetic::{correlation_sweep, generate, SynthConfig, SynthVariant};
use gamimp::{
    load_csv, load_groups, train, FeatureGroup, GamModel, TrainConfig,
};
use output::Outputs;
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "gamimp",
    version,
    about = "Boosted additive models with grouped feature importance",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded two-feature synthetic dataset
    Synth(SynthArgs),
    /// Train a model on a CSV dataset
    Train(TrainArgs),
    /// Individual and grouped importance for a trained model
    Importance(ImportanceArgs),
    /// Grouped permutation-importance baseline
    Gpi(GpiArgs),
    /// Importance across a grid of feature-correlation strengths
    Sweep(SweepArgs),
    /// Greedy forward selection over feature groups, with ranking curves
    Select(SelectArgs),
    /// Subject-aware stratified k-fold cross validation
    Cv(CvArgs),
    /// Wall-clock comparison against the permutation baseline
    Bench(BenchArgs),
}

/// Training knobs shared by every command that fits a model.
#[derive(Args)]
struct TrainOpts {
    /// Quantile bins per feature
    #[arg(long, default_value_t = 256)]
    bins: usize,
    /// Boosting learning rate
    #[arg(long, default_value_t = 0.05)]
    learning_rate: f64,
    /// Maximum boosting rounds
    #[arg(long, default_value_t = 2000)]
    rounds: usize,
    /// Rounds without validation improvement before stopping
    #[arg(long, default_value_t = 50)]
    patience: usize,
    /// Fraction of rows held out for early stopping; 0 disables it
    #[arg(long, default_value_t = 0.15)]
    validation_fraction: f64,
}

impl TrainOpts {
    fn config(&self, seed: u64, pairs: Vec<(String, String)>) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            rounds: self.rounds,
            patience: self.patience,
            validation_fraction: self.validation_fraction,
            max_bins: self.bins,
            pairs,
            seed,
        }
    }
}

#[derive(Args)]
struct SynthArgs {
    /// additive_copy | additive_negated | conflicting_independent |
    /// conflicting_correlated | additive_correlated | discrete_eps
    #[arg(long)]
    variant: String,
    /// Number of rows
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Offset half-width for the *_correlated variants [default: 2]
    #[arg(long)]
    b: Option<f64>,
    /// Two-point offset magnitude for discrete_eps [default: 2]
    #[arg(long)]
    eps: Option<f64>,
    /// Use z = -x instead of z = x in the additive-copy family
    #[arg(long)]
    negate: bool,
    /// Output directory, or a .csv path for the dataset itself
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    /// Input dataset CSV
    #[arg(long)]
    data: PathBuf,
    /// Target column name
    #[arg(long)]
    target: String,
    /// Column holding subject identifiers
    #[arg(long)]
    subject_column: Option<String>,
    /// Column holding sample weights
    #[arg(long)]
    weight_column: Option<String>,
    #[command(flatten)]
    train: TrainOpts,
    /// Pair interaction as "left,right"; repeatable
    #[arg(long = "pairs", value_parser = parse_pair)]
    pairs: Vec<(String, String)>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory, or a .json path for the model itself
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ImportanceArgs {
    /// Trained model JSON
    #[arg(long)]
    model: PathBuf,
    /// Dataset CSV to average contributions over
    #[arg(long)]
    data: PathBuf,
    /// Target column name in the dataset
    #[arg(long, default_value = "y")]
    target: String,
    /// Column holding sample weights
    #[arg(long)]
    weight_column: Option<String>,
    /// Group file: JSON object mapping group names to feature-name arrays
    #[arg(long)]
    groups: Option<PathBuf>,
    /// Fold pair terms into group sums when both endpoints are members
    #[arg(long)]
    include_pairs: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GpiArgs {
    /// Trained model JSON
    #[arg(long)]
    model: PathBuf,
    /// Dataset CSV to score on
    #[arg(long)]
    data: PathBuf,
    /// Target column name in the dataset
    #[arg(long, default_value = "y")]
    target: String,
    /// Column holding sample weights
    #[arg(long)]
    weight_column: Option<String>,
    /// Group file; without it one group holding every model feature is scored
    #[arg(long)]
    groups: Option<PathBuf>,
    /// auc | logloss
    #[arg(long, default_value = "auc")]
    metric: String,
    /// Permutation repeats per group
    #[arg(long, default_value_t = 10)]
    repeats: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// conflicting_correlated | additive_correlated
    #[arg(long)]
    variant: String,
    /// Rows per sweep point
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    /// Comma-separated grid of offset half-widths; defaults per variant
    #[arg(long)]
    b: Option<String>,
    #[command(flatten)]
    train: TrainOpts,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SelectArgs {
    /// Input dataset CSV
    #[arg(long)]
    data: PathBuf,
    /// Target column name
    #[arg(long, default_value = "y")]
    target: String,
    /// Column holding subject identifiers
    #[arg(long)]
    subject_column: Option<String>,
    /// Column holding sample weights
    #[arg(long)]
    weight_column: Option<String>,
    /// Group file naming the selection units
    #[arg(long)]
    groups: PathBuf,
    /// group_importance | cv_auc
    #[arg(long, default_value = "group_importance")]
    objective: String,
    /// Units to select; defaults to all of them
    #[arg(long)]
    budget: Option<usize>,
    #[command(flatten)]
    train: TrainOpts,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CvArgs {
    /// Input dataset CSV
    #[arg(long)]
    data: PathBuf,
    /// Target column name
    #[arg(long, default_value = "y")]
    target: String,
    /// Column holding subject identifiers
    #[arg(long)]
    subject_column: Option<String>,
    /// Column holding sample weights
    #[arg(long)]
    weight_column: Option<String>,
    /// Number of folds
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[command(flatten)]
    train: TrainOpts,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Rows in the generated timing dataset
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    /// Features in the generated timing dataset
    #[arg(long, default_value_t = 20)]
    features: usize,
    /// Permutation repeats for the baseline
    #[arg(long, default_value_t = 10)]
    repeats: usize,
    /// Timing runs per method; the first is a discarded warmup
    #[arg(long, default_value_t = 5)]
    runs: usize,
    /// Boosting rounds for the timing model
    #[arg(long, default_value_t = 30)]
    rounds: usize,
    /// "all" or a comma-separated list of feature names to score
    #[arg(long, default_value = "all")]
    group: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Time group importance over n and k grids and fit log-log slopes
    /// instead of the head-to-head comparison
    #[arg(long)]
    probe: bool,
    /// Comma-separated n grid for --probe
    #[arg(long, default_value = "12500,25000,50000,100000")]
    probe_n: String,
    /// Comma-separated k grid for --probe
    #[arg(long, default_value = "4,8,16,32")]
    probe_k: String,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth(args) => cmd_synth(args),
        Command::Train(args) => cmd_train(args),
        Command::Importance(args) => cmd_importance(args),
        Command::Gpi(args) => cmd_gpi(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Select(args) => cmd_select(args),
        Command::Cv(args) => cmd_cv(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn parse_pair(s: &str) -> Result<(String, String), String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts[..] {
        [a, b] if !a.is_empty() && !b.is_empty() => Ok((a.to_string(), b.to_string())),
        _ => Err(format!("expected \"left,right\", got {s:?}")),
    }
}

fn parse_f64_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>()
                .map_err(|_| anyhow::anyhow!("bad number {t:?} in list {text:?}"))
        })
        .collect()
}

fn parse_usize_list(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<usize>()
                .map_err(|_| anyhow::anyhow!("bad count {t:?} in list {text:?}"))
        })
        .collect()
}

fn cmd_synth(args: SynthArgs) -> Result<()> {
    let mut outputs = Outputs::new(&args.out)?;
    let variant: SynthVariant = args.variant.parse()?;
    let config = SynthConfig {
        variant,
        n: args.n,
        seed: args.seed,
        b: args.b.or_else(|| variant.needs_b().then_some(2.0)),
        eps: args.eps.or_else(|| variant.needs_eps().then_some(2.0)),
        negate: args.negate,
    };
    let dataset = generate(&config)?;
    let path = outputs.plan.path_for("csv", "dataset.csv");
    outputs.stage(path, dataset.to_csv_string());
    outputs.commit("synth", args.seed, serde_json::to_value(&config)?)
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    let mut outputs = Outputs::new(&args.out)?;
    outputs.record_input(&args.data)?;
    let dataset = load_csv(
        &args.data,
        &args.target,
        args.subject_column.as_deref(),
        args.weight_column.as_deref(),
    )?;
    let config = args.train.config(args.seed, args.pairs);
    let model = train(&dataset, &config)?;
    let path = outputs.plan.path_for("json", "model.json");
    outputs.stage(path, model.to_json());
    outputs.commit("train", args.seed, serde_json::to_value(&config)?)
}

fn cmd_importance(args: ImportanceArgs) -> Result<()> {
    let mut outputs = Outputs::new(&args.out)?;
    outputs.record_input(&args.model)?;
    outputs.record_input(&args.data)?;
    let model = GamModel::load(&args.model)?;
    let dataset = load_csv(&args.data, &args.target, None, args.weight_column.as_deref())?;
    let groups = match &args.groups {
        Some(path) => {
            outputs.record_input(path)?;
            gamimp::data::load_groups_for_names(path, &model.feature_names())?
        }
        // without a group file, report each feature on its own plus the
        // all-features total the relative column is measured against
        None => {
            let names = model.feature_names();
            let mut groups = names
                .iter()
                .map(|n| FeatureGroup::new(n, vec![n.clone()]))
                .collect::<gamimp::Result<Vec<_>>>()?;
            groups.push(FeatureGroup::new("total", names)?);
            groups
        }
    };
    let report = importance_report_with_pairs(&model, &dataset, &groups, args.include_pairs)?;
    let json_path = outputs.plan.path_for("json", "report.json");
    let csv_path = outputs.plan.path_for("csv", "report.csv");
    outputs.stage(json_path, serde_json::to_vec_pretty(&report)?);
    outputs.stage(csv_path, report.to_csv());
    outputs.commit(
        "importance",
        0,
        json!({
            "model": args.model.display().to_string(),
            "data": args.data.display().to_string(),
            "target": args.target,
            "groups": args.groups.as_ref().map(|p| p.display().to_string()),
            "include_pairs": args.include_pairs,
        }),
    )
}

fn cmd_gpi(args: GpiArgs) -> Result<()> {
    let mut outputs = Outputs::new(&args.out)?;
    outputs.record_input(&args.model)?;
    outputs.record_input(&args.data)?;
    let model = GamModel::load(&args.model)?;
    let dataset = load_csv(&args.data, &args.target, None, args.weight_column.as_deref())?;
    let metric: GpiMetric = args.metric.parse()?;
    let groups = match &args.groups {
        Some(path) => {
            outputs.record_input(path)?;
            gamimp::data::load_groups_for_names(path, &model.feature_names())?
        }
        None => vec![FeatureGroup::new("all", model.feature_names())?],
    };
    let results: Vec<GpiResult> = groups
        .iter()
        .map(|g| grouped_permutation_importance(&model, &dataset, g, metric, args.repeats, args.seed))
        .collect::<gamimp::Result<_>>()?;
    let mut csv = String::from("group,metric,baseline,mean_drop,repeats\n");
    for r in &results {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            r.group, r.metric, r.baseline, r.mean_drop, r.repeats
        ));
    }
    let json_path = outputs.plan.path_for("json", "gpi.json");
    let csv_path = outputs.plan.path_for("csv", "gpi.csv");
    outputs.stage(json_path, serde_json::to_vec_pretty(&results)?);
    outputs.stage(csv_path, csv);
    outputs.commit(
        "gpi",
        args.seed,
        json!({
            "model": args.model.display().to_string(),
            "data": args.data.display().to_string(),
            "target": args.target,
            "metric": metric,
            "repeats": args.repeats,
            "groups": args.groups.as_ref().map(|p| p.display().to_string()),
        }),
    )
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let mut outputs = Outputs::new(&args.out)?;
    let variant: SynthVariant = args.variant.parse()?;
    let grid = match &args.b {
        Some(text) => parse_f64_list(text)?,
        // b = 0 makes the conflicting target single-class (x > x is never
        // true), so that grid starts at 0.5
        None => match variant {
            SynthVariant::AdditiveCorrelated => {
                vec![0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 1000.0]
            }
            _ => vec![0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 1000.0],
        },
    };
    let base = SynthConfig::new(variant, args.n, args.seed);
    let config = args.train.config(args.seed, Vec::new());
    let sweep = correlation_sweep(&base, &grid, &config)?;
    let csv_path = outputs.plan.path_for("csv", "sweep.csv");
    let json_path = outputs.plan.path_for("json", "sweep.json");
    outputs.stage(csv_path, sweep.to_csv());
    outputs.stage(json_path, serde_json::to_vec_pretty(&sweep)?);
    outputs.commit(
        "sweep",
        args.seed,
        json!({
            "variant": variant,
            "n": args.n,
            "b": grid,
            "train": serde_json::to_value(&config)?,
        }),
    )
}

fn cmd_select(args: SelectArgs) -> Result<()> {
    let mut outputs = Outputs::new(&args.out)?;
    outputs.record_input(&args.data)?;
    outputs.record_input(&args.groups)?;
    let dataset = load_csv(
        &args.data,
        &args.target,
        args.subject_column.as_deref(),
        args.weight_column.as_deref(),
    )?;
    let units = load_groups(&args.groups, &dataset)?;
    let objective: SelectionObjective = args.objective.parse()?;
    let budget = args.budget.unwrap_or(units.len());
    let config = args.train.config(args.seed, Vec::new());

    let model = train(&dataset, &config)?;
    let report = importance_report_with_pairs(&model, &dataset, &units, false)?;
    let ranked: Vec<FeatureGroup> = report
        .ranking
        .iter()
        .map(|name| {
            units
                .iter()
                .find(|u| &u.name == name)
                .expect("ranking only holds unit names")
                .clone()
        })
        .collect();
    let steps = greedy_forward_selection(&dataset, &units, budget, objective, &config, args.seed)?;
    let top_k = top_k_groups_curve(&dataset, &ranked, &config, 5)?;
    let cumulative = cumulative_importance_curve(&model, &dataset, &ranked)?;

    let selection_path = outputs.plan.path_for("csv", "selection.csv");
    let topk_path = outputs.plan.sibling("topk.csv", "topk.csv");
    let cumulative_path = outputs.plan.sibling("cumulative.csv", "cumulative.csv");
    let json_path = outputs.plan.path_for("json", "select.json");
    outputs.stage(selection_path, selection_csv(&steps));
    outputs.stage(topk_path, top_k_curve_csv(&top_k));
    outputs.stage(cumulative_path, cumulative_curve_csv(&cumulative));
    outputs.stage(
        json_path,
        serde_json::to_vec_pretty(&json!({
            "selection": steps,
            "report": report,
            "top_k": top_k,
            "cumulative": cumulative
                .iter()
                .map(|(m, v)| json!({ "m": m, "importance": v }))
                .collect::<Vec<_>>(),
        }))?,
    );
    outputs.commit(
        "select",
        args.seed,
        json!({
            "data": args.data.display().to_string(),
            "groups": args.groups.display().to_string(),
            "objective": objective,
            "budget": budget,
            "train": serde_json::to_value(&config)?,
        }),
    )
}

fn cmd_cv(args: CvArgs) -> Result<()> {
    let mut outputs = Outputs::new(&args.out)?;
    outputs.record_input(&args.data)?;
    let dataset = load_csv(
        &args.data,
        &args.target,
        args.subject_column.as_deref(),
        args.weight_column.as_deref(),
    )?;
    let config = args.train.config(args.seed, Vec::new());
    let report = cv_evaluate(&dataset, &config, args.k, args.seed)?;
    let json_path = outputs.plan.path_for("json", "report.json");
    let csv_path = outputs.plan.path_for("csv", "report.csv");
    outputs.stage(json_path, serde_json::to_vec_pretty(&report)?);
    outputs.stage(csv_path, report.to_csv());
    outputs.commit(
        "cv",
        args.seed,
        json!({
            "data": args.data.display().to_string(),
            "k": args.k,
            "train": serde_json::to_value(&config)?,
        }),
    )
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let mut outputs = Outputs::new(&args.out)?;
    if args.probe {
        let n_values = parse_usize_list(&args.probe_n)?;
        let k_values = parse_usize_list(&args.probe_k)?;
        let probe = scaling_probe(&n_values, &k_values, args.seed, args.runs)?;
        println!(
            "n-axis slope {:.3} (r2 {:.3}), k-axis slope {:.3} (r2 {:.3})",
            probe.n_slope, probe.n_r2, probe.k_slope, probe.k_r2
        );
        let csv_path = outputs.plan.path_for("csv", "probe.csv");
        let json_path = outputs.plan.path_for("json", "probe.json");
        outputs.stage(csv_path, probe.to_csv());
        outputs.stage(json_path, serde_json::to_vec_pretty(&probe)?);
        return outputs.commit(
            "bench",
            args.seed,
            json!({
                "probe": true,
                "n": n_values,
                "k": k_values,
                "runs": args.runs,
            }),
        );
    }

    let dataset = wide_dataset(args.n, args.features, args.seed)?;
    let config = TrainOpts {
        bins: 256,
        learning_rate: 0.05,
        rounds: args.rounds,
        patience: 50,
        validation_fraction: 0.15,
    }
    .config(args.seed, Vec::new());
    let model = train(&dataset, &config)?;
    let group = if args.group == "all" {
        FeatureGroup::new("all", model.feature_names())?
    } else {
        FeatureGroup::new(
            args.group.clone(),
            args.group.split(',').map(|s| s.trim().to_string()).collect(),
        )?
    };
    let (ours, gpi, speedup) = gamimp::bench::run_bench(&dataset, &model, &group, args.repeats, args.runs)?;
    println!(
        "group importance {:.4}s, permutation baseline {:.4}s, speedup {:.1}x",
        ours.seconds, gpi.seconds, speedup
    );
    let csv_path = outputs.plan.path_for("csv", "bench.csv");
    let json_path = outputs.plan.path_for("json", "bench.json");
    outputs.stage(csv_path, bench_csv(&[ours.clone(), gpi.clone()]));
    outputs.stage(
        json_path,
        serde_json::to_vec_pretty(&json!({
            "ours": ours,
            "baseline": gpi,
            "speedup": speedup,
        }))?,
    );
    outputs.commit(
        "bench",
        args.seed,
        json!({
            "n": args.n,
            "features": args.features,
            "repeats": args.repeats,
            "runs": args.runs,
            "rounds": args.rounds,
            "group": args.group,
        }),
    )
}

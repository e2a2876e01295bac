//! Command-line driver: data validation, difficulty training and
//! prediction, routing, trade-off sweeps and report rendering over the
//! JSONL file formats of the core crate.

mod config;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use detroute_core::{
    compare_strategies, evaluate_predictor, load_dataset, load_detector_run,
    load_difficulty_scores, load_features, load_model, mean_average_precision, points_from_csv,
    render_report, save_model, sweep, to_jsonl, train_nu_svr, write_assignment, DetectorRun,
    DifficultyScore, ReportFormat,
};

use config::{
    require_path, resolve_eval_config, resolve_harness_config, resolve_latency,
    resolve_svr_config, EvalFlags, FileConfig, HarnessFlags, SvrFlags,
};

#[derive(Parser)]
#[command(
    name = "detroute",
    about = "Accuracy-latency trade-offs for cached object-detector runs: VOC-style evaluation, nu-SVR image difficulty, easy/hard routing and sweep reports",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load and cross-check inputs, reporting schema or reference errors
    Validate(ValidateArgs),
    /// Evaluate one detections file against ground truth (mAP report)
    Eval(EvalArgs),
    /// Train the nu-SVR difficulty model on features and target scores
    TrainDifficulty(TrainArgs),
    /// Predict difficulty scores for a features file with a trained model
    Predict(PredictArgs),
    /// Partition images into easy/hard and write the assignment
    Route(RouteArgs),
    /// Sweep split fractions and emit CSV + markdown trade-off reports
    Sweep(SweepArgs),
    /// Re-render a sweep CSV as csv or markdown
    Report(ReportArgs),
}

#[derive(Args)]
struct ValidateArgs {
    /// Ground-truth JSONL
    #[arg(long)]
    dataset: PathBuf,
    /// Fast-run detections JSONL
    #[arg(long)]
    fast_run: Option<PathBuf>,
    /// Slow-run detections JSONL
    #[arg(long)]
    slow_run: Option<PathBuf>,
    /// Features JSONL
    #[arg(long)]
    features: Option<PathBuf>,
    /// Difficulty scores JSONL
    #[arg(long)]
    scores: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Ground-truth JSONL
    #[arg(long)]
    dataset: PathBuf,
    /// Detections JSONL to evaluate
    #[arg(long)]
    run: PathBuf,
    #[command(flatten)]
    eval: EvalFlags,
    /// Output format (json)
    #[arg(long, default_value = "json")]
    format: String,
    /// Write the report here instead of stdout
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    /// Features JSONL (raw vectors; L2 normalization is applied)
    #[arg(long)]
    features: PathBuf,
    /// Ground-truth difficulty scores JSONL (training targets)
    #[arg(long)]
    scores: PathBuf,
    #[command(flatten)]
    svr: SvrFlags,
    /// Where to write the model JSON
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    /// Trained model JSON
    #[arg(long)]
    model: PathBuf,
    /// Features JSONL to score
    #[arg(long)]
    features: PathBuf,
    /// Write the difficulty JSONL here instead of stdout
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct RouteArgs {
    /// Difficulty scores JSONL
    #[arg(long)]
    scores: PathBuf,
    /// Split mode: difficulty | random
    #[arg(long, default_value = "difficulty")]
    mode: String,
    /// Easy fraction in [0, 1]
    #[arg(long)]
    fraction: Option<f64>,
    /// Explicit difficulty threshold (difficulty mode only)
    #[arg(long, conflicts_with = "fraction")]
    threshold: Option<f64>,
    /// Seed for the random mode
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the assignment JSONL here instead of stdout
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// TOML config; flags override file values
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Fast-run detections JSONL
    #[arg(long)]
    fast_run: Option<PathBuf>,
    /// Slow-run detections JSONL
    #[arg(long)]
    slow_run: Option<PathBuf>,
    /// Constant per-image latency of the fast run, seconds
    #[arg(long, value_name = "S")]
    fast_latency: Option<f64>,
    /// Per-image latency JSONL of the fast run
    #[arg(long, conflicts_with = "fast_latency")]
    fast_latency_file: Option<PathBuf>,
    /// Constant per-image latency of the slow run, seconds
    #[arg(long, value_name = "S")]
    slow_latency: Option<f64>,
    /// Per-image latency JSONL of the slow run
    #[arg(long, conflicts_with = "slow_latency")]
    slow_latency_file: Option<PathBuf>,
    /// Difficulty scores JSONL (alternative: --model with --features)
    #[arg(long)]
    scores: Option<PathBuf>,
    /// Trained model JSON, used with --features when --scores is absent
    #[arg(long, conflicts_with = "scores")]
    model: Option<PathBuf>,
    /// Features JSONL scored by --model
    #[arg(long)]
    features: Option<PathBuf>,
    #[command(flatten)]
    harness: HarnessFlags,
    #[command(flatten)]
    eval: EvalFlags,
    /// Directory receiving sweep.csv and sweep.md
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Sweep CSV produced by the sweep subcommand
    #[arg(long)]
    points: PathBuf,
    /// Output format: csv | markdown
    #[arg(long, default_value = "markdown")]
    format: String,
    /// Write here instead of stdout
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Validate(args) => cmd_validate(args),
        Command::Eval(args) => cmd_eval(args),
        Command::TrainDifficulty(args) => cmd_train_difficulty(args),
        Command::Predict(args) => cmd_predict(args),
        Command::Route(args) => cmd_route(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Report(args) => cmd_report(args),
    }
}

fn emit(output: Option<&PathBuf>, text: &str) -> Result<()> {
    match output {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_validate(args: ValidateArgs) -> Result<()> {
    let dataset = load_dataset(&args.dataset)?;
    if dataset.is_empty() {
        bail!("dataset {} contains no images", args.dataset.display());
    }
    println!("dataset: {} images", dataset.len());

    for (label, path) in [("fast-run", &args.fast_run), ("slow-run", &args.slow_run)] {
        if let Some(path) = path {
            let detections = detroute_core::load_detections(path)?;
            let count: usize = detections.values().map(Vec::len).sum();
            let unresolved: Vec<&String> = detections
                .keys()
                .filter(|id| !dataset.contains(id))
                .collect();
            if !unresolved.is_empty() {
                bail!("{label}: detections reference unknown image ids: {unresolved:?}");
            }
            println!("{label}: {count} detections on {} images", detections.len());
        }
    }

    if let Some(path) = &args.features {
        let features = load_features(path)?;
        let missing: Vec<&str> = dataset
            .image_ids()
            .filter(|id| !features.iter().any(|f| f.image_id == *id))
            .collect();
        if !missing.is_empty() {
            bail!(
                "features: {} dataset images lack vectors, e.g. {:?}",
                missing.len(),
                &missing[..missing.len().min(5)]
            );
        }
        let dim = features.first().map(|f| f.vector.len()).unwrap_or(0);
        println!("features: {} records (dim {dim})", features.len());
    }

    if let Some(path) = &args.scores {
        let scores = load_difficulty_scores(path)?;
        let missing: Vec<&str> = dataset
            .image_ids()
            .filter(|id| !scores.iter().any(|s| s.image_id == *id))
            .collect();
        if !missing.is_empty() {
            bail!(
                "scores: {} dataset images lack scores, e.g. {:?}",
                missing.len(),
                &missing[..missing.len().min(5)]
            );
        }
        println!("scores: {} records", scores.len());
    }

    println!("ok");
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    if args.format != "json" {
        bail!("eval supports --format json, got {:?}", args.format);
    }
    let dataset = load_dataset(&args.dataset)?;
    let detections = detroute_core::load_detections(&args.run)?;
    let config = resolve_eval_config(&args.eval, &Default::default())?;
    let report = mean_average_precision(&detections, &dataset, &config)?;
    emit(args.output.as_ref(), &(report.to_json() + "\n"))
}

fn cmd_train_difficulty(args: TrainArgs) -> Result<()> {
    let features = load_features(&args.features)?;
    if features.is_empty() {
        bail!("no feature records in {}", args.features.display());
    }
    let scores = load_difficulty_scores(&args.scores)?;
    let by_id: BTreeMap<&str, f64> = scores
        .iter()
        .map(|s| (s.image_id.as_str(), s.score))
        .collect();

    let mut normalized = Vec::with_capacity(features.len());
    let mut targets = Vec::with_capacity(features.len());
    for rec in &features {
        let target = by_id
            .get(rec.image_id.as_str())
            .with_context(|| format!("no difficulty score for image {:?}", rec.image_id))?;
        normalized.push(detroute_core::l2_normalize(&rec.vector)?);
        targets.push(*target);
    }

    let config = resolve_svr_config(&args.svr, &Default::default())?;
    let outcome = train_nu_svr(&normalized, &targets, &config)?;
    save_model(&outcome.model, &args.output)?;

    let tau = evaluate_predictor(&outcome.model, &features, &scores)?;
    println!(
        "trained on {} samples (dim {}): epsilon {:.6}, {} support vectors, {} iterations",
        normalized.len(),
        outcome.model.dim(),
        outcome.epsilon,
        outcome.support_vector_count(),
        outcome.iterations
    );
    println!("training tau: {tau:.4}");
    println!("model written to {}", args.output.display());
    Ok(())
}

fn cmd_predict(args: PredictArgs) -> Result<()> {
    let model = load_model(&args.model)?;
    let features = load_features(&args.features)?;
    let mut scores = Vec::with_capacity(features.len());
    for rec in &features {
        scores.push(DifficultyScore {
            image_id: rec.image_id.clone(),
            score: model.predict(&rec.vector)?,
        });
    }
    emit(args.output.as_ref(), &to_jsonl(&scores))
}

fn cmd_route(args: RouteArgs) -> Result<()> {
    let scores = load_difficulty_scores(&args.scores)?;
    let assignment = match args.mode.as_str() {
        "difficulty" => match (args.fraction, args.threshold) {
            (Some(f), None) => detroute_core::difficulty_split(&scores, f)?,
            (None, Some(t)) => detroute_core::difficulty_split_at(&scores, t)?,
            _ => bail!("difficulty mode needs exactly one of --fraction or --threshold"),
        },
        "random" => {
            let fraction = args.fraction.context("random mode needs --fraction")?;
            let ids: Vec<&str> = scores.iter().map(|s| s.image_id.as_str()).collect();
            detroute_core::random_split(&ids, fraction, args.seed)?
        }
        other => bail!("unknown mode {other:?} (expected difficulty or random)"),
    };
    match &args.output {
        Some(path) => {
            write_assignment(&assignment, path)?;
            println!(
                "{} images routed ({} easy / {} hard) -> {}",
                assignment.len(),
                assignment.easy_count(),
                assignment.len() - assignment.easy_count(),
                path.display()
            );
            Ok(())
        }
        None => {
            print!("{}", detroute_core::router::assignment_to_string(&assignment));
            Ok(())
        }
    }
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let file = match &args.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };

    let dataset_path = require_path(args.dataset, file.paths.dataset.clone(), "--dataset")?;
    let fast_path = require_path(args.fast_run, file.paths.fast_run.clone(), "--fast-run")?;
    let slow_path = require_path(args.slow_run, file.paths.slow_run.clone(), "--slow-run")?;
    let output_dir = require_path(args.output_dir, file.paths.output_dir.clone(), "--output-dir")?;

    let dataset = load_dataset(&dataset_path)?;
    let fast = load_run(
        "fast",
        &fast_path,
        args.fast_latency,
        args.fast_latency_file.as_deref(),
        file.latency.fast_constant,
        file.latency.fast_file.as_deref(),
    )?;
    let slow = load_run(
        "slow",
        &slow_path,
        args.slow_latency,
        args.slow_latency_file.as_deref(),
        file.latency.slow_constant,
        file.latency.slow_file.as_deref(),
    )?;

    let scores = match (
        args.scores.or(file.paths.scores.clone()),
        args.model.or(file.paths.model.clone()),
    ) {
        (Some(path), _) => load_difficulty_scores(&path)?,
        (None, Some(model_path)) => {
            let features_path =
                require_path(args.features, file.paths.features.clone(), "--features")?;
            let model = load_model(&model_path)?;
            let features = load_features(&features_path)?;
            let mut scores = Vec::with_capacity(features.len());
            for rec in &features {
                scores.push(DifficultyScore {
                    image_id: rec.image_id.clone(),
                    score: model.predict(&rec.vector)?,
                });
            }
            scores
        }
        (None, None) => bail!("sweep needs --scores, or --model with --features"),
    };

    let eval = resolve_eval_config(&args.eval, &file.eval)?;
    let harness = resolve_harness_config(&args.harness, &file.harness, eval)?;

    let points = sweep(&dataset, &fast, &slow, &scores, &harness)?;
    let csv = render_report(&points, ReportFormat::Csv)?;
    let md = render_report(&points, ReportFormat::Markdown)?;

    std::fs::create_dir_all(&output_dir)
        .with_context(|| format!("creating {}", output_dir.display()))?;
    let csv_path = output_dir.join("sweep.csv");
    let md_path = output_dir.join("sweep.md");
    std::fs::write(&csv_path, &csv).with_context(|| format!("writing {}", csv_path.display()))?;
    std::fs::write(&md_path, &md).with_context(|| format!("writing {}", md_path.display()))?;

    print!("{md}");
    for (fraction, delta) in compare_strategies(&points)? {
        println!("delta at {fraction}: {delta:+.4}");
    }
    println!(
        "reports written to {} and {}",
        csv_path.display(),
        md_path.display()
    );
    Ok(())
}

fn load_run(
    detector_id: &str,
    detections_path: &std::path::Path,
    latency_flag: Option<f64>,
    latency_file_flag: Option<&std::path::Path>,
    latency_config: Option<f64>,
    latency_file_config: Option<&std::path::Path>,
) -> Result<DetectorRun> {
    let latency = resolve_latency(
        latency_flag,
        latency_file_flag,
        latency_config,
        latency_file_config,
        detector_id,
    )?;
    Ok(load_detector_run(detector_id, detections_path, latency)?)
}

fn cmd_report(args: ReportArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.points)
        .with_context(|| format!("reading {}", args.points.display()))?;
    let points = points_from_csv(&text)?;
    let format: ReportFormat = args.format.parse()?;
    let rendered = render_report(&points, format)?;
    emit(args.output.as_ref(), &rendered)
}

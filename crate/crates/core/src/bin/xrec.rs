//! Command-line driver: `train`, `evaluate`, `explain`, `compare-metrics`.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use xrec::ingest::{self, Dataset, DatasetKind};
use xrec::inference::MlpConfig;
use xrec::kb::{self, Split};
use xrec::pipeline::{self, Fixture, TrainConfig};
use xrec::{Error, MetricId, PropertyId, Result};

#[derive(Parser)]
#[command(name = "xrec", version, about = "Explainable handwritten-character recognition")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one engine per flow and write a knowledgebase.
    Train(TrainArgs),
    /// Fused accuracy on a test set, explainable flows (E) vs all (E+U).
    Evaluate(EvalArgs),
    /// Explain one sample: explainability matrix and rationale sentences.
    Explain(ExplainArgs),
    /// Fused accuracy for every effectiveness metric.
    CompareMetrics(CompareArgs),
}

#[derive(Args)]
struct DataArgs {
    #[arg(long, default_value = "mnist")]
    dataset_kind: DatasetKind,
    /// IDX image file.
    #[arg(long)]
    images: Option<PathBuf>,
    /// IDX label file.
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl DataArgs {
    fn load(&self) -> Result<Dataset> {
        let (Some(images), Some(labels)) = (&self.images, &self.labels) else {
            return Err(Error::InvalidArgument("--images and --labels are required".into()));
        };
        Dataset::load_idx(images, labels, self.dataset_kind)
    }

    fn load_subset(&self, n: usize) -> Result<Dataset> {
        let data = self.load()?;
        if n == 0 || n >= data.len() {
            return Ok(data);
        }
        ingest::stratified_subset(&data, n, self.seed)
    }
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Comma-separated explainable properties, or `all`.
    #[arg(long, default_value = "all")]
    flows: String,
    /// Also train the unexplainable flow on the raw images.
    #[arg(long)]
    include_unexplainable: bool,
    #[arg(long, default_value_t = 10_000)]
    train_n: usize,
    /// Samples held out of training for the effectiveness counts.
    #[arg(long, default_value_t = 2_000)]
    holdout_n: usize,
    #[arg(long, default_value_t = 20)]
    epochs: usize,
    #[arg(long, default_value_t = 0.01)]
    learning_rate: f64,
    #[arg(long)]
    kb: PathBuf,
    /// Also write the human-readable KB export here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FusionArgs {
    #[arg(long, default_value = "epars")]
    metric: MetricId,
    /// Weight every class by the engines' probabilities instead of votes.
    #[arg(long)]
    probabilistic: bool,
    /// Which stored counts supply the effectiveness values.
    #[arg(long, default_value = "holdout")]
    split: Split,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    fusion: FusionArgs,
    #[arg(long)]
    kb: PathBuf,
    #[arg(long, default_value_t = 2_000)]
    test_n: usize,
    /// Write the report as JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExplainArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    fusion: FusionArgs,
    #[arg(long, required_unless_present = "fixture")]
    kb: Option<PathBuf>,
    /// Sample index into the image file.
    #[arg(long, default_value_t = 0)]
    index: usize,
    /// Votes and counts supplied by hand instead of a trained KB.
    #[arg(long, conflicts_with = "kb")]
    fixture: Option<PathBuf>,
    /// Write the structured record as JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Restrict the grid to these metrics (comma-separated).
    #[arg(long)]
    metric: Option<String>,
    #[arg(long)]
    probabilistic: bool,
    #[arg(long, default_value = "holdout")]
    split: Split,
    #[arg(long, required_unless_present = "fixture")]
    kb: Option<PathBuf>,
    #[arg(long, default_value_t = 2_000)]
    test_n: usize,
    #[arg(long, conflicts_with = "kb")]
    fixture: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn write_json(path: &Option<PathBuf>, value: &impl Serialize) -> Result<()> {
    if let Some(path) = path {
        let text = serde_json::to_string_pretty(value)?;
        std::fs::write(path, text + "\n").map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn parse_flows(list: &str) -> Result<Vec<PropertyId>> {
    if list.trim() == "all" {
        return Ok(PropertyId::EXPLAINABLE.to_vec());
    }
    list.split(',').filter(|s| !s.trim().is_empty()).map(|s| s.trim().parse()).collect()
}

fn pct(v: Option<f64>) -> String {
    v.map_or("-".into(), |a| format!("{:.2}%", a * 100.0))
}

fn train(args: TrainArgs) -> Result<()> {
    let config = TrainConfig {
        dataset_kind: args.data.dataset_kind,
        flows: parse_flows(&args.flows)?,
        include_unexplainable: args.include_unexplainable,
        seed: args.data.seed,
        train_n: args.train_n,
        holdout_n: args.holdout_n,
        mlp: MlpConfig {
            epochs: args.epochs,
            learning_rate: args.learning_rate,
            ..MlpConfig::default()
        },
        ..TrainConfig::default()
    };
    let flows = config.selected_flows()?;
    if args.train_n == 0 {
        return Err(Error::EmptyDataset);
    }
    let full = args.data.load()?;
    let (train, holdout) = pipeline::training_subsets(&full, args.train_n, args.holdout_n, args.data.seed)?;
    println!(
        "training {} flows on {} samples ({} held out)",
        flows.len(),
        train.len(),
        holdout.len()
    );
    let (kb, summaries) = pipeline::cmd_train(&train, &holdout, &config)?;
    println!("{:<5} {:<12} {:>9} {:>9}", "Flow", "Property", "Train", "Holdout");
    for s in &summaries {
        println!(
            "F{:<4} {:<12} {:>9} {:>9}",
            s.flow_id,
            s.property.label(),
            pct(Some(s.train_accuracy)),
            pct(s.holdout_accuracy)
        );
    }
    kb::save(&kb, &args.kb)?;
    if let Some(out) = &args.out {
        std::fs::write(out, kb.to_json()? + "\n").map_err(|e| Error::InvalidArgument(format!("{}: {e}", out.display())))?;
    }
    println!("wrote {}", args.kb.display());
    Ok(())
}

fn evaluate(args: EvalArgs) -> Result<()> {
    let kb = kb::load(&args.kb)?;
    let test = args.data.load_subset(args.test_n)?;
    let report = pipeline::cmd_evaluate(&kb, &test, args.fusion.metric, args.fusion.probabilistic, args.fusion.split)?;
    println!(
        "{} samples, metric {}, {} fusion",
        report.samples,
        report.metric_id,
        if report.probabilistic { "probabilistic" } else { "vote" }
    );
    println!("{:<20} {:>8} {:>8}", "Metric", "E", "E+U");
    println!("{:<20} {:>8} {:>8}", report.metric_id.label(), pct(report.e), pct(report.eu));
    if let Some(delta) = report.delta() {
        println!("E+U - E = {:+.2} points", delta * 100.0);
    }
    println!();
    println!("{:<6} {:>7} {:>8} {:>8}", "Class", "Support", "E", "E+U");
    for c in &report.per_class {
        println!("{:<6} {:>7} {:>8} {:>8}", c.class, c.support, pct(c.e), pct(c.eu));
    }
    println!();
    for f in &report.per_flow {
        println!("F{:<4} {:<12} {:>8}", f.flow_id, f.property.label(), pct(Some(f.accuracy)));
    }
    write_json(&args.out, &report)
}

fn explain(args: ExplainArgs) -> Result<()> {
    let explanation = match (&args.fixture, &args.kb) {
        (Some(fixture), _) => Fixture::load(fixture)?.explain(args.fusion.metric)?,
        (None, Some(kb_path)) => {
            let kb = kb::load(kb_path)?;
            let data = args.data.load()?;
            let sample = data.samples().get(args.index).ok_or(Error::SampleNotFound(args.index))?;
            pipeline::cmd_explain(
                &kb,
                &sample.pixels,
                format!("{}#{}", file_name(args.data.images.as_deref()), args.index),
                args.fusion.metric,
                args.fusion.probabilistic,
                args.fusion.split,
            )?
        }
        (None, None) => unreachable!("clap requires --kb or --fixture"),
    };
    println!("sample {} (metric {})", explanation.sample_id, explanation.report.metric_id);
    println!();
    print!("{}", explanation.matrix());
    println!();
    for sentence in explanation.sentences() {
        println!("{sentence}");
    }
    write_json(&args.out, &explanation.record())
}

fn file_name(path: Option<&Path>) -> String {
    path.and_then(|p| p.file_name()).map_or("sample".into(), |n| n.to_string_lossy().into_owned())
}

fn compare_metrics(args: CompareArgs) -> Result<()> {
    let metrics: Vec<MetricId> = match &args.metric {
        Some(list) => list.split(',').map(|m| m.parse()).collect::<Result<_>>()?,
        None => Vec::new(),
    };
    let grid = match (&args.fixture, &args.kb) {
        (Some(fixture), _) => Fixture::load(fixture)?.compare_metrics(&metrics)?,
        (None, Some(kb_path)) => {
            let kb = kb::load(kb_path)?;
            let test = args.data.load_subset(args.test_n)?;
            pipeline::cmd_compare_metrics(&kb, &test, &metrics, args.probabilistic, args.split)?
        }
        (None, None) => unreachable!("clap requires --kb or --fixture"),
    };
    println!("{} samples, {} fusion", grid.samples, if grid.probabilistic { "probabilistic" } else { "vote" });
    print!("{}", grid.to_table());
    write_json(&args.out, &grid)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(a) => train(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Explain(a) => explain(a),
        Command::CompareMetrics(a) => compare_metrics(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

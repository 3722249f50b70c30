//! `monokan`: train, evaluate, certify, falsify and plot monotone KANs.

mod export;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use monokan::dataio::{self, convert_source, Splits};
use monokan::trainer::Metrics;
use monokan::{certify, evaluate, falsify, init_model, train, DatasetSpec, MonoKanModel, RunConfig};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "monokan",
    version,
    about = "Certified partially monotone Kolmogorov-Arnold networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model on a dataset descriptor and save it.
    Train(TrainArgs),
    /// Evaluate a saved model on a split of a dataset.
    Eval(EvalArgs),
    /// Check the monotonicity certificate of a saved model (exit 0 PASS, 2 FAIL).
    Certify(CertifyArgs),
    /// Search for monotonicity violations by random sampling (exit 0 none found, 2 found).
    Falsify(FalsifyArgs),
    /// Sample every edge activation into CSV files for plotting.
    ExportSplines(ExportArgs),
    /// Download and convert the raw file named in a dataset descriptor.
    FetchData(FetchArgs),
}

#[derive(Args)]
struct TrainArgs {
    /// Run configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Dataset descriptor (JSON).
    #[arg(long)]
    data: PathBuf,
    /// Output model file.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the training and initialization seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Training log (NDJSON); defaults to the model path with `.log.ndjson`.
    #[arg(long)]
    log: Option<PathBuf>,
    /// Print the summary as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum SplitName {
    Train,
    Validation,
    Test,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    /// Dataset descriptor (JSON).
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value = "test")]
    split: SplitName,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct CertifyArgs {
    #[arg(long)]
    model: PathBuf,
    /// Print the full certificate as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct FalsifyArgs {
    #[arg(long)]
    model: PathBuf,
    /// Random pairs per constrained feature.
    #[arg(long, default_value_t = 100_000)]
    pairs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sample the scaled box [-(1+e), 1+e] per feature.
    #[arg(long, default_value_t = 2.0)]
    expansion: f64,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    model: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Sample points per edge.
    #[arg(long, default_value_t = 201)]
    samples: usize,
    /// Also write a small-multiples SVG of all edges.
    #[arg(long)]
    svg: bool,
}

#[derive(Args)]
struct FetchArgs {
    /// Dataset descriptor (JSON) with a `source` entry.
    #[arg(long)]
    data: PathBuf,
    /// Replace an existing file.
    #[arg(long)]
    force: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(err) = configure_threads() {
        eprintln!("error: {err:#}");
        return ExitCode::from(1);
    }
    let result = match cli.command {
        Command::Train(args) => cmd_train(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Certify(args) => cmd_certify(args),
        Command::Falsify(args) => cmd_falsify(args),
        Command::ExportSplines(args) => cmd_export(args),
        Command::FetchData(args) => cmd_fetch(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            let diverged = err.chain().any(|e| {
                matches!(
                    e.downcast_ref::<monokan::Error>(),
                    Some(monokan::Error::Diverged { .. })
                )
            });
            ExitCode::from(if diverged { 3 } else { 1 })
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var("MONOKAN_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .with_context(|| format!("MONOKAN_THREADS must be a positive integer, got '{value}'"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .context("configuring the thread pool")?;
    Ok(())
}

fn load_model(path: &Path) -> Result<MonoKanModel> {
    MonoKanModel::load(path).with_context(|| format!("loading model {}", path.display()))
}

fn load_splits(path: &Path) -> Result<Splits> {
    let spec = DatasetSpec::load(path).with_context(|| format!("reading dataset descriptor {}", path.display()))?;
    dataio::load(&spec).with_context(|| format!("loading dataset {}", spec.data_path().display()))
}

fn metrics_json(m: &Metrics) -> serde_json::Value {
    serde_json::to_value(m).unwrap_or_default()
}

fn metrics_line(m: &Metrics) -> String {
    match (m.mse, m.rmse, m.accuracy) {
        (Some(mse), Some(rmse), _) => format!("mse {mse:.4}  rmse {rmse:.4}"),
        (_, _, Some(acc)) => format!("accuracy {acc:.4}  cross-entropy {:.4}", m.loss),
        _ => format!("loss {:.4}", m.loss),
    }
}

fn cmd_train(args: TrainArgs) -> Result<u8> {
    let mut config =
        RunConfig::load(&args.config).with_context(|| format!("reading config {}", args.config.display()))?;
    if let Some(seed) = args.seed {
        config.train.seed = seed;
    }
    let splits = load_splits(&args.data)?;
    let (train_set, val, test) = splits.scaled()?;
    let widths = config.model.widths(train_set.n_features());
    let mut model = init_model(&widths, &splits.monotonicity, &config.model, config.train.seed)?;
    model.set_input_scaler(splits.scaler.clone())?;

    let started = Instant::now();
    let validation = (!val.is_empty()).then_some(&val);
    let (model, log) = train(model, &train_set, validation, &config.train)?;
    let seconds = started.elapsed().as_secs_f64();

    let test_metrics = if test.is_empty() {
        None
    } else {
        Some(evaluate(&model, &test)?)
    };
    let certificate = certify(&model);
    model
        .save(&args.out)
        .with_context(|| format!("writing model {}", args.out.display()))?;
    let log_path = args.log.unwrap_or_else(|| args.out.with_extension("log.ndjson"));
    std::fs::write(&log_path, log.to_ndjson()?).with_context(|| format!("writing log {}", log_path.display()))?;

    if args.json {
        let summary = json!({
            "model": args.out,
            "log": log_path,
            "rows": { "train": train_set.len(), "validation": val.len(), "test": test.len(), "dropped": splits.dropped_rows },
            "epochs": log.epochs.len(),
            "restored_epoch": log.restored_epoch,
            "final_train_loss": log.final_train_loss(),
            "test": test_metrics.as_ref().map(metrics_json),
            "verdict": certificate.verdict,
            "seconds": seconds,
        });
        println!("{}", serde_json::to_string_pretty(&summary)?);
    } else {
        println!(
            "data: train {} / validation {} / test {} rows ({} dropped for missing values)",
            train_set.len(),
            val.len(),
            test.len(),
            splits.dropped_rows
        );
        let restored = log
            .restored_epoch
            .map(|e| format!(", restored epoch {e}"))
            .unwrap_or_default();
        println!("trained {} epochs in {seconds:.1}s{restored}", log.epochs.len());
        if let Some(m) = &test_metrics {
            println!("test: {}", metrics_line(m));
        }
        println!(
            "certificate: {} ({} edges checked, {} violations)",
            certificate.verdict,
            certificate.edges_checked,
            certificate.violations.len()
        );
        println!("model: {}", args.out.display());
        println!("log: {}", log_path.display());
    }
    Ok(0)
}

fn cmd_eval(args: EvalArgs) -> Result<u8> {
    let model = load_model(&args.model)?;
    let splits = load_splits(&args.data)?;
    let raw = match args.split {
        SplitName::Train => &splits.train,
        SplitName::Validation => &splits.validation,
        SplitName::Test => &splits.test,
    };
    if raw.n_features() != model.n_inputs() {
        bail!(
            "the model takes {} inputs but the dataset has {} features",
            model.n_inputs(),
            raw.n_features()
        );
    }
    let metrics = evaluate(&model, &raw.scaled(model.input_scaler())?)?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&metrics)?);
    } else {
        println!("{} rows: {}", metrics.rows, metrics_line(&metrics));
    }
    Ok(0)
}

fn cmd_certify(args: CertifyArgs) -> Result<u8> {
    let model = load_model(&args.model)?;
    let certificate = certify(&model);
    if args.json {
        println!("{}", serde_json::to_string_pretty(&certificate)?);
    } else {
        println!(
            "{}: {} edges checked, {} violations",
            certificate.verdict,
            certificate.edges_checked,
            certificate.violations.len()
        );
        for v in certificate.violations.iter().take(20) {
            let condition = v
                .condition
                .map(|c| format!("condition {c}"))
                .unwrap_or_else(|| "basis".into());
            let interval = v.interval.map(|k| format!(" interval {k}")).unwrap_or_default();
            println!(
                "  {condition} {:?}: layer {} output {} input {}{interval} {:?}",
                v.kind, v.layer, v.output, v.input, v.observed
            );
        }
        if certificate.violations.len() > 20 {
            println!("  ... {} more", certificate.violations.len() - 20);
        }
    }
    Ok(if certificate.passed() { 0 } else { 2 })
}

fn cmd_falsify(args: FalsifyArgs) -> Result<u8> {
    if args.pairs == 0 {
        bail!("--pairs must be at least 1");
    }
    if !(args.expansion.is_finite() && args.expansion >= 0.0) {
        bail!("--expansion must be a nonnegative number");
    }
    let model = load_model(&args.model)?;
    let report = falsify(&model, args.pairs, args.seed, args.expansion);
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        println!(
            "{} violations over [{}, {}]",
            report.total_violations, report.range.0, report.range.1
        );
        for f in &report.features {
            println!(
                "  feature {} ({}): {} / {} pairs",
                f.feature, f.direction, f.violations, f.pairs
            );
        }
        if let Some(w) = report.worst() {
            println!(
                "  worst: f({:?}) = {} vs f({:?}) = {}",
                w.x, w.f_x, w.x_prime, w.f_x_prime
            );
        }
    }
    Ok(if report.total_violations == 0 { 0 } else { 2 })
}

fn cmd_export(args: ExportArgs) -> Result<u8> {
    if args.samples < 2 {
        bail!("--samples must be at least 2");
    }
    let model = load_model(&args.model)?;
    let files = export::write_edge_csvs(&model, &args.out, args.samples)?;
    if args.svg {
        let path = args.out.join("splines.svg");
        std::fs::write(&path, export::small_multiples_svg(&model, args.samples))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    println!("wrote {files} edge files to {}", args.out.display());
    Ok(0)
}

fn cmd_fetch(args: FetchArgs) -> Result<u8> {
    let spec = DatasetSpec::load(&args.data).with_context(|| format!("reading {}", args.data.display()))?;
    let source = spec
        .source
        .as_ref()
        .with_context(|| format!("{} has no `source` entry", args.data.display()))?;
    let target = spec.data_path();
    if target.exists() && !args.force {
        println!("{} already exists; use --force to replace it", target.display());
        return Ok(0);
    }
    let raw = ureq::get(&source.url)
        .call()
        .with_context(|| format!("downloading {}", source.url))?
        .body_mut()
        .read_to_string()
        .with_context(|| format!("reading {}", source.url))?;
    let csv = convert_source(&raw, source.format)?;
    std::fs::write(&target, csv).with_context(|| format!("writing {}", target.display()))?;
    println!("wrote {}", target.display());
    Ok(0)
}

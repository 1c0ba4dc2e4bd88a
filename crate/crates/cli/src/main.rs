use std::error::Error as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Parser, Subcommand};
use hesselm::config::PipelineConfig;
use hesselm::eval::{sweep_chart, CvReport};
use hesselm::pipeline;

#[derive(Parser)]
#[command(
    name = "hesselm",
    version,
    about = "Regularized Hessenberg ELM pipeline for two-class ECG segments",
    after_help = "Any configuration key can be overridden as `--section.key value`, \
                  for example `--model.hidden 80 --features.kind grid`."
)]
struct Cli {
    /// Configuration file (TOML). Defaults apply to anything it leaves out.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads for fold- and lambda-level parallelism (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the synthetic two-class dataset and its manifest.
    Synth,
    /// Remove baseline wander and power-line noise, then segment.
    Preprocess,
    /// Extract features for every segment (bound fitted on all of them).
    Features,
    /// Train a model on every segment.
    Train,
    /// Cross-validate, or score a saved model when eval.model is set.
    Evaluate,
    /// Cross-validate at each lambda of the grid.
    Sweep,
    /// Run every stage, synthesizing data when no manifest is configured.
    Pipeline,
}

/// Pulls `--section.key value` and `--section.key=value` pairs out of the
/// argument list.
fn split_overrides(args: Vec<String>) -> Result<(Vec<String>, Vec<(String, String)>), String> {
    let mut rest = Vec::new();
    let mut overrides = Vec::new();
    let mut it = args.into_iter();
    while let Some(arg) = it.next() {
        let Some(body) = arg.strip_prefix("--") else {
            rest.push(arg);
            continue;
        };
        let (key, inline) = match body.split_once('=') {
            Some((k, v)) => (k.to_string(), Some(v.to_string())),
            None => (body.to_string(), None),
        };
        if !key.contains('.') {
            rest.push(arg);
            continue;
        }
        let value = match inline {
            Some(v) => v,
            None => it.next().ok_or_else(|| format!("--{key} needs a value"))?,
        };
        overrides.push((key, value));
    }
    Ok((rest, overrides))
}

fn pct(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{:.2}%", 100.0 * x))
}

fn print_report(report: &CvReport) {
    println!("fold  lambda        train  test  correct");
    for f in &report.folds {
        println!(
            "{:>4}  {:<12.6e}  {:>5}  {:>4}  {:>7}",
            f.fold,
            f.lambda,
            f.train_size,
            f.test_size,
            f.confusion.correct()
        );
    }
    let m = &report.metrics;
    println!(
        "positive class {}: precision {}  sensitivity {}  accuracy {}",
        report.positive_class,
        pct(m.precision),
        pct(m.sensitivity),
        pct(Some(m.accuracy))
    );
}

fn run(command: Command, cfg: &PipelineConfig) -> hesselm::Result<()> {
    let out = &cfg.data.output_dir;
    match command {
        Command::Synth => {
            let manifest = pipeline::run_synth(cfg)?;
            println!(
                "wrote {} recordings, manifest {}",
                2 * cfg.synth.records_per_class,
                manifest.display()
            );
        }
        Command::Preprocess => {
            let segments = pipeline::run_preprocess(cfg)?;
            println!("{} segments -> {}", segments.len(), out.join("segments.csv").display());
        }
        Command::Features => {
            let (_, x) = pipeline::run_features(cfg)?;
            println!(
                "{} rows x {} features -> {}",
                x.rows(),
                x.cols(),
                out.join("features.csv").display()
            );
        }
        Command::Train => {
            let t = pipeline::run_train(cfg)?;
            println!(
                "{} with {} hidden neurons, lambda {:e} -> {}",
                t.model.variant,
                t.model.hidden(),
                t.model.lambda,
                out.join("model.toml").display()
            );
        }
        Command::Evaluate => print_report(&pipeline::run_evaluate(cfg)?),
        Command::Sweep => print!("{}", sweep_chart(&pipeline::run_sweep(cfg)?)),
        Command::Pipeline => {
            let o = pipeline::run_pipeline(cfg)?;
            print_report(&o.report);
            print!("{}", sweep_chart(&o.sweep));
            println!("model -> {}", out.join("model.toml").display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let (args, overrides) = match split_overrides(std::env::args().collect()) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let cli = Cli::parse_from(args);
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();

    let result = PipelineConfig::load(cli.config.as_deref(), &overrides)
        .and_then(|cfg| hesselm::with_threads(cli.threads, || run(cli.command, &cfg)));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = e.source();
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::FAILURE
        }
    }
}

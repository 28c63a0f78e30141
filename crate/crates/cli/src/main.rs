use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cascade_core::harness::{
    cmd_evaluate, cmd_export_cassette, cmd_report, cmd_route, cmd_sweep, cmd_train, report,
    CassetteSource, ClockMode, RunManifest,
};
use cascade_core::llm::BackendKind;
use cascade_core::{Error, Result};

/// Cost-aware cascade classification: a calibrated classifier on document
/// embeddings that defers low-confidence documents to an LLM.
#[derive(Parser)]
#[command(name = "cascade", version)]
struct Cli {
    /// Log more (repeat for debug output).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one classifier per fold and write models/fold{i}.cglr.
    Train(RunArgs),
    /// Run the cross-validated protocol and write the report bundle.
    Evaluate(RunArgs),
    /// Evaluate the cascade at every grid threshold, averaged over folds.
    Sweep(RunArgs),
    /// Route every corpus document with a trained model.
    Route {
        #[command(flatten)]
        run: RunArgs,
        /// Model file written by `train`.
        #[arg(long)]
        model: PathBuf,
        /// Outcome JSONL destination.
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-render tables from a results.json.
    Report {
        results: PathBuf,
        /// Directory for the tables (defaults to the results directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a replay cassette for every document prompt.
    ExportCassette {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_enum)]
        source: SourceArg,
        #[arg(long)]
        out: PathBuf,
        /// Latency stored with gold and inverted answers, in seconds.
        #[arg(long, default_value_t = 1.0)]
        latency_s: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SourceArg {
    Gold,
    Inverted,
    Record,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Mock,
    Replay,
    Http,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClockArg {
    Monotonic,
    Virtual,
}

/// Manifest plus command-line overrides; flags win over the file.
#[derive(Args)]
struct RunArgs {
    /// TOML run manifest.
    #[arg(short, long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long)]
    embeddings: Option<PathBuf>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Fixed routing threshold (skips tuning).
    #[arg(long)]
    threshold: Option<f64>,
    /// Comma-separated threshold grid.
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    backend: Option<BackendArg>,
    #[arg(long)]
    cassette: Option<PathBuf>,
    #[arg(long)]
    endpoint: Option<String>,
    #[arg(long)]
    max_concurrent: Option<usize>,
    #[arg(long, value_enum)]
    clock: Option<ClockArg>,
    #[arg(long)]
    alpha: Option<f64>,
}

impl RunArgs {
    fn manifest(&self) -> Result<RunManifest> {
        let mut m = match &self.manifest {
            Some(path) => RunManifest::load(path)?,
            None => {
                let (Some(d), Some(e)) = (&self.dataset, &self.embeddings) else {
                    return Err(Error::Config(
                        "pass --manifest, or both --dataset and --embeddings".into(),
                    ));
                };
                RunManifest::new(d.clone(), e.clone())
            }
        };
        if let Some(p) = &self.dataset {
            m.dataset.path = p.clone();
        }
        if let Some(p) = &self.embeddings {
            m.dataset.embeddings = p.clone();
        }
        if let Some(p) = &self.output_dir {
            m.output_dir = p.clone();
        }
        if let Some(k) = self.k {
            m.k = k;
        }
        if let Some(seed) = self.seed {
            m.seed = seed;
        }
        if let Some(t) = self.threshold {
            m.router.threshold = Some(t);
        }
        if let Some(g) = &self.grid {
            m.router.grid = g.clone();
        }
        if let Some(b) = self.backend {
            m.backend.kind = match b {
                BackendArg::Mock => BackendKind::Mock,
                BackendArg::Replay => BackendKind::Replay,
                BackendArg::Http => BackendKind::Http,
            };
        }
        if let Some(c) = &self.cassette {
            m.backend.cassette = Some(c.clone());
        }
        if let Some(e) = &self.endpoint {
            m.backend.endpoint = Some(e.clone());
        }
        if let Some(n) = self.max_concurrent {
            m.backend.max_concurrent = n;
        }
        if let Some(c) = self.clock {
            m.clock.mode = match c {
                ClockArg::Monotonic => ClockMode::Monotonic,
                ClockArg::Virtual => ClockMode::Virtual,
            };
        }
        if let Some(a) = self.alpha {
            m.alpha = a;
        }
        m.validate()?;
        Ok(m)
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Train(args) => {
            let m = args.manifest()?;
            for f in cmd_train(&m)? {
                println!(
                    "fold {}: {} ({} iterations, converged={})",
                    f.fold,
                    f.path.display(),
                    f.iterations,
                    f.converged
                );
            }
        }
        Command::Evaluate(args) => {
            let m = args.manifest()?;
            let results = cmd_evaluate(&m)?;
            print!("{}", report::render_text(&results));
            println!("bundle written to {}", m.output_dir.display());
        }
        Command::Sweep(args) => {
            let m = args.manifest()?;
            let rows = cmd_sweep(&m)?;
            print!("{}", report::sweep_text(&rows));
            println!(
                "series written to {}",
                m.output_dir.join("sweep.csv").display()
            );
        }
        Command::Route { run, model, out } => {
            let m = run.manifest()?;
            let s = cmd_route(&m, &model, &out)?;
            println!(
                "{} of {} documents sent to the LLM at threshold {}",
                s.sent, s.documents, s.threshold
            );
            if let Some(a) = s.audit {
                println!("overall Macro-F1 {:.2}%", 100.0 * a.overall_macro_f1);
            }
        }
        Command::Report { results, out } => {
            print!("{}", cmd_report(&results, out.as_deref())?);
        }
        Command::ExportCassette {
            run,
            source,
            out,
            latency_s,
        } => {
            let m = run.manifest()?;
            let source = match source {
                SourceArg::Gold => CassetteSource::Gold,
                SourceArg::Inverted => CassetteSource::Inverted,
                SourceArg::Record => CassetteSource::Record,
            };
            let n = cmd_export_cassette(&m, source, latency_s, &out)?;
            println!("{n} entries written to {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

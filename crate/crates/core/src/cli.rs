//! Command-line interface.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use log::{error, info, warn};
use rayon::prelude::*;

use crate::config::{synth_config, tracker_config, KeyValues};
use crate::fusion::{FusionOp, Modality, Tracker};
use crate::ingest::{self, RunMeta};
use crate::metrics::{evaluate, MetricsReport, Protocol};
use crate::report::{self, CurveFormat};
use crate::synth::{self, expected_metrics, simulate_run, suite_specs, SimTrackerSpec, SuiteKind};
use crate::model::Sequence;

/// Exit status for success.
pub const EXIT_OK: i32 = 0;
/// Exit status for invalid data or failed runs.
pub const EXIT_FAILURE: i32 = 1;
/// Exit status for malformed command lines.
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "ltbench", version, about = "Long-term RGBD tracking benchmark toolkit")]
struct Cli {
    /// Only log warnings and errors.
    #[arg(short, long, global = true)]
    quiet: bool,
    /// Worker threads (default: all cores).
    #[arg(short, long, global = true, env = "LTBENCH_JOBS")]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a dataset for structural problems.
    Validate {
        dataset: PathBuf,
    },
    /// Score one tracker's results.
    Evaluate {
        #[arg(long)]
        dataset: PathBuf,
        /// Directory holding one `<sequence>.txt` per sequence.
        #[arg(long)]
        results: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rank several trackers.
    Compare {
        #[arg(long)]
        dataset: PathBuf,
        /// Directory with one sub-directory per tracker.
        #[arg(long)]
        results_root: PathBuf,
        /// Trackers to include (default: all).
        #[arg(long, value_delimiter = ',')]
        trackers: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Export precision/recall/F curves of one tracker.
    Curves {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        results: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "csv")]
        format: CurveFormat,
    },
    /// Generate a synthetic dataset (and optional simulated tracker runs).
    Synth {
        /// `key = value` file with suite, sequences, frames, seed, simulate.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the seed from the spec file.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the correlation tracker over a dataset.
    Track(TrackArgs),
    /// Check the metrics engine against simulated trackers with known scores.
    Selftest,
}

#[derive(Debug, Args)]
struct TrackArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// `key = value` tracker settings; flags below take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Results root; the run is written to `<out>/<name>/`.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    name: Option<String>,
    #[arg(long)]
    fusion: Option<FusionOp>,
    /// Comma-separated weights for `--fusion weighted`.
    #[arg(long, value_delimiter = ',')]
    weights: Option<Vec<f64>>,
    #[arg(long)]
    modality: Option<Modality>,
    #[arg(long)]
    search_scale: Option<f64>,
    #[arg(long)]
    presence_threshold: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    scale_steps: Option<Vec<f64>>,
    /// Leave the speed out of the run metadata so outputs are reproducible.
    #[arg(long)]
    no_timing: bool,
}

type CmdResult = Result<i32, Box<dyn std::error::Error + Send + Sync>>;

/// Parses `argv` (including the program name), runs the command and
/// returns the process exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };
    let level = if cli.quiet { log::LevelFilter::Warn } else { log::LevelFilter::Info };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .try_init();
    log::set_max_level(level);

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.jobs.filter(|&n| n > 0) {
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            error!("{e}");
            return EXIT_FAILURE;
        }
    };
    match pool.install(|| run(cli.command)) {
        Ok(code) => code,
        Err(e) => {
            error!("{e}");
            EXIT_FAILURE
        }
    }
}

fn run(command: Command) -> CmdResult {
    match command {
        Command::Validate { dataset } => cmd_validate(&dataset),
        Command::Evaluate { dataset, results, out } => cmd_evaluate(&dataset, &results, &out),
        Command::Compare {
            dataset,
            results_root,
            trackers,
            out,
        } => cmd_compare(&dataset, &results_root, &trackers, &out),
        Command::Curves {
            dataset,
            results,
            out,
            format,
        } => {
            let sequences = ingest::load_dataset_annotations(&dataset)?;
            let (report, _) = evaluate_dir(&sequences, &results)?;
            report::write_curves(&out, &[report], &[format])?;
            Ok(EXIT_OK)
        }
        Command::Synth { spec, out, seed } => cmd_synth(spec.as_deref(), &out, seed),
        Command::Track(args) => cmd_track(args),
        Command::Selftest => Ok(selftest()),
    }
}

fn cmd_validate(dataset: &Path) -> CmdResult {
    let report = ingest::validate_dataset(dataset)?;
    for f in &report.findings {
        println!("{f}");
    }
    let errors = report.errors().count();
    let warnings = report.findings.len() - errors;
    info!("{errors} error(s), {warnings} warning(s)");
    Ok(if report.has_errors() { EXIT_FAILURE } else { EXIT_OK })
}

fn evaluate_dir(sequences: &[Sequence], dir: &Path) -> Result<(MetricsReport, RunMeta), Box<dyn std::error::Error + Send + Sync>> {
    let run = ingest::read_tracker_run(dir)?;
    let meta = ingest::read_run_meta(dir)?;
    let report = evaluate(sequences, &run).map_err(|e| format!("{}: {e}", run.tracker))?;
    Ok((report, meta))
}

fn cmd_evaluate(dataset: &Path, results: &Path, out: &Path) -> CmdResult {
    let sequences = ingest::load_dataset_annotations(dataset)?;
    let entry = evaluate_dir(&sequences, results)?;
    for line in report::summary_lines(&entry.0) {
        println!("{line}");
    }
    report::write_report(out, &[entry])?;
    Ok(EXIT_OK)
}

fn cmd_compare(dataset: &Path, root: &Path, trackers: &[String], out: &Path) -> CmdResult {
    let sequences = ingest::load_dataset_annotations(dataset)?;
    let mut dirs = ingest::tracker_dirs(root)?;
    if !trackers.is_empty() {
        for t in trackers {
            if !dirs.iter().any(|d| d.file_name().is_some_and(|n| n == t.as_str())) {
                return Err(format!("no results for tracker `{t}` under {}", root.display()).into());
            }
        }
        dirs.retain(|d| d.file_name().is_some_and(|n| trackers.iter().any(|t| n == t.as_str())));
    }
    if dirs.is_empty() {
        return Err(format!("no tracker results under {}", root.display()).into());
    }
    let entries = dirs
        .par_iter()
        .map(|d| evaluate_dir(&sequences, d))
        .collect::<Result<Vec<_>, _>>()?;
    for (r, _) in &entries {
        for line in report::summary_lines(r) {
            println!("{line}");
        }
    }
    report::write_report(out, &entries)?;
    Ok(EXIT_OK)
}

fn cmd_synth(spec: Option<&Path>, out: &Path, seed: Option<u64>) -> CmdResult {
    let kv = match spec {
        Some(p) => KeyValues::load(p)?,
        None => KeyValues::default(),
    };
    let mut cfg = synth_config(&kv)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let specs = suite_specs(cfg.suite, cfg.sequences, cfg.frames, cfg.seed);
    let suite = synth::generate_suite(&specs)?;
    let dataset = out.join("dataset");
    synth::write_dataset(&dataset, &suite)?;
    info!(
        "wrote {} {} sequence(s) of {} frames to {}",
        suite.len(),
        cfg.suite.name(),
        cfg.frames,
        dataset.display()
    );
    let sequences: Vec<Sequence> = suite.into_iter().map(|s| s.sequence).collect();
    for (name, sim) in &cfg.simulate {
        let run = simulate_run(name, sim, &sequences)?;
        ingest::write_tracker_run(&out.join("results"), &run, &RunMeta::default())?;
    }
    Ok(EXIT_OK)
}

fn cmd_track(a: TrackArgs) -> CmdResult {
    let kv = match &a.config {
        Some(p) => KeyValues::load(p)?,
        None => KeyValues::default(),
    };
    let (mut cfg, file_name) = tracker_config(&kv)?;
    if let Some(f) = a.fusion {
        cfg.fusion = f;
    }
    if let Some(w) = a.weights {
        cfg.fusion = FusionOp::Weighted(w);
    }
    if let Some(m) = a.modality {
        cfg.modality = m;
    }
    if let Some(s) = a.search_scale {
        cfg.search_scale = s;
    }
    if let Some(t) = a.presence_threshold {
        cfg.presence_threshold = t;
    }
    if let Some(s) = a.scale_steps {
        cfg.scale_steps = s;
    }
    let tracker = Tracker::new(cfg)?;
    let name = a.name.or(file_name).unwrap_or_else(|| tracker.config.run_name());

    let pairs = ingest::sequence_dirs(&a.dataset)?
        .par_iter()
        .map(|d| ingest::load_sequence(d))
        .collect::<Result<Vec<_>, _>>()?;
    if pairs.is_empty() {
        return Err(format!("no sequences under {}", a.dataset.display()).into());
    }
    let mut run = tracker.run(&name, &pairs)?;
    if a.no_timing {
        run.fps = None;
    }
    let meta = RunMeta {
        fps: run.fps,
        term: Some("LT".into()),
        modality: Some(tracker.config.modality.label().into()),
    };
    let dir = ingest::write_tracker_run(&a.out, &run, &meta)?;
    info!("wrote {} sequence(s) to {}", run.sequences.len(), dir.display());
    Ok(EXIT_OK)
}

/// Simulated trackers on synthetic annotations must score exactly what the
/// closed forms predict.
fn selftest() -> i32 {
    let cases: Vec<(&str, SimTrackerSpec)> = vec![
        ("perfect", SimTrackerSpec::perfect()),
        ("constant-iou 0.5", SimTrackerSpec::constant_iou(0.5, 1.0)),
        ("constant-iou 0.8 score 0.6", SimTrackerSpec::constant_iou(0.8, 0.6)),
        (
            "constant-iou 0.3, absent score 0.2",
            SimTrackerSpec {
                absent_score: 0.2,
                ..SimTrackerSpec::constant_iou(0.3, 0.9)
            },
        ),
        (
            "constant-iou 0.6, no absent prediction",
            SimTrackerSpec {
                always_predict: false,
                ..SimTrackerSpec::constant_iou(0.6, 0.7)
            },
        ),
    ];
    let mut failed = 0;
    for kind in [SuiteKind::Standard, SuiteKind::Camouflage] {
        let specs = suite_specs(kind, 4, 60, 11);
        let sequences: Vec<Sequence> = specs
            .iter()
            .map(|(n, s)| s.ground_truth(n))
            .collect::<Result<_, _>>()
            .expect("suite specs are valid");
        let truths: Vec<_> = sequences.iter().map(|s| s.targets()).collect();
        for (label, spec) in &cases {
            let outcome = simulate_run(label, spec, &sequences)
                .map_err(|e| e.to_string())
                .and_then(|run| evaluate(&sequences, &run).map_err(|e| e.to_string()))
                .and_then(|report| {
                    for p in Protocol::BOTH {
                        let want = expected_metrics(spec, &truths, p).map_err(|e| e.to_string())?;
                        let got = report.best(p);
                        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12;
                        if !(close(got.pr, want.pr) && close(got.re, want.re) && close(got.f, want.f)) {
                            return Err(format!("{}: got {got:?}, expected {want:?}", p.name()));
                        }
                    }
                    Ok(())
                });
            match outcome {
                Ok(()) => println!("pass  {}: {label}", kind.name()),
                Err(e) => {
                    failed += 1;
                    println!("FAIL  {}: {label}: {e}", kind.name());
                }
            }
        }
    }
    if failed > 0 {
        warn!("{failed} selftest case(s) failed");
        EXIT_FAILURE
    } else {
        EXIT_OK
    }
}

//! The `label-audit` command line.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{ConfigError, RunConfig};
use crate::corpus::{corrupt_labels, parse_conll, serialize_conll, synthesize_corpus, CorpusError, Dataset};
use crate::eval::evaluate_model;
use crate::io::write_atomic;
use crate::protocol::{
    run_identify, run_validate, AuditReport, Checkpoints, CurveMode, ProtocolError, ProtocolKind,
};
use crate::report::{csv_string, plot_spec_from_report, render_svg};
use crate::tagger::{train, TaggerError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "label-audit", version, about = "Label-consistency audits with ordered-curriculum learning curves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check whether a test set is consistent with its training set.
    Identify(RunArgs),
    /// Check that a corrected test subset restored consistency.
    Validate(RunArgs),
    /// Write a synthetic corpus with a corrupted test split.
    Synth(RunArgs),
    /// Train on the training set and score the test set.
    Eval(RunArgs),
    /// Re-render the SVG figure of a saved report.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// TOML run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    train: Option<PathBuf>,
    #[arg(long)]
    test: Option<PathBuf>,
    #[arg(long)]
    test_good: Option<PathBuf>,
    #[arg(long)]
    test_mistake: Option<PathBuf>,
    #[arg(long)]
    test_corrected: Option<PathBuf>,
    #[arg(long)]
    x: Option<usize>,
    #[arg(long)]
    y: Option<usize>,
    #[arg(long)]
    z: Option<usize>,
    #[arg(long)]
    w: Option<usize>,
    /// Comma-separated master seeds.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// A checkpoint count (`10`) or explicit prefix sizes (`100,200,400`).
    #[arg(long)]
    checkpoints: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores); never changes the results.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Verdict threshold in F1 points.
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    /// `retrain` or `continual`.
    #[arg(long)]
    mode: Option<String>,
    /// Corruption fraction for `synth`.
    #[arg(long)]
    fraction: Option<f64>,
    /// Corpus seed for `synth`.
    #[arg(long)]
    synth_seed: Option<u64>,
}

#[derive(Debug, Args)]
struct PlotArgs {
    /// Report JSON written by `identify` or `validate`.
    #[arg(long)]
    report: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn data(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_DATA,
            message: message.into(),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::usage(e.to_string())
    }
}

impl From<ProtocolError> for Failure {
    fn from(e: ProtocolError) -> Self {
        let code = if e.is_numeric() {
            EXIT_NUMERIC
        } else {
            match e {
                ProtocolError::Settings(_)
                | ProtocolError::Checkpoints(_)
                | ProtocolError::Tagger(TaggerError::InvalidConfig(_)) => EXIT_USAGE,
                _ => EXIT_DATA,
            }
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<TaggerError> for Failure {
    fn from(e: TaggerError) -> Self {
        ProtocolError::from(e).into()
    }
}

fn parse_checkpoints(s: &str) -> Result<Checkpoints, Failure> {
    let nums: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::usage(format!("invalid --checkpoints value {s:?}")))?;
    Ok(match nums.as_slice() {
        [n] if !s.contains(',') => Checkpoints::Count(*n),
        _ => Checkpoints::Sizes(nums),
    })
}

/// File config (or defaults) with flag overrides applied.
fn build_config(args: &RunArgs, protocol: Option<ProtocolKind>) -> Result<RunConfig, Failure> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cfg.protocol = protocol;
    let p = &mut cfg.paths;
    let set = |slot: &mut Option<PathBuf>, v: &Option<PathBuf>| {
        if v.is_some() {
            slot.clone_from(v);
        }
    };
    set(&mut p.train, &args.train);
    set(&mut p.test, &args.test);
    set(&mut p.test_good, &args.test_good);
    set(&mut p.test_mistake, &args.test_mistake);
    set(&mut p.test_corrected, &args.test_corrected);
    set(&mut p.out, &args.out);
    for (slot, v) in [
        (&mut cfg.sizes.x, args.x),
        (&mut cfg.sizes.y, args.y),
        (&mut cfg.sizes.z, args.z),
        (&mut cfg.sizes.w, args.w),
    ] {
        if v.is_some() {
            *slot = v;
        }
    }
    if let Some(seeds) = &args.seeds {
        cfg.seeds.clone_from(seeds);
    }
    if let Some(c) = &args.checkpoints {
        cfg.checkpoints = parse_checkpoints(c)?;
    }
    if let Some(t) = args.threshold {
        cfg.threshold = t;
    }
    if let Some(e) = args.epochs {
        cfg.train.epochs = e;
    }
    if let Some(m) = &args.mode {
        cfg.mode = match m.as_str() {
            "retrain" => CurveMode::Retrain,
            "continual" => CurveMode::Continual,
            _ => return Err(Failure::usage(format!("unknown mode {m:?}; expected retrain or continual"))),
        };
    }
    if let Some(f) = args.fraction {
        cfg.synth.corruption_fraction = f;
    }
    if let Some(s) = args.synth_seed {
        cfg.synth.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn required<'a>(path: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path, Failure> {
    path.as_deref()
        .ok_or_else(|| Failure::usage(format!("missing required input --{flag}")))
}

fn load_dataset(path: &Path, cfg: &RunConfig) -> Result<Dataset, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::data(format!("cannot read {}: {e}", path.display())))?;
    let mut ds = parse_conll(&text, cfg.columns.into())
        .map_err(|e| Failure::data(format!("{}: {e}", path.display())))?;
    ds.name = path.display().to_string();
    Ok(ds)
}

fn out_dir(cfg: &RunConfig) -> PathBuf {
    cfg.paths.out.clone().unwrap_or_else(|| PathBuf::from("audit-out"))
}

/// Writes every file only after all of them have been produced.
fn write_all(dir: &Path, files: &[(String, Vec<u8>)]) -> Result<(), Failure> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Failure::data(format!("cannot create {}: {e}", dir.display())))?;
    for (name, bytes) in files {
        let path = dir.join(name);
        write_atomic(&path, bytes).map_err(|e| Failure::data(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

fn report_files(report: &AuditReport) -> Result<Vec<(String, Vec<u8>)>, Failure> {
    let stem = report.protocol.as_str();
    let mut json = report
        .to_json()
        .map_err(|e| Failure::data(format!("cannot serialize report: {e}")))?;
    json.push('\n');
    Ok(vec![
        (format!("{stem}_report.json"), json.into_bytes()),
        (format!("{stem}_curves.csv"), csv_string(report).into_bytes()),
        (format!("{stem}_curves.svg"), render_svg(&plot_spec_from_report(report)).into_bytes()),
    ])
}

fn gap_summary(report: &AuditReport, out: &mut String) {
    let _ = writeln!(out, "verdict: {}", report.verdict);
    let _ = writeln!(out, "rule: {}", report.rule.description);
    for g in &report.gaps {
        let _ = writeln!(
            out,
            "{:<38} early-window mean {:>7.2}  final mean {:>7.2}  final band {:>6.2}",
            g.name,
            g.early_mean,
            g.final_mean,
            g.points.last().map_or(0.0, |p| p.band)
        );
    }
    for w in &report.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
}

fn cmd_identify(args: &RunArgs, out: &mut String) -> Result<(), Failure> {
    let cfg = build_config(args, Some(ProtocolKind::Identify))?;
    let train = load_dataset(required(&cfg.paths.train, "train")?, &cfg)?;
    let test = load_dataset(required(&cfg.paths.test, "test")?, &cfg)?;
    let x = cfg.sizes.identify_x(train.len(), test.len());
    let mut report = run_identify(&train, &test, x, &cfg.seeds, &cfg.audit_settings(args.jobs))?;
    report.run_config = Some(cfg.to_json_value());
    let files = report_files(&report)?;
    write_all(&out_dir(&cfg), &files)?;
    let _ = writeln!(out, "identify: x = {x}, seeds = {:?}", cfg.seeds);
    gap_summary(&report, out);
    Ok(())
}

fn cmd_validate(args: &RunArgs, out: &mut String) -> Result<(), Failure> {
    let cfg = build_config(args, Some(ProtocolKind::Validate))?;
    let train = load_dataset(required(&cfg.paths.train, "train")?, &cfg)?;
    let good = load_dataset(required(&cfg.paths.test_good, "test-good")?, &cfg)?;
    let mistake = load_dataset(required(&cfg.paths.test_mistake, "test-mistake")?, &cfg)?;
    let corrected = load_dataset(required(&cfg.paths.test_corrected, "test-corrected")?, &cfg)?;
    let sizes = cfg.sizes.validate_sizes(train.len(), good.len(), mistake.len());
    let mut report = run_validate(
        &train,
        &good,
        &mistake,
        &corrected,
        sizes,
        &cfg.seeds,
        &cfg.audit_settings(args.jobs),
    )?;
    report.run_config = Some(cfg.to_json_value());
    let files = report_files(&report)?;
    write_all(&out_dir(&cfg), &files)?;
    let _ = writeln!(
        out,
        "validate: x = {}, y = {}, z = {}, w = {}, seeds = {:?}",
        sizes.x, sizes.y, sizes.z, sizes.w, cfg.seeds
    );
    gap_summary(&report, out);
    Ok(())
}

fn corpus_failure(e: CorpusError) -> Failure {
    match e {
        CorpusError::InvalidSynthesis(_) | CorpusError::InvalidCorruption(_) => Failure::usage(e.to_string()),
        _ => Failure::data(e.to_string()),
    }
}

fn cmd_synth(args: &RunArgs, out: &mut String) -> Result<(), Failure> {
    let cfg = build_config(args, None)?;
    let s = &cfg.synth;
    if s.train_sentences == 0 || s.test_sentences == 0 {
        return Err(Failure::usage("train_sentences and test_sentences must be positive"));
    }
    let all = synthesize_corpus(&s.corpus_config()).map_err(corpus_failure)?;
    let idx: Vec<usize> = (0..all.len()).collect();
    let train = all.select("train", &idx[..s.train_sentences]);
    let clean = all.select("test", &idx[s.train_sentences..]);
    let (test, corrupted) = corrupt_labels(&clean, &s.corruption()).map_err(corpus_failure)?;
    let good: Vec<usize> = (0..clean.len()).filter(|i| corrupted.binary_search(i).is_err()).collect();
    let manifest = serde_json::json!({
        "tool_version": crate::VERSION,
        "run_config": cfg.to_json_value(),
        "train_sentences": train.len(),
        "test_sentences": test.len(),
        "corrupted_count": corrupted.len(),
        "corrupted_indices": corrupted,
        "files": {
            "train": "train.conll",
            "test": "test.conll",
            "test_good": "test_good.conll",
            "test_mistake": "test_mistake.conll",
            "test_corrected": "test_corrected.conll",
        },
    });
    let mut manifest = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    manifest.push('\n');
    let files = vec![
        ("train.conll".to_string(), serialize_conll(&train).into_bytes()),
        ("test.conll".to_string(), serialize_conll(&test).into_bytes()),
        ("test_good.conll".to_string(), serialize_conll(&clean.select("good", &good)).into_bytes()),
        (
            "test_mistake.conll".to_string(),
            serialize_conll(&test.select("mistake", &corrupted)).into_bytes(),
        ),
        (
            "test_corrected.conll".to_string(),
            serialize_conll(&clean.select("corrected", &corrupted)).into_bytes(),
        ),
        ("manifest.json".to_string(), manifest.into_bytes()),
    ];
    let dir = out_dir(&cfg);
    write_all(&dir, &files)?;
    let _ = writeln!(
        out,
        "synth: {} train, {} test sentences, {} corrupted; written to {}",
        train.len(),
        test.len(),
        corrupted.len(),
        dir.display()
    );
    Ok(())
}

fn cmd_eval(args: &RunArgs, out: &mut String) -> Result<(), Failure> {
    let cfg = build_config(args, None)?;
    let train_set = load_dataset(required(&cfg.paths.train, "train")?, &cfg)?;
    let test = load_dataset(required(&cfg.paths.test, "test")?, &cfg)?;
    let model = train(&train_set, &cfg.templates, &cfg.train)?;
    let result = evaluate_model(&model, &test).map_err(|e| Failure::data(e.to_string()))?;
    let json = model.to_json()?;
    write_all(&out_dir(&cfg), &[("model.json".to_string(), json.into_bytes())])?;
    let _ = writeln!(out, "P R F1");
    let _ = writeln!(out, "{}", result.table_row());
    out.push_str(&result.conlleval_report());
    Ok(())
}

fn cmd_plot(args: &PlotArgs, out: &mut String) -> Result<(), Failure> {
    let text = std::fs::read_to_string(&args.report)
        .map_err(|e| Failure::data(format!("cannot read {}: {e}", args.report.display())))?;
    let report = AuditReport::from_json(&text)
        .map_err(|e| Failure::data(format!("{}: {e}", args.report.display())))?;
    let name = format!("{}_curves.svg", report.protocol.as_str());
    let dir = args.out.clone().unwrap_or_else(|| {
        args.report
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."))
    });
    write_all(&dir, &[(name.clone(), render_svg(&plot_spec_from_report(&report)).into_bytes())])?;
    let _ = writeln!(out, "wrote {}", dir.join(name).display());
    Ok(())
}

/// Runs the CLI and returns `(exit code, stdout text, stderr text)`.
pub fn run_captured<I, T>(args: I) -> (i32, String, String)
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                (code, text, String::new())
            } else {
                (code, String::new(), text)
            };
        }
    };
    let mut out = String::new();
    let result = match &cli.command {
        Command::Identify(a) => cmd_identify(a, &mut out),
        Command::Validate(a) => cmd_validate(a, &mut out),
        Command::Synth(a) => cmd_synth(a, &mut out),
        Command::Eval(a) => cmd_eval(a, &mut out),
        Command::Plot(a) => cmd_plot(a, &mut out),
    };
    match result {
        Ok(()) => (EXIT_OK, out, String::new()),
        Err(f) => (f.code, out, format!("error: {}\n", f.message)),
    }
}

/// Runs the CLI on the process arguments, printing its output.
pub fn main_exit_code() -> i32 {
    let (code, out, err) = run_captured(std::env::args_os());
    print!("{out}");
    eprint!("{err}");
    code
}

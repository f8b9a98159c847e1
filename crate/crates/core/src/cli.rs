//! The `qrng-audit` command line.
//!
//! Subcommands: `generate`, `ingest`, `test`, `experiment` and `report`.
//! A `--settings` TOML file may supply any flag; top-level `jobs` and one
//! table per subcommand keyed by flag name, for example
//!
//! ```toml
//! jobs = 4
//! [test]
//! suite-config = "suite.toml"
//! format = "markdown"
//! ```
//!
//! Explicit flags override file values. Relative paths in the file are
//! resolved against the file's directory.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success; for `test`, every applicable test passed |
//! | 1 | I/O or input-format error |
//! | 2 | usage error or invalid configuration |
//! | 3 | `test`: at least one test failed |
//! | 4 | `test`: no test failed but at least one did not apply |
//! | 5 | `experiment`: stopped by `--stop-after`; rerun to resume |

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::annealer::{reference_generator, ReferenceKind, SimError, SimulatorSpec};
use crate::bitstream::{convert_spin_csv, write_packed, BitstreamError, StreamOrigin};
use crate::experiment::{run_plan, DatasetRecord, DatasetSource, ExperimentError, ExperimentMatrix, ExperimentPlan, Progress};
use crate::fsutil::atomic_write_bytes;
use crate::nist::{run_all, SuiteConfig, TestResult, Verdict};
use crate::report::{render, render_results, ReportFormat};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NON_RANDOM: i32 = 3;
pub const EXIT_NOT_APPLICABLE: i32 = 4;
pub const EXIT_INTERRUPTED: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "qrng-audit", version, about = "Randomness audit for annealer-harvested bit streams")]
pub struct Cli {
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true, env = "QRNG_AUDIT_JOBS")]
    pub jobs: Option<usize>,
    /// TOML file supplying default flag values.
    #[arg(long, global = true, value_name = "TOML")]
    pub settings: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a simulated or reference stream as `.bits` plus `.bits.meta`.
    Generate(GenerateArgs),
    /// Convert a spin CSV into `.bits` plus `.bits.meta`.
    Ingest(IngestArgs),
    /// Run the battery on one `.bits` file.
    Test(TestArgs),
    /// Run a plan of datasets into a result matrix, with checkpoints.
    Experiment(ExperimentArgs),
    /// Render a result matrix.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct GenerateArgs {
    /// Simulator config with [graph], [config] and [noise] tables.
    #[arg(long, value_name = "TOML")]
    pub config: Option<PathBuf>,
    /// Number of anneal-readout cycles to simulate.
    #[arg(long, value_name = "N")]
    pub anneals: Option<u64>,
    /// Reference generator instead of the simulator: crypto_quality,
    /// weak_lcg, constant_zero or alternating.
    #[arg(long, value_name = "KIND")]
    pub reference: Option<String>,
    /// Bit count for `--reference`.
    #[arg(long, value_name = "N")]
    pub bits: Option<u64>,
    /// Overrides the noise seed, or seeds the reference generator.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output `.bits` path (required).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct IngestArgs {
    /// Spin CSV with header `anneal_index,q<id>,...` (required).
    #[arg(long, value_name = "CSV")]
    pub spins: Option<PathBuf>,
    /// Output `.bits` path (required).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct TestArgs {
    /// Input `.bits` file (required).
    #[arg(long, value_name = "PATH")]
    pub bits: Option<PathBuf>,
    /// Bits to analyze; required when the input has no sidecar.
    #[arg(long, value_name = "N")]
    pub bit_count: Option<u64>,
    /// Suite configuration, TOML or `.json`.
    #[arg(long, value_name = "PATH")]
    pub suite_config: Option<PathBuf>,
    /// Results document (JSON).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Name used in the report; defaults to the input file stem.
    #[arg(long, value_name = "ID")]
    pub dataset_id: Option<String>,
    /// Report format on standard output: markdown, csv or plain.
    #[arg(long, value_name = "FORMAT")]
    pub format: Option<String>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct ExperimentArgs {
    /// Plan file (TOML) listing the suite config and datasets.
    #[arg(long, value_name = "TOML")]
    pub plan: Option<PathBuf>,
    /// Run the eight canonical simulator datasets.
    #[arg(long)]
    pub canonical: bool,
    /// Bits per canonical dataset; defaults to the hardware counts.
    #[arg(long, value_name = "N")]
    pub bits: Option<u64>,
    /// Replaces the plan's suite configuration.
    #[arg(long, value_name = "PATH")]
    pub suite_config: Option<PathBuf>,
    /// Checkpoint directory; finished tests are resumed from it.
    #[arg(long, value_name = "DIR")]
    pub checkpoints: Option<PathBuf>,
    /// Output matrix (JSON, required).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Also write the matrix as CSV.
    #[arg(long, value_name = "PATH")]
    pub csv: Option<PathBuf>,
    /// Stop after computing this many new tests.
    #[arg(long, value_name = "N")]
    pub stop_after: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct ReportArgs {
    /// Matrix file written by `experiment` (required).
    #[arg(long, value_name = "PATH")]
    pub matrix: Option<PathBuf>,
    /// markdown (default), csv or plain.
    #[arg(long, value_name = "FORMAT")]
    pub format: Option<String>,
    /// Threshold for flags and verdicts; defaults to the matrix's alpha.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Write the report here instead of standard output.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct Settings {
    jobs: Option<usize>,
    generate: GenerateArgs,
    ingest: IngestArgs,
    test: TestArgs,
    experiment: ExperimentArgs,
    report: ReportArgs,
}

/// Results document written by `test --out`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub dataset_id: String,
    pub source: String,
    pub bit_count: u64,
    pub suite_digest: String,
    pub suite: SuiteConfig,
    pub verdict: Verdict,
    pub tests: Vec<TestResult>,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

type Outcome = Result<i32, Failure>;

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

fn io_failure(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_IO,
        message: message.into(),
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Io(_) => io_failure(e.to_string()),
            _ => usage(e.to_string()),
        }
    }
}

impl From<BitstreamError> for Failure {
    fn from(e: BitstreamError) -> Self {
        io_failure(e.to_string())
    }
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::InvalidPlan(_)
            | ExperimentError::ConfigMismatch(_)
            | ExperimentError::Suite(_)
            | ExperimentError::Sim(SimError::InvalidConfig(_) | SimError::UnknownKind(_)) => usage(e.to_string()),
            _ => io_failure(e.to_string()),
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

/// [`run`] with explicit output streams.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
            } else {
                let _ = out.write_all(text.as_bytes());
            }
            return code;
        }
    };
    match execute(cli, out, err) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let settings = match &cli.settings {
        Some(p) => load_settings(p)?,
        None => Settings::default(),
    };
    let jobs = cli.jobs.or(settings.jobs);
    if jobs == Some(0) {
        return Err(usage("--jobs must be at least 1"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| io_failure(format!("thread pool: {e}")))?;
    let mut o = Vec::new();
    let mut e = Vec::new();
    let result = pool.install(|| match cli.command {
        Command::Generate(a) => cmd_generate(merge_generate(a, settings.generate), &mut o),
        Command::Ingest(a) => cmd_ingest(merge_ingest(a, settings.ingest), &mut o),
        Command::Test(a) => cmd_test(merge_test(a, settings.test), &mut o),
        Command::Experiment(a) => cmd_experiment(merge_experiment(a, settings.experiment), &mut o, &mut e),
        Command::Report(a) => cmd_report(merge_report(a, settings.report), &mut o, &mut e),
    });
    let _ = out.write_all(&o);
    let _ = err.write_all(&e);
    result
}

fn load_settings(path: &Path) -> Result<Settings, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| io_failure(format!("{}: {e}", path.display())))?;
    let mut s: Settings = toml::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new(""));
    let fix = |p: &mut Option<PathBuf>| {
        if let Some(p) = p.as_mut() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    };
    fix(&mut s.generate.config);
    fix(&mut s.generate.out);
    fix(&mut s.ingest.spins);
    fix(&mut s.ingest.out);
    fix(&mut s.test.bits);
    fix(&mut s.test.suite_config);
    fix(&mut s.test.out);
    fix(&mut s.experiment.plan);
    fix(&mut s.experiment.suite_config);
    fix(&mut s.experiment.checkpoints);
    fix(&mut s.experiment.out);
    fix(&mut s.experiment.csv);
    fix(&mut s.report.matrix);
    fix(&mut s.report.out);
    Ok(s)
}

fn merge_generate(a: GenerateArgs, f: GenerateArgs) -> GenerateArgs {
    // Flags that pick the other source kind also drop the file's values.
    let reference_mode = a.reference.is_some() || (a.config.is_none() && a.anneals.is_none() && f.reference.is_some());
    if reference_mode {
        GenerateArgs {
            config: a.config,
            anneals: a.anneals,
            reference: a.reference.or(f.reference),
            bits: a.bits.or(f.bits),
            seed: a.seed.or(f.seed),
            out: a.out.or(f.out),
        }
    } else {
        GenerateArgs {
            config: a.config.or(f.config),
            anneals: a.anneals.or(f.anneals),
            reference: None,
            bits: a.bits,
            seed: a.seed.or(f.seed),
            out: a.out.or(f.out),
        }
    }
}

fn merge_ingest(a: IngestArgs, f: IngestArgs) -> IngestArgs {
    IngestArgs {
        spins: a.spins.or(f.spins),
        out: a.out.or(f.out),
    }
}

fn merge_test(a: TestArgs, f: TestArgs) -> TestArgs {
    TestArgs {
        bits: a.bits.or(f.bits),
        bit_count: a.bit_count.or(f.bit_count),
        suite_config: a.suite_config.or(f.suite_config),
        out: a.out.or(f.out),
        dataset_id: a.dataset_id.or(f.dataset_id),
        format: a.format.or(f.format),
    }
}

fn merge_experiment(a: ExperimentArgs, f: ExperimentArgs) -> ExperimentArgs {
    let canonical = a.canonical || (a.plan.is_none() && f.canonical);
    ExperimentArgs {
        plan: if a.plan.is_some() || !canonical { a.plan.or(f.plan) } else { None },
        canonical,
        bits: a.bits.or(f.bits),
        suite_config: a.suite_config.or(f.suite_config),
        checkpoints: a.checkpoints.or(f.checkpoints),
        out: a.out.or(f.out),
        csv: a.csv.or(f.csv),
        stop_after: a.stop_after.or(f.stop_after),
    }
}

fn merge_report(a: ReportArgs, f: ReportArgs) -> ReportArgs {
    ReportArgs {
        matrix: a.matrix.or(f.matrix),
        format: a.format.or(f.format),
        alpha: a.alpha.or(f.alpha),
        out: a.out.or(f.out),
    }
}

fn required<T>(v: Option<T>, flag: &str) -> Result<T, Failure> {
    v.ok_or_else(|| usage(format!("{flag} is required")))
}

fn read_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| io_failure(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    atomic_write_bytes(path, bytes).map_err(|e| io_failure(format!("{}: {e}", path.display())))
}

fn load_suite(path: Option<&Path>) -> Result<SuiteConfig, Failure> {
    let Some(path) = path else {
        return Ok(SuiteConfig::default());
    };
    let text = read_text(path)?;
    let parsed = if path.extension().is_some_and(|e| e == "json") {
        SuiteConfig::from_json(&text)
    } else {
        SuiteConfig::from_toml(&text)
    };
    parsed.map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn parse_format(s: Option<&str>, default: ReportFormat) -> Result<ReportFormat, Failure> {
    s.map_or(Ok(default), |s| s.parse().map_err(|e: crate::report::ReportError| usage(e.to_string())))
}

fn cmd_generate(a: GenerateArgs, out: &mut dyn Write) -> Outcome {
    let path = required(a.out, "--out")?;
    if a.reference.is_some() && (a.config.is_some() || a.anneals.is_some()) {
        return Err(usage("--reference cannot be combined with --config or --anneals"));
    }
    if a.reference.is_none() && a.bits.is_some() {
        return Err(usage("--bits applies only with --reference"));
    }
    let (seq, origin) = if let Some(kind) = a.reference {
        let kind: ReferenceKind = kind.parse().map_err(|e: SimError| usage(e.to_string()))?;
        let bits = required(a.bits, "--bits")?;
        let n = usize::try_from(bits).map_err(|_| usage("--bits too large"))?;
        let seed = a.seed.unwrap_or(0);
        let origin = StreamOrigin {
            descriptor: format!("reference:{kind}:{seed}"),
            ..StreamOrigin::default()
        };
        (reference_generator(kind, seed, n), origin)
    } else {
        let mut spec = match &a.config {
            Some(p) => SimulatorSpec::from_toml(&read_text(p)?).map_err(|e| usage(format!("{}: {e}", p.display())))?,
            None => SimulatorSpec::default(),
        };
        if let Some(seed) = a.seed {
            spec.noise.rng_seed = seed;
        }
        let anneals = required(a.anneals, "--anneals")?;
        if anneals == 0 {
            return Err(usage("--anneals must be at least 1"));
        }
        spec.resolve()?;
        let (seq, meta) = spec.generate(anneals)?;
        let origin = StreamOrigin {
            descriptor: meta.source_descriptor,
            config_digest: meta.config_digest,
            epoch_starts: meta.epoch_starts,
        };
        (seq, origin)
    };
    let meta = write_packed(&seq, &path, &origin)?;
    let _ = writeln!(out, "{}", meta.bit_count);
    Ok(EXIT_OK)
}

fn cmd_ingest(a: IngestArgs, out: &mut dyn Write) -> Outcome {
    let spins = required(a.spins, "--spins")?;
    let path = required(a.out, "--out")?;
    let meta = convert_spin_csv(&spins, &path)?;
    let _ = writeln!(out, "{}", meta.bit_count);
    Ok(EXIT_OK)
}

fn dataset_id_for(path: &Path) -> String {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let id: String = stem
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.' { c } else { '_' })
        .collect();
    match id.trim_start_matches('.') {
        "" => "input".into(),
        t => t.to_string(),
    }
}

/// Exit code for one dataset's results.
pub fn verdict_exit_code(results: &[TestResult]) -> i32 {
    if results.iter().any(|r| r.verdict == Verdict::NonRandom) {
        EXIT_NON_RANDOM
    } else if results.iter().any(|r| !r.applicable) {
        EXIT_NOT_APPLICABLE
    } else {
        EXIT_OK
    }
}

fn cmd_test(a: TestArgs, out: &mut dyn Write) -> Outcome {
    let bits = required(a.bits, "--bits")?;
    let suite = load_suite(a.suite_config.as_deref())?;
    let format = parse_format(a.format.as_deref(), ReportFormat::Plain)?;
    let record = DatasetRecord {
        dataset_id: a.dataset_id.unwrap_or_else(|| dataset_id_for(&bits)),
        annealing_time_us: 1,
        postprocess_sampling: false,
        bit_count: a.bit_count.unwrap_or(0),
        source: DatasetSource::File { path: bits.clone() },
    };
    record.validate()?;
    let seq = record.load()?;
    let results = run_all(&seq, &suite);
    let doc = TestReport {
        dataset_id: record.dataset_id.clone(),
        source: bits.display().to_string(),
        bit_count: seq.len() as u64,
        suite_digest: suite.digest(),
        suite: suite.clone(),
        verdict: crate::nist::dataset_verdict(&results),
        tests: results,
    };
    if let Some(path) = &a.out {
        let mut text = serde_json::to_string_pretty(&doc).expect("results serialize");
        text.push('\n');
        write_file(path, text.as_bytes())?;
    }
    let rendered = render_results(&doc.dataset_id, &doc.tests, format, suite.alpha).map_err(|e| usage(e.to_string()))?;
    let _ = out.write_all(rendered.body.as_bytes());
    if format == ReportFormat::Csv {
        let _ = out.write_all(rendered.summary.as_bytes());
    }
    Ok(verdict_exit_code(&doc.tests))
}

fn cmd_experiment(a: ExperimentArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let matrix_path = required(a.out, "--out")?;
    let mut plan = match (&a.plan, a.canonical) {
        (Some(p), false) => ExperimentPlan::from_file(p)?,
        (None, true) => ExperimentPlan::canonical(a.bits),
        _ => return Err(usage("exactly one of --plan and --canonical is required")),
    };
    if a.bits.is_some() && !a.canonical {
        return Err(usage("--bits applies only with --canonical"));
    }
    if a.bits == Some(0) {
        return Err(usage("--bits must be at least 1"));
    }
    if let Some(p) = &a.suite_config {
        plan.suite = load_suite(Some(p))?;
    }
    plan.validate()?;
    if let Some(dir) = &a.checkpoints {
        std::fs::create_dir_all(dir).map_err(|e| io_failure(format!("{}: {e}", dir.display())))?;
    }
    let matrix = match run_plan(&plan, a.checkpoints.as_deref(), a.stop_after)? {
        Progress::Complete(m) => m,
        Progress::Interrupted { computed } => {
            let _ = writeln!(err, "stopped after {computed} new tests; rerun to resume");
            return Ok(EXIT_INTERRUPTED);
        }
    };
    write_file(&matrix_path, matrix.to_json().as_bytes())?;
    if let Some(csv) = &a.csv {
        write_file(csv, matrix.to_csv().as_bytes())?;
    }
    let rendered = render(&matrix, ReportFormat::Plain, plan.suite.alpha).map_err(|e| usage(e.to_string()))?;
    let _ = out.write_all(rendered.summary.as_bytes());
    Ok(EXIT_OK)
}

fn cmd_report(a: ReportArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let path = required(a.matrix, "--matrix")?;
    let format = parse_format(a.format.as_deref(), ReportFormat::Markdown)?;
    let matrix = ExperimentMatrix::from_json(&read_text(&path)?)
        .map_err(|e| io_failure(format!("{}: {e}", path.display())))?;
    let alpha = a.alpha.unwrap_or(matrix.suite.alpha);
    let rendered = render(&matrix, format, alpha).map_err(|e| usage(e.to_string()))?;
    match &a.out {
        Some(p) => {
            write_file(p, rendered.body.as_bytes())?;
            let _ = out.write_all(rendered.summary.as_bytes());
        }
        None => {
            let _ = out.write_all(rendered.body.as_bytes());
            if format == ReportFormat::Csv {
                let _ = err.write_all(rendered.summary.as_bytes());
            }
        }
    }
    Ok(EXIT_OK)
}

//! The `factcrowd` command line: `simulate`, `synth`, `analyze`, `stats` and `report`.
//!
//! Exit status is 0 on success, 1 when the arguments, configuration or inputs
//! are invalid, and 2 when a run fails after it started.

mod commands;
mod config;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

pub use config::{AnalysisConfig, DataConfig, RunConfig, StatsConfig, SynthSection};

use crate::aggregators::AlgorithmSpec;
use crate::simulation::Mode;

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "FACTCROWD_OUT";
const DEFAULT_OUT: &str = "factcrowd-out";

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments, configuration or inputs (exit 1).
    Invalid(String),
    /// Failure while running (exit 2).
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Invalid(m) | CliError::Runtime(m) => m,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn invalid(m: impl std::fmt::Display) -> CliError {
    CliError::Invalid(m.to_string())
}

fn runtime(m: impl std::fmt::Display) -> CliError {
    CliError::Runtime(m.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "factcrowd", version, about = "Crowd fact-checking aggregation benchmark and bias analytics")]
pub struct Cli {
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, short, global = true, env = OUT_ENV)]
    out: Option<PathBuf>,
    /// Directory with headlines.csv and responses.csv.
    #[arg(long, global = true)]
    data: Option<PathBuf>,
    #[arg(long, global = true)]
    headlines: Option<PathBuf>,
    #[arg(long, global = true)]
    responses: Option<PathBuf>,
    /// Use the bundled synthetic study instead of files.
    #[arg(long, global = true)]
    fixture: bool,
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for simulations (0 = all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a bootstrap campaign and write metrics.csv.
    Simulate(SimulateArgs),
    /// Generate a synthetic dataset.
    Synth(SynthArgs),
    /// Run a bias analysis.
    Analyze(AnalyzeArgs),
    /// Run a statistical test on CSV columns.
    Stats(StatsArgs),
    /// Render charts and tables from earlier outputs.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Comma-separated group sizes.
    #[arg(long)]
    sizes: Option<String>,
    #[arg(long)]
    replicas: Option<usize>,
    /// Comma-separated algorithms, e.g. `cwmv,exp4,metacmab,etree`.
    #[arg(long)]
    algorithms: Option<String>,
    /// `label` or `select:K` for K headlines per round.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    horizon: Option<usize>,
    /// Comma-separated treatments.
    #[arg(long)]
    treatments: Option<String>,
    /// `binary` or `continuous`.
    #[arg(long)]
    member_ranking: Option<String>,
    #[arg(long)]
    ci_resamples: Option<usize>,
    /// Bootstrap every point of the per-round curves.
    #[arg(long)]
    ci_curves: bool,
    /// Write a per-round trace of every replica.
    #[arg(long)]
    keep_traces: bool,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long)]
    participants: Option<usize>,
    /// `uniform`, `few_experts` or `ethnicity_specialists`.
    #[arg(long)]
    population: Option<String>,
    /// Target mean accuracy on every category.
    #[arg(long)]
    accuracy: Option<f64>,
    /// Target mean pairwise correlation.
    #[arg(long)]
    correlation: Option<f64>,
    /// Keep delta and rho as configured.
    #[arg(long)]
    no_calibrate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Analysis {
    Framing,
    Groupbias,
    Demographics,
    Calibration,
    Timing,
    Diversity,
    All,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[arg(value_enum)]
    analysis: Analysis,
    /// `raw` or an algorithm whose averaged predictions are analysed.
    #[arg(long)]
    source: Option<String>,
    #[arg(long)]
    prediction_size: Option<usize>,
    #[arg(long)]
    prediction_replicas: Option<usize>,
    #[arg(long)]
    window: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StatTest {
    Wilcoxon,
    Mwu,
    Kruskal,
    Dunn,
    Pearson,
    Bootstrap,
    Gee,
}

#[derive(Debug, Args)]
struct StatsArgs {
    #[arg(value_enum)]
    test: StatTest,
    /// Input CSV.
    #[arg(long)]
    file: Option<PathBuf>,
    /// Comma-separated columns compared directly.
    #[arg(long)]
    columns: Option<String>,
    /// Response column for grouped tests and GEE.
    #[arg(long)]
    value: Option<String>,
    /// Grouping column.
    #[arg(long)]
    group: Option<String>,
    /// Cluster column for GEE.
    #[arg(long)]
    cluster: Option<String>,
    /// Comma-separated GEE predictors; an intercept is added.
    #[arg(long)]
    predictors: Option<String>,
    /// `auto`, `exact` or `normal`.
    #[arg(long)]
    p_method: Option<String>,
    /// `holm`, `bonferroni` or `none`.
    #[arg(long)]
    adjustment: Option<String>,
    /// `independence` or `exchangeable`.
    #[arg(long)]
    correlation: Option<String>,
    #[arg(long)]
    resamples: Option<usize>,
    #[arg(long)]
    level: Option<f64>,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// Directory holding earlier outputs; defaults to the output directory.
    #[arg(long)]
    input: Option<PathBuf>,
}

/// Parses a snake_case enum through its serde representation.
fn parse_enum<T: DeserializeOwned>(what: &str, s: &str) -> CliResult<T> {
    serde_json::from_value(serde_json::Value::String(s.trim().to_string()))
        .map_err(|_| invalid(format!("unknown {what} `{s}`")))
}

fn split_list(s: &str) -> Vec<String> {
    s.split(',').map(|x| x.trim().to_string()).filter(|x| !x.is_empty()).collect()
}

fn parse_numbers<T: std::str::FromStr>(what: &str, s: &str) -> CliResult<Vec<T>> {
    split_list(s)
        .iter()
        .map(|x| x.parse().map_err(|_| invalid(format!("bad {what} `{x}`"))))
        .collect()
}

fn parse_mode(s: &str) -> CliResult<Mode> {
    match s.trim() {
        "label" => Ok(Mode::Label),
        other => match other.strip_prefix("select:").map(str::parse) {
            Some(Ok(arms)) => Ok(Mode::HeadlineSelection { arms }),
            _ => Err(invalid(format!("unknown mode `{s}`; use `label` or `select:K`"))),
        },
    }
}

impl Cli {
    /// Builds the effective configuration: file values first, then flags.
    fn effective_config(&self) -> CliResult<RunConfig> {
        let mut c: RunConfig = match &self.config {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| invalid(format!("cannot read {}: {e}", p.display())))?;
                serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", p.display())))?
            }
            None => RunConfig::default(),
        };
        if self.out.is_some() {
            c.output = self.out.clone();
        }
        if self.fixture {
            c.data = DataConfig {
                fixture: true,
                ..DataConfig::default()
            };
        }
        if self.data.is_some() {
            c.data.dir = self.data.clone();
        }
        if self.headlines.is_some() {
            c.data.headlines = self.headlines.clone();
        }
        if self.responses.is_some() {
            c.data.responses = self.responses.clone();
        }
        if self.seed.is_some() {
            c.seed = self.seed;
        }
        if self.workers.is_some() {
            c.workers = self.workers;
        }
        match &self.command {
            Command::Simulate(a) => {
                let s = &mut c.simulation;
                if let Some(v) = &a.sizes {
                    s.sizes = parse_numbers("group size", v)?;
                }
                if let Some(v) = a.replicas {
                    s.replicas = v;
                }
                if let Some(v) = &a.algorithms {
                    s.algorithms = AlgorithmSpec::parse_list(v).map_err(invalid)?;
                }
                if let Some(v) = &a.mode {
                    s.mode = parse_mode(v)?;
                }
                if a.horizon.is_some() {
                    s.horizon = a.horizon;
                }
                if let Some(v) = &a.treatments {
                    s.treatments = Some(parse_numbers("treatment", v)?);
                }
                if let Some(v) = &a.member_ranking {
                    s.member_ranking = parse_enum("member ranking", v)?;
                }
                if let Some(v) = a.ci_resamples {
                    s.ci.resamples = v;
                }
                s.ci.curves |= a.ci_curves;
                s.keep_traces |= a.keep_traces;
            }
            Command::Synth(a) => {
                let s = &mut c.synth;
                if let Some(v) = a.participants {
                    s.config.participants_per_treatment = v;
                }
                if let Some(v) = &a.population {
                    s.population = Some(parse_enum("population", v)?);
                }
                if a.no_calibrate {
                    s.targets = None;
                }
                if a.accuracy.is_some() || a.correlation.is_some() {
                    let t = s.targets.get_or_insert_with(Default::default);
                    if let Some(v) = a.accuracy {
                        t.accuracy = [v; 3];
                    }
                    if let Some(v) = a.correlation {
                        t.correlation = v;
                    }
                }
            }
            Command::Analyze(a) => {
                let s = &mut c.analysis;
                if let Some(v) = &a.source {
                    s.source = v.clone();
                }
                if let Some(v) = a.prediction_size {
                    s.prediction_size = v;
                }
                if let Some(v) = a.prediction_replicas {
                    s.prediction_replicas = v;
                }
                if let Some(v) = a.window {
                    s.window = v;
                }
            }
            Command::Stats(a) => {
                let s = &mut c.stats;
                if a.file.is_some() {
                    s.file = a.file.clone();
                }
                if let Some(v) = &a.columns {
                    s.columns = split_list(v);
                }
                if a.value.is_some() {
                    s.value = a.value.clone();
                }
                if a.group.is_some() {
                    s.group = a.group.clone();
                }
                if a.cluster.is_some() {
                    s.cluster = a.cluster.clone();
                }
                if let Some(v) = &a.predictors {
                    s.predictors = split_list(v);
                }
                if let Some(v) = &a.p_method {
                    s.p_method = parse_enum("p-value method", v)?;
                }
                if let Some(v) = &a.adjustment {
                    s.adjustment = parse_enum("adjustment", v)?;
                }
                if let Some(v) = &a.correlation {
                    s.correlation = parse_enum("working correlation", v)?;
                }
                if let Some(v) = a.resamples {
                    s.resamples = v;
                }
                if let Some(v) = a.level {
                    s.level = v;
                }
            }
            Command::Report(a) => {
                if a.input.is_some() {
                    c.report_input = a.input.clone();
                }
            }
        }
        c.resolve();
        Ok(c)
    }

    fn command_name(&self) -> &'static str {
        match &self.command {
            Command::Simulate(_) => "simulate",
            Command::Synth(_) => "synth",
            Command::Analyze(_) => "analyze",
            Command::Stats(_) => "stats",
            Command::Report(_) => "report",
        }
    }
}

/// Tracks the files a run writes.
pub(crate) struct Outputs {
    dir: PathBuf,
    files: Vec<String>,
}

impl Outputs {
    fn new(dir: PathBuf) -> CliResult<Self> {
        std::fs::create_dir_all(&dir).map_err(|e| runtime(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self { dir, files: Vec::new() })
    }

    pub(crate) fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Creates `name` in the output directory and records it.
    pub(crate) fn create(&mut self, name: &str) -> CliResult<std::io::BufWriter<std::fs::File>> {
        let p = self.path(name);
        if let Some(parent) = p.parent() {
            std::fs::create_dir_all(parent).map_err(|e| runtime(format!("cannot create {}: {e}", parent.display())))?;
        }
        let f = std::fs::File::create(&p).map_err(|e| runtime(format!("cannot write {}: {e}", p.display())))?;
        self.record(name);
        Ok(std::io::BufWriter::new(f))
    }

    pub(crate) fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(runtime)?;
        text.push('\n');
        let p = self.path(name);
        std::fs::write(&p, text).map_err(|e| runtime(format!("cannot write {}: {e}", p.display())))?;
        self.record(name);
        Ok(())
    }

    pub(crate) fn record(&mut self, name: &str) {
        if !self.files.iter().any(|f| f == name) {
            self.files.push(name.to_string());
        }
    }
}

#[derive(Serialize)]
struct ManifestEntry {
    file: String,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    config_hash: String,
    files: Vec<ManifestEntry>,
}

#[derive(Serialize)]
struct RunInfo<'a> {
    command: &'a str,
    version: &'a str,
    config_hash: String,
    started_unix_ms: u128,
    finished_unix_ms: u128,
    status: &'a str,
}

fn now_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0)
}

fn file_sha(p: &Path) -> CliResult<String> {
    let bytes = std::fs::read(p).map_err(|e| runtime(format!("cannot read {}: {e}", p.display())))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Runs the command line and returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind::*;
            let _ = e.print();
            return match e.kind() {
                DisplayHelp | DisplayVersion | DisplayHelpOnMissingArgumentOrSubcommand => 0,
                _ => 1,
            };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> CliResult<()> {
    let started = now_ms();
    let config = cli.effective_config()?;
    let dir = config
        .output
        .clone()
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let mut out = Outputs::new(dir)?;
    let name = cli.command_name();
    let hash = config.result_hash();

    let result = match &cli.command {
        Command::Simulate(_) => commands::simulate(&config, &hash, &mut out),
        Command::Synth(_) => commands::synth(&config, &mut out),
        Command::Analyze(a) => commands::analyze(&config, a.analysis, &mut out),
        Command::Stats(a) => commands::stats(&config, a.test, &mut out),
        Command::Report(_) => commands::report(&config, &mut out),
    };

    // the echo and sidecars are written even for failed runs so they can be inspected
    out.write_json("config.json", &config)?;
    let mut files = Vec::new();
    for f in out.files.iter().filter(|f| *f != "manifest.json" && *f != "run_info.json") {
        files.push(ManifestEntry {
            file: f.clone(),
            sha256: file_sha(&out.path(f))?,
        });
    }
    out.write_json(
        "manifest.json",
        &Manifest {
            command: name,
            config_hash: hash.clone(),
            files,
        },
    )?;
    out.write_json(
        "run_info.json",
        &RunInfo {
            command: name,
            version: env!("CARGO_PKG_VERSION"),
            config_hash: hash,
            started_unix_ms: started,
            finished_unix_ms: now_ms(),
            status: if result.is_ok() { "ok" } else { "failed" },
        },
    )?;
    result
}

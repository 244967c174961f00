//! Command-line front end.
//!
//! Subcommands `simulate`, `retrieve`, `sweep` and `tune`. Every flag can
//! also come from a `key = value` file given with `--config`; flags on the
//! command line win.

use std::collections::BTreeMap;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::closedform::retrieval_distribution;
use crate::error::{Error, Result};
use crate::gatesim::{QuantumState, DEFAULT_AMPLITUDE_CAP};
use crate::patterns::{load_pattern_file, BinaryPattern};
use crate::retrieval::{recognition_within, run_trials, ProtocolStats};
use crate::thermo::{self, AverageModel, BGrid, Mode, Thermo};
use crate::tuner::tune_with_mode;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "qamem",
    version,
    about = "Quantum associative memory: circuit simulation, retrieval statistics, thermodynamics",
    args_override_self = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Exact gate-level simulation with a closed-form cross-check.
    Simulate(SimulateArgs),
    /// Monte Carlo runs of the repeat-until-success protocol (JSON).
    Retrieve(RetrieveArgs),
    /// Thermodynamic sweep over inverse temperature b (CSV or JSON).
    Sweep(SweepArgs),
    /// Minimal b and threshold T for a corruption tolerance and efficiency (JSON).
    Tune(TuneArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Text,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum SweepFormat {
    Csv,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Spacing {
    Log,
    Linear,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Pattern file (one bitstring per line).
    #[arg(long)]
    pub patterns: PathBuf,
    /// Input bitstring.
    #[arg(long)]
    pub input: String,
    /// Number of control qbits.
    #[arg(long)]
    pub b: usize,
    /// Maximum number of amplitudes (p * 2^b).
    #[arg(long, default_value_t = DEFAULT_AMPLITUDE_CAP)]
    pub cap: u64,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    pub format: ReportFormat,
}

#[derive(Args, Debug)]
pub struct RetrieveArgs {
    #[arg(long)]
    pub patterns: PathBuf,
    #[arg(long)]
    pub input: String,
    #[arg(long)]
    pub b: u64,
    /// Maximum number of attempts T.
    #[arg(long = "threshold", short = 'T')]
    pub threshold: u64,
    #[arg(long, default_value_t = 1)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write JSON here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long)]
    pub n: usize,
    /// Relative minimal distance d/n (rounded to an integer d).
    #[arg(long, conflicts_with = "d")]
    pub d_over_n: Option<f64>,
    /// Minimal distance d.
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long, default_value_t = 1e-3)]
    pub b_min: f64,
    #[arg(long, default_value_t = 1e5)]
    pub b_max: f64,
    #[arg(long, default_value_t = 10)]
    pub points_per_decade: usize,
    /// Total points for linear spacing.
    #[arg(long, default_value_t = 100)]
    pub points: usize,
    #[arg(long, value_enum, default_value_t = Spacing::Log)]
    pub spacing: Spacing,
    #[arg(long, value_enum, default_value_t = Mode::ExactSum)]
    pub mode: Mode,
    #[arg(long, value_enum, default_value_t = SweepFormat::Csv)]
    pub format: SweepFormat,
    /// Write output here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TuneArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long)]
    pub nu: f64,
    #[arg(long, value_enum, default_value_t = Mode::ExactSum)]
    pub mode: Mode,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::ResourceCap { .. } => EXIT_RESOURCE,
        Error::Io { .. } => EXIT_IO,
        _ => EXIT_VALIDATION,
    }
}

/// Parses a `key = value` config file. Keys may use `-` or `_`.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: idx + 1,
            message: format!("expected key = value, found {line:?}"),
        })?;
        let key = key.trim().replace('_', "-");
        if key.is_empty() {
            return Err(Error::Parse {
                line: idx + 1,
                message: "empty key".into(),
            });
        }
        out.push((key, value.trim().trim_matches('"').to_string()));
    }
    Ok(out)
}

/// Splices config entries in front of the subcommand's own flags so that
/// explicit flags override them.
pub fn expand_config(args: Vec<String>) -> Result<Vec<String>> {
    let mut rest = Vec::with_capacity(args.len());
    let mut config: Option<PathBuf> = None;
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            let path = it
                .next()
                .ok_or_else(|| Error::invalid("--config needs a path"))?;
            config = Some(PathBuf::from(path));
        } else if let Some(path) = a.strip_prefix("--config=") {
            config = Some(PathBuf::from(path));
        } else {
            rest.push(a);
        }
    }
    let Some(path) = config else {
        return Ok(rest);
    };
    let text = std::fs::read_to_string(&path).map_err(|source| Error::Io {
        path: path.clone(),
        source,
    })?;
    let entries = parse_config(&text)?;
    // first non-flag after the program name is the subcommand
    let sub_pos = rest
        .iter()
        .skip(1)
        .position(|a| !a.starts_with('-'))
        .map(|p| p + 2)
        .unwrap_or(rest.len());
    let mut out: Vec<String> = rest[..sub_pos].to_vec();
    for (k, v) in entries {
        out.push(format!("--{k}"));
        out.push(v);
    }
    out.extend_from_slice(&rest[sub_pos..]);
    Ok(out)
}

/// Runs the CLI on `args` (including the program name), writing primary
/// output to `stdout` and summaries or errors to `stderr`. Returns the exit
/// code.
pub fn run<W: Write, E: Write>(args: Vec<String>, stdout: &mut W, stderr: &mut E) -> i32 {
    let args = match expand_config(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return exit_code(&e);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_VALIDATION
            } else {
                EXIT_OK
            };
            if e.use_stderr() {
                let _ = write!(stderr, "{e}");
            } else {
                let _ = write!(stdout, "{e}");
            }
            return code;
        }
    };
    match dispatch(cli.command, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch<W: Write, E: Write>(cmd: Command, stdout: &mut W, stderr: &mut E) -> Result<()> {
    match cmd {
        Command::Simulate(a) => cmd_simulate(&a, stdout),
        Command::Retrieve(a) => cmd_retrieve(&a, stdout),
        Command::Sweep(a) => cmd_sweep(&a, stdout, stderr),
        Command::Tune(a) => cmd_tune(&a, stdout),
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn stdout_err(source: std::io::Error) -> Error {
    Error::Io {
        path: PathBuf::from("<stdout>"),
        source,
    }
}

fn emit<W: Write>(out: Option<&Path>, stdout: &mut W, body: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, body).map_err(io_err(path)),
        None => stdout.write_all(body.as_bytes()).map_err(stdout_err),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

#[derive(Debug, Serialize)]
pub struct PatternReport {
    pub pattern: String,
    pub distance: usize,
    pub multiplicity: usize,
    pub simulated: f64,
    pub closed_form: f64,
    pub delta: f64,
}

#[derive(Debug, Serialize)]
pub struct SimulateReport {
    pub n: usize,
    pub p: usize,
    pub b: usize,
    pub p_all_zeros: f64,
    pub closed_form_p_rec: f64,
    pub delta_p_rec: f64,
    /// Duplicated patterns weight the simulated state by multiplicity
    /// squared, so the closed-form columns differ for them.
    pub duplicates: bool,
    pub distribution: Vec<PatternReport>,
    pub max_delta: f64,
}

pub fn simulate_report(args: &SimulateArgs) -> Result<SimulateReport> {
    let mem = load_pattern_file(&args.patterns)?;
    let input: BinaryPattern = args.input.parse()?;
    let state = QuantumState::run_all_rounds_with_cap(&mem, &input, args.b, args.cap)?;
    let p_all_zeros = state.prob_all_zeros();
    let stats = match retrieval_distribution(&mem, &input, args.b as u64) {
        Ok(s) => Some(s),
        Err(Error::NeverRecognized) => None,
        Err(e) => return Err(e),
    };
    let closed_p_rec = stats.as_ref().map_or(0.0, |s| s.p_rec);
    let simulated = state
        .project_control(0)
        .map(|c| c.memory_distribution())
        .transpose()?
        .unwrap_or_default();

    let mut grouped: BTreeMap<&BinaryPattern, (usize, f64)> = BTreeMap::new();
    for (k, pat) in mem.patterns().iter().enumerate() {
        let e = grouped.entry(pat).or_insert((0, 0.0));
        e.0 += 1;
        e.1 += stats.as_ref().map_or(0.0, |s| s.per_pattern[k]);
    }
    let distribution: Vec<PatternReport> = grouped
        .into_iter()
        .map(|(pat, (mult, closed))| {
            let sim = simulated.get(pat).copied().unwrap_or(0.0);
            PatternReport {
                pattern: pat.to_string(),
                distance: crate::patterns::hamming_distance(pat, &input).unwrap_or(0),
                multiplicity: mult,
                simulated: sim,
                closed_form: closed,
                delta: (sim - closed).abs(),
            }
        })
        .collect();
    let max_delta = distribution.iter().map(|r| r.delta).fold(0.0, f64::max);
    Ok(SimulateReport {
        n: mem.n(),
        p: mem.p(),
        b: args.b,
        p_all_zeros,
        closed_form_p_rec: closed_p_rec,
        delta_p_rec: (p_all_zeros - closed_p_rec).abs(),
        duplicates: distribution.iter().any(|r| r.multiplicity > 1),
        distribution,
        max_delta,
    })
}

fn cmd_simulate<W: Write>(args: &SimulateArgs, stdout: &mut W) -> Result<()> {
    let report = simulate_report(args)?;
    let body = match args.format {
        ReportFormat::Json => to_json(&report),
        ReportFormat::Text => {
            let mut s = String::new();
            s.push_str(&format!(
                "n = {}, p = {}, b = {}\nP(control = 0...0) = {:.15}\nclosed form P_rec   = {:.15}\n|delta|             = {:.3e}\n",
                report.n, report.p, report.b, report.p_all_zeros, report.closed_form_p_rec, report.delta_p_rec
            ));
            s.push_str("pattern\tdistance\tsimulated\tclosed_form\t|delta|\n");
            for r in &report.distribution {
                s.push_str(&format!(
                    "{}\t{}\t{:.15}\t{:.15}\t{:.3e}\n",
                    r.pattern, r.distance, r.simulated, r.closed_form, r.delta
                ));
            }
            if report.duplicates {
                s.push_str("note: duplicated patterns are weighted by multiplicity squared in the simulated state\n");
            }
            s
        }
    };
    stdout.write_all(body.as_bytes()).map_err(stdout_err)
}

#[derive(Debug, Serialize)]
pub struct RetrieveReport {
    pub b: u64,
    #[serde(rename = "T")]
    pub threshold: u64,
    pub seed: u64,
    pub p_rec: f64,
    pub expected_recognition_rate: f64,
    #[serde(flatten)]
    pub stats: ProtocolStats,
}

fn cmd_retrieve<W: Write>(args: &RetrieveArgs, stdout: &mut W) -> Result<()> {
    let mem = load_pattern_file(&args.patterns)?;
    let input: BinaryPattern = args.input.parse()?;
    let stats = run_trials(&mem, &input, args.b, args.threshold, args.trials, args.seed)?;
    let p_rec = match retrieval_distribution(&mem, &input, args.b) {
        Ok(s) => s.p_rec,
        Err(Error::NeverRecognized) => 0.0,
        Err(e) => return Err(e),
    };
    let report = RetrieveReport {
        b: args.b,
        threshold: args.threshold,
        seed: args.seed,
        p_rec,
        expected_recognition_rate: recognition_within(p_rec, args.threshold),
        stats,
    };
    emit(args.out.as_deref(), stdout, &to_json(&report))
}

fn sweep_model(args: &SweepArgs) -> Result<AverageModel> {
    match (args.d, args.d_over_n) {
        (Some(d), None) => AverageModel::new(args.n, d),
        (None, Some(f)) => AverageModel::from_fraction(args.n, f),
        (None, None) => AverageModel::new(args.n, 0),
        (Some(_), Some(_)) => Err(Error::invalid("give either --d or --d-over-n")),
    }
}

fn cmd_sweep<W: Write, E: Write>(args: &SweepArgs, stdout: &mut W, stderr: &mut E) -> Result<()> {
    let model = sweep_model(args)?;
    let grid = match args.spacing {
        Spacing::Log => BGrid::log(args.b_min, args.b_max, args.points_per_decade),
        Spacing::Linear => BGrid::linear(args.b_min, args.b_max, args.points),
    }
    .values()?;
    let result = thermo::sweep(&Thermo::new(model, args.mode), &grid)?;
    let body = match args.format {
        SweepFormat::Csv => {
            let mut buf = Vec::new();
            thermo::write_csv(&result, &mut buf).map_err(stdout_err)?;
            String::from_utf8(buf).expect("csv is ascii")
        }
        SweepFormat::Json => to_json(&result),
    };
    emit(args.out.as_deref(), stdout, &body)?;
    let summary = serde_json::to_string(&result.summary).expect("summary serializes");
    let line = format!("summary {summary}\n");
    if args.out.is_some() {
        stdout.write_all(line.as_bytes()).map_err(stdout_err)
    } else {
        stderr.write_all(line.as_bytes()).map_err(stdout_err)
    }
}

fn cmd_tune<W: Write>(args: &TuneArgs, stdout: &mut W) -> Result<()> {
    let plan = tune_with_mode(args.n, args.epsilon, args.nu, args.mode)?;
    emit(args.out.as_deref(), stdout, &to_json(&plan))
}

/// Entry point used by the binary.
pub fn main_from_env() -> i32 {
    let stdout = std::io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let mut err = std::io::stderr();
    let code = run(std::env::args().collect(), &mut out, &mut err);
    if out.flush().is_err() {
        return EXIT_IO;
    }
    code
}

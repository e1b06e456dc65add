//! `cobreak`: classify channels, compute coherence-breaking indices, evolve
//! coherence under repeated channel use and run concentration experiments.
//!
//! Exit codes: 0 success, 2 usage or input errors, 3 domain errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use cobreak::classifiers::{classify, DEFAULT_TOL};
use cobreak::concentration::{run_concentration_experiment, ExperimentConfig, DEFAULT_SAMPLES};
use cobreak::dynamics::{
    coherence_breaking_index, coherence_breaking_index_affine, evolve, IndexResult, IndexValue, DEFAULT_INDEX_CAP,
    DEFAULT_SUDDEN_DEATH_TOL,
};
use cobreak::io::{parse_channel, parse_state, ChannelSpec};
use cobreak::{Error, KrausChannel};

#[derive(Parser)]
#[command(name = "cobreak", version, about = "Coherence-breaking channel toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide membership in the incoherent, SIO, DIO, SCBC, CBC, QC and EB classes
    Classify(ClassifyArgs),
    /// Least n such that the n-fold iterate is coherence breaking
    Index(IndexArgs),
    /// l1 coherence of a state after 0..=steps applications of a channel
    Evolve(EvolveArgs),
    /// Monte Carlo tails of l1 coherence for Haar-random inputs against Lévy-type bounds
    Concentrate(ConcentrateArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct Output {
    /// Output file (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Channel JSON file
    #[arg(long)]
    channel: PathBuf,
    /// Tolerance shared by all predicates
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum IndexMethod {
    /// Affine powers for affine channel files, Kraus powers otherwise
    Auto,
    Kraus,
    Affine,
}

#[derive(Args)]
struct IndexArgs {
    /// Channel JSON file
    #[arg(long)]
    channel: PathBuf,
    /// Largest power examined
    #[arg(long, default_value_t = DEFAULT_INDEX_CAP, value_parser = clap::value_parser!(usize))]
    cap: usize,
    /// Tolerance for the coherence-breaking test of each power
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long, value_enum, default_value_t = IndexMethod::Auto)]
    method: IndexMethod,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct EvolveArgs {
    /// State JSON file
    #[arg(long)]
    state: PathBuf,
    /// Channel JSON file
    #[arg(long)]
    channel: PathBuf,
    /// Number of channel applications
    #[arg(long)]
    steps: usize,
    /// Coherence at or below this value counts as sudden death
    #[arg(long, default_value_t = DEFAULT_SUDDEN_DEATH_TOL)]
    tol: f64,
    /// Metadata JSON path (defaults to the --out path with a .json extension)
    #[arg(long)]
    sidecar: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ConcentrateArgs {
    /// Hilbert-space dimension
    #[arg(long)]
    dim: usize,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    #[arg(long)]
    seed: u64,
    /// Comma-separated deviations ε
    #[arg(long, value_delimiter = ',', required = true)]
    eps: Vec<f64>,
    /// `identity`, `dephasing` or a channel JSON file
    #[arg(long, default_value = "identity")]
    channel: String,
    /// Trace-norm contraction coefficient used in the bounds
    #[arg(long, default_value_t = 1.0)]
    eta_ch: f64,
    /// Bounds-table path for the secondary format (defaults to the --out path with the other extension)
    #[arg(long)]
    sidecar: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Domain(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_usage_error() {
            CliError::Usage(e.to_string())
        } else {
            CliError::Domain(e.to_string())
        }
    }
}

fn usage(message: impl Into<String>) -> CliError {
    CliError::Usage(message.into())
}

fn read_input(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

/// Every failure while loading an input file is a usage error.
fn load_channel(path: &Path) -> Result<ChannelSpec, CliError> {
    parse_channel(&read_input(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_state(path: &Path) -> Result<cobreak::DensityMatrix, CliError> {
    parse_state(&read_input(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn kraus_of(spec: &ChannelSpec, path: &Path) -> Result<KrausChannel, CliError> {
    spec.kraus()
        .map_err(|e| usage(format!("{}: not a valid channel: {e}", path.display())))
}

fn check_tol(tol: f64) -> Result<(), CliError> {
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(usage(format!("--tol must be a finite nonnegative number, got {tol}")));
    }
    Ok(())
}

fn write_text(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| usage(format!("cannot write to stdout: {e}")))
        }
    }
}

fn json_text<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("reports always serialize");
    text.push('\n');
    text
}

fn csv_text(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(header).expect("in-memory write");
    for row in rows {
        writer.write_record(row).expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("CSV output is UTF-8")
}

/// Shortest round-trip decimal, with an exponent for very large or small magnitudes.
fn num(x: f64) -> String {
    format!("{x:?}")
}

fn sidecar_path(explicit: Option<&PathBuf>, out: Option<&PathBuf>, extension: &str) -> Option<PathBuf> {
    explicit
        .cloned()
        .or_else(|| out.map(|p| p.with_extension(extension)))
        .filter(|p| Some(p) != out)
}

fn cmd_classify(args: &ClassifyArgs) -> Result<(), CliError> {
    check_tol(args.tol)?;
    let spec = load_channel(&args.channel)?;
    let channel = kraus_of(&spec, &args.channel)?;
    let report = classify(&channel, args.tol)?;
    let text = match args.output.format.unwrap_or(Format::Json) {
        Format::Json => json_text(&report),
        Format::Csv => {
            let v = &report.verdicts;
            let rows = [
                ("incoherent", v.incoherent),
                ("sio", v.sio),
                ("dio", v.dio),
                ("scbc", v.scbc),
                ("cbc", v.cbc),
                ("qc", v.qc),
                ("entanglement_breaking", v.entanglement_breaking),
            ]
            .iter()
            .map(|(name, verdict)| vec![name.to_string(), verdict.to_string()])
            .collect::<Vec<_>>();
            csv_text(&["class", "verdict"], &rows)
        }
    };
    write_text(args.output.out.as_deref(), &text)
}

fn cmd_index(args: &IndexArgs) -> Result<(), CliError> {
    check_tol(args.tol)?;
    if args.cap == 0 {
        return Err(usage("--cap must be at least 1"));
    }
    let spec = load_channel(&args.channel)?;
    let use_affine = match args.method {
        IndexMethod::Auto => matches!(spec, ChannelSpec::Affine(_)),
        IndexMethod::Kraus => false,
        IndexMethod::Affine => true,
    };
    let result: IndexResult = if use_affine {
        let rep = spec
            .affine()
            .ok_or_else(|| usage("--method affine needs a qubit channel"))?;
        coherence_breaking_index_affine(&rep, args.cap, args.tol)?
    } else {
        coherence_breaking_index(&kraus_of(&spec, &args.channel)?, args.cap, args.tol)?
    };
    let text = match args.output.format {
        None => match result.value {
            IndexValue::Finite(n) => format!("{n}\n"),
            IndexValue::ExceedsCap => format!("exceeds cap {}\n", result.cap),
        },
        Some(Format::Json) => json_text(&json!({
            "method": if use_affine { "affine" } else { "kraus" },
            "value": result.value,
            "cap": result.cap,
            "tolerance": args.tol,
            "residuals": result.residuals,
        })),
        Some(Format::Csv) => {
            let rows = result
                .residuals
                .iter()
                .enumerate()
                .map(|(k, r)| vec![(k + 1).to_string(), num(*r)])
                .collect::<Vec<_>>();
            csv_text(&["power", "cbc_residual"], &rows)
        }
    };
    write_text(args.output.out.as_deref(), &text)
}

fn cmd_evolve(args: &EvolveArgs) -> Result<(), CliError> {
    check_tol(args.tol)?;
    if args.steps == 0 {
        return Err(usage("--steps must be at least 1"));
    }
    let state = load_state(&args.state)?;
    let spec = load_channel(&args.channel)?;
    let channel = kraus_of(&spec, &args.channel)?;
    let trajectory = evolve(&state, &channel, args.steps, args.tol)?;
    let metadata = json!({
        "steps": args.steps,
        "tolerance": trajectory.tolerance,
        "sudden_death_step": trajectory.sudden_death_step,
        "initial_c_l1": trajectory.steps[0].c_l1,
        "final_c_l1": trajectory.steps[args.steps].c_l1,
    });
    match args.output.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let rows = trajectory
                .steps
                .iter()
                .map(|p| vec![p.step.to_string(), num(p.c_l1)])
                .collect::<Vec<_>>();
            write_text(args.output.out.as_deref(), &csv_text(&["step", "c_l1"], &rows))?;
            if let Some(path) = sidecar_path(args.sidecar.as_ref(), args.output.out.as_ref(), "json") {
                write_text(Some(&path), &json_text(&metadata))?;
            }
        }
        Format::Json => {
            write_text(args.output.out.as_deref(), &json_text(&trajectory))?;
        }
    }
    Ok(())
}

fn concentration_channel(name: &str, dim: usize) -> Result<(KrausChannel, String), CliError> {
    match name {
        "identity" => Ok((KrausChannel::identity(dim)?, "identity".into())),
        "dephasing" => Ok((KrausChannel::dephasing(dim)?, "dephasing".into())),
        path => {
            let path = Path::new(path);
            let spec = load_channel(path)?;
            let channel = kraus_of(&spec, path)?;
            if channel.dim() != dim {
                return Err(usage(format!(
                    "{} has dimension {} but --dim is {dim}",
                    path.display(),
                    channel.dim()
                )));
            }
            Ok((channel, format!("{}:{}", spec.kind(), path.display())))
        }
    }
}

fn cmd_concentrate(args: &ConcentrateArgs) -> Result<(), CliError> {
    if args.dim < 2 {
        return Err(usage(format!("--dim must be at least 2, got {}", args.dim)));
    }
    if args.samples == 0 {
        return Err(usage("--samples must be at least 1"));
    }
    let (channel, label) = concentration_channel(&args.channel, args.dim)?;
    let mut config = ExperimentConfig::new(args.dim, args.samples, args.eps.clone(), args.seed, label);
    config.eta_ch = args.eta_ch;
    let report = run_concentration_experiment(&channel, &config)?;

    let json_report = json_text(&report);
    let rows = report
        .rows
        .iter()
        .map(|r| {
            vec![
                num(r.epsilon),
                num(r.empirical_tail),
                num(r.levy_bound),
                num(r.empirical_tail_scaled),
                num(r.corollary_bound),
            ]
        })
        .collect::<Vec<_>>();
    let csv_report = csv_text(
        &["epsilon", "empirical_tail", "levy_bound", "empirical_tail_scaled", "corollary_bound"],
        &rows,
    );
    let (primary, secondary, other_ext) = match args.output.format.unwrap_or(Format::Json) {
        Format::Json => (json_report, csv_report, "csv"),
        Format::Csv => (csv_report, json_report, "json"),
    };
    write_text(args.output.out.as_deref(), &primary)?;
    if let Some(path) = sidecar_path(args.sidecar.as_ref(), args.output.out.as_ref(), other_ext) {
        write_text(Some(&path), &secondary)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Classify(args) => cmd_classify(args),
        Command::Index(args) => cmd_index(args),
        Command::Evolve(args) => cmd_evolve(args),
        Command::Concentrate(args) => cmd_concentrate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let (kind, message) = match &err {
                CliError::Usage(m) => ("usage error", m),
                CliError::Domain(m) => ("error", m),
            };
            eprintln!("cobreak: {kind}: {message}");
            ExitCode::from(err.exit_code())
        }
    }
}

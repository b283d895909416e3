//! The `refinable` command-line tool.
//!
//! [`run`] parses arguments, executes one subcommand and returns the exit
//! status; `main` only wires it to the process streams.

mod commands;
pub mod error;
pub mod report;

use std::ffi::OsString;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use refinable::cascade::{DEFAULT_LEVEL_CAP, DEFAULT_SUPPORT_EPS};
use refinable::{parse_problem, InitialFunctionKind, Problem};

pub use error::{CliError, EXIT_INPUT, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE};
pub use report::OutputFormat;

#[derive(Debug, Parser)]
#[command(
    name = "refinable",
    version,
    about = "Support bounds, cascade iteration and exact lattice values for refinable functions"
)]
pub struct Cli {
    /// Rendering of standard output.
    #[arg(long, value_enum, default_value_t = OutputFormat::Table, global = true)]
    pub format: OutputFormat,

    /// Worker threads for lattice sweeps; 1 keeps everything on the calling thread.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..), global = true)]
    pub threads: u16,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Determinant, spectrum, norms, dilation verdict and Jordan structure.
    Analyze(ProblemArg),
    /// Every applicable support bound.
    Bound(ProblemArg),
    /// Cascade iteration on the refining lattices.
    Cascade(CascadeArgs),
    /// Values at integer points from the transfer-matrix eigenvector.
    Values(ValuesArgs),
    /// Exact values on the lattices M⁻ʲℤᵈ.
    Refine(RefineArgs),
    /// Run the invariant suite.
    Check(CheckArgs),
}

#[derive(Debug, Args)]
pub struct ProblemArg {
    /// Problem document (JSON); `-` reads standard input.
    pub problem: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Initial {
    /// Indicator of [0,1)ᵈ.
    Box,
    /// Tensor-product hat.
    Hat,
}

impl From<Initial> for InitialFunctionKind {
    fn from(v: Initial) -> Self {
        match v {
            Initial::Box => InitialFunctionKind::IndicatorBox,
            Initial::Hat => InitialFunctionKind::TensorHat,
        }
    }
}

fn level_count(s: &str) -> Result<u32, String> {
    let n: u32 = s.parse().map_err(|e| format!("{e}"))?;
    if n > DEFAULT_LEVEL_CAP {
        return Err(format!("at most {DEFAULT_LEVEL_CAP} levels"));
    }
    Ok(n)
}

fn threshold(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if !(v.is_finite() && v >= 0.0) {
        return Err("must be a finite non-negative number".into());
    }
    Ok(v)
}

#[derive(Debug, Args)]
pub struct CascadeArgs {
    #[command(flatten)]
    pub input: ProblemArg,
    /// Number of lattice levels.
    #[arg(long, default_value_t = 8, value_parser = level_count)]
    pub iters: u32,
    #[arg(long, value_enum, default_value_t = Initial::Box)]
    pub initial: Initial,
    /// Samples with magnitude at or below this count as zero.
    #[arg(long, default_value_t = DEFAULT_SUPPORT_EPS, value_parser = threshold)]
    pub eps: f64,
    /// Integer-lattice iterations applied to the initial function before level 0.
    #[arg(long, default_value_t = 0)]
    pub warmup: u32,
    /// Write `<stem>.level<j>.tsv` sample dumps into this directory.
    #[arg(long)]
    pub dump_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValuesArgs {
    #[command(flatten)]
    pub input: ProblemArg,
    /// Resolve a multi-dimensional eigenspace with the left-closed convention.
    #[arg(long)]
    pub left_closed: bool,
}

#[derive(Debug, Args)]
pub struct RefineArgs {
    #[command(flatten)]
    pub input: ProblemArg,
    #[arg(long, default_value_t = 4, value_parser = level_count)]
    pub levels: u32,
    /// Seed with the left-closed solution instead of the unique eigenvector.
    #[arg(long)]
    pub left_closed: bool,
    /// Write `<stem>.level<j>.tsv` value dumps into this directory.
    #[arg(long)]
    pub dump_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub input: ProblemArg,
    #[arg(long, default_value_t = 6, value_parser = level_count)]
    pub levels: u32,
    #[arg(long, default_value_t = DEFAULT_SUPPORT_EPS, value_parser = threshold)]
    pub eps: f64,
    /// Check refinement invariants with the left-closed seed when the eigenspace is not unique.
    #[arg(long)]
    pub left_closed: bool,
}

/// Result of a subcommand: the report, warnings for the diagnostic stream,
/// and an error to raise after the report has been written.
pub(crate) struct Output {
    pub report: report::Report,
    pub warnings: Vec<String>,
    pub deferred: Option<CliError>,
}

impl Output {
    pub fn new(report: report::Report) -> Self {
        Self {
            report,
            warnings: Vec::new(),
            deferred: None,
        }
    }
}

pub(crate) fn read_source(path: &Path) -> Result<String, CliError> {
    let read_err = |source| CliError::Read {
        path: path.to_path_buf(),
        source,
    };
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(read_err)?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(read_err)
    }
}

pub(crate) fn load_problem(path: &Path) -> Result<Problem, CliError> {
    Ok(parse_problem(&read_source(path)?)?)
}

/// File stem used for dump names; `stdin` for standard input.
pub(crate) fn stem(path: &Path) -> String {
    if path == Path::new("-") {
        return "stdin".into();
    }
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "problem".into())
}

fn dispatch(cli: &Cli) -> Result<Output, CliError> {
    let parallel = cli.threads > 1;
    match &cli.command {
        Command::Analyze(a) => commands::analyze(&a.problem),
        Command::Bound(a) => commands::bound(&a.problem),
        Command::Cascade(a) => commands::cascade(a, parallel),
        Command::Values(a) => commands::values(a),
        Command::Refine(a) => commands::refine(a, parallel),
        Command::Check(a) => commands::check(a, parallel),
    }
}

fn execute(cli: &Cli) -> Result<Output, CliError> {
    if cli.threads <= 1 {
        return dispatch(cli);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.into())
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {} threads: {e}", cli.threads)))?;
    pool.install(|| dispatch(cli))
}

/// Run the tool on `args` (including the program name) and return the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{}", e.render());
                return EXIT_OK;
            }
            let _ = write!(err, "{}", e.render());
            let first = e.to_string().lines().next().unwrap_or_default().to_string();
            let usage = CliError::Usage(first.trim_start_matches("error: ").to_string());
            let _ = writeln!(err, "{}", usage.diagnostic());
            return EXIT_USAGE;
        }
    };
    let failure = match execute(&cli) {
        Ok(output) => {
            if let Err(e) = out.write_all(output.report.render(cli.format).as_bytes()) {
                let _ = writeln!(err, "error: code=unwritable-output exit={EXIT_INPUT}: {e}");
                return EXIT_INPUT;
            }
            for w in &output.warnings {
                let _ = writeln!(err, "{w}");
            }
            output.deferred
        }
        Err(e) => Some(e),
    };
    match failure {
        None => EXIT_OK,
        Some(e) => {
            let _ = writeln!(err, "{}", e.diagnostic());
            e.code().1
        }
    }
}

//! Command-line front end for best L1 approximation, corrupted-polynomial
//! recovery and error-localization measurements.

pub mod commands;
pub mod error;
pub mod expr;
pub mod input;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use l1rec_core::recovery::CORRUPTION_TOL;

use crate::commands::{BenchCase, Outcome, DEFAULT_SAMPLES};
use crate::error::CliError;
use crate::input::FunctionSpec;
use crate::report::{write_atomic, RunReport};

#[derive(Debug, Parser)]
#[command(name = "l1rec", version, about = "Best L1 polynomial approximation and corrupted-polynomial recovery on [-1, 1]")]
pub struct Cli {
    /// Leave the wall-clock fields out of the report.
    #[arg(long, global = true)]
    pub no_timestamp: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct FnArgs {
    /// Expression in x, catalog name, `samples:PATH` or `poly:PATH`.
    #[arg(long = "fn", value_name = "SPEC")]
    pub func: String,

    /// Corruption intervals `a..b,c..d` for `poly:` inputs.
    #[arg(long, value_name = "INTERVALS", allow_hyphen_values = true)]
    pub corrupt: Option<String>,

    /// Corruption added on the intervals, as an expression in x.
    #[arg(long, value_name = "EXPR", allow_hyphen_values = true)]
    pub omega: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Best L1 approximation of a given degree.
    Approx {
        #[command(flatten)]
        input: FnArgs,
        #[arg(long)]
        degree: usize,
        /// Stopping tolerance relative to the L1 norm of f.
        #[arg(long, default_value_t = 1e-14)]
        tol: f64,
        #[arg(long, default_value_t = 50)]
        max_iter: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write `x,residual` samples for plotting.
        #[arg(long)]
        errdata: Option<PathBuf>,
    },
    /// Recover a polynomial from corrupted samples on a Chebyshev grid.
    Recover {
        #[command(flatten)]
        input: FnArgs,
        #[arg(long, default_value_t = 0)]
        degree: usize,
        /// Number of samples, N + 1.
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        /// Try degrees 0..=n_max and report the first exact recovery.
        #[arg(long, value_name = "N_MAX")]
        sweep: Option<usize>,
        /// Residuals above this multiple of max |f| count as corrupted.
        #[arg(long, default_value_t = CORRUPTION_TOL)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Measure where the best L1 error exceeds half the minimax error.
    Localize {
        #[command(flatten)]
        input: FnArgs,
        /// Comma-separated degrees.
        #[arg(long, value_delimiter = ',', required = true)]
        degrees: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Restricted isometry constant of the recovery null space.
    Rip {
        #[arg(long = "N")]
        big_n: usize,
        #[arg(long = "n")]
        n: usize,
        #[arg(long = "k")]
        k: usize,
        /// Also compute the exact constant by enumerating supports.
        #[arg(long)]
        bruteforce: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reproducible benchmark tables.
    Bench {
        #[arg(long, value_enum)]
        case: BenchCase,
        /// Override the default degree list.
        #[arg(long, value_delimiter = ',')]
        degrees: Option<Vec<usize>>,
        /// Directory for `bench_<case>.json` and `bench_<case>.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parse `argv` (program name first), run, and return the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let echo: Vec<String> = argv
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    match execute(&cli, echo) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn resolve(input: &FnArgs) -> Result<input::Resolved, CliError> {
    let spec = FunctionSpec::from_arg(&input.func, input.corrupt.as_deref(), input.omega.as_deref())?;
    input::resolve(spec)
}

/// Run the command; numerical errors still produce a report.
fn execute(cli: &Cli, echo: Vec<String>) -> Result<i32, CliError> {
    let start = Instant::now();
    let mut report = RunReport::new(echo);
    let mut csv: Option<(PathBuf, String)> = None;

    let (result, out) = match &cli.command {
        Command::Approx {
            input,
            degree,
            tol,
            max_iter,
            out,
            errdata,
        } => {
            let r = resolve(input)?;
            report.input = Some(commands::echo(&r, &input.func));
            let args = commands::ApproxArgs {
                degree: *degree,
                tol: *tol,
                max_iter: *max_iter,
                errdata: errdata.as_deref(),
            };
            (commands::approx(&r, report.clone(), &args), out.clone())
        }
        Command::Recover {
            input,
            degree,
            samples,
            sweep,
            tol,
            out,
        } => {
            let r = resolve(input)?;
            report.input = Some(commands::echo(&r, &input.func));
            let args = commands::RecoverArgs {
                degree: *degree,
                samples: *samples,
                sweep: *sweep,
                tol: *tol,
            };
            (commands::recover(&r, report.clone(), &args), out.clone())
        }
        Command::Localize { input, degrees, out } => {
            let r = resolve(input)?;
            report.input = Some(commands::echo(&r, &input.func));
            (commands::localize(&r, report.clone(), degrees), out.clone())
        }
        Command::Rip {
            big_n,
            n,
            k,
            bruteforce,
            out,
        } => (commands::rip(report.clone(), *big_n, *n, *k, *bruteforce), out.clone()),
        Command::Bench { case, degrees, out } => {
            let res = commands::bench(*case, report.clone(), degrees.as_deref());
            let paths = out.as_deref().map(|d| commands::bench_paths(d, *case));
            let res = res.map(|(outcome, table)| {
                if let Some((_, csv_path)) = &paths {
                    csv = Some((csv_path.clone(), table));
                }
                outcome
            });
            (res, paths.map(|p| p.0))
        }
    };

    let (mut report, code) = match result {
        Ok(Outcome { report, failed }) => (report, if failed { 3 } else { 0 }),
        Err(e) if e.exit_code() == 3 => {
            report.status = "failed".into();
            report.path = Some(failure_path(&e).into());
            report.error = Some(e.to_string());
            (report, 3)
        }
        Err(e) => return Err(e),
    };
    if !cli.no_timestamp {
        report.stamp(start.elapsed().as_secs_f64() * 1e3);
    }
    emit(&report, out.as_deref())?;
    if let Some((path, table)) = csv {
        write_atomic(&path, table.as_bytes())?;
    }
    if code == 3 {
        if let Some(msg) = &report.error {
            eprintln!("error: {msg}");
        }
    }
    Ok(code)
}

fn failure_path(e: &CliError) -> &'static str {
    use l1rec_core::L1Error;
    match e {
        CliError::Core(L1Error::NoConvergence(_)) => "NoConvergence",
        CliError::Core(L1Error::SubdivisionLimit { .. }) => "SubdivisionLimit",
        CliError::Core(L1Error::IterationLimit { .. }) => "IterationLimit",
        CliError::Core(L1Error::StepFailure(_)) => "StepFailure",
        CliError::Core(L1Error::ExchangeStalled(_)) => "ExchangeStalled",
        _ => "Failed",
    }
}

fn emit(report: &RunReport, out: Option<&Path>) -> Result<(), CliError> {
    let text = report.to_json()?;
    match out {
        Some(path) => write_atomic(path, text.as_bytes()),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(stdout.flush()?)
        }
    }
}

/// Logging level from `L1REC_LOG` (`error`, `info` or `debug`), default `error`.
pub fn init_logging() {
    let env = env_logger::Env::new().filter_or("L1REC_LOG", "error");
    let _ = env_logger::Builder::from_env(env).format_timestamp(None).try_init();
}

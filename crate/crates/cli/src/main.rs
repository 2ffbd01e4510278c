use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use codeprobe_cli::{
    cmd_boost, cmd_bound, cmd_code, cmd_estimator, cmd_sweep, disjointness_error_json, emit,
    load_code_file, reproduce, BoundFormat, CodeSpec, CommandOutput,
};
use codeprobe_core::bounds::SweepMode;
use codeprobe_core::Error;

/// Workbench for quantum probe states built from binary codes: QFI bounds
/// under qubit erasures from weight statistics, exact oracles, estimator
/// curves, and a built-in verification table.
#[derive(Parser)]
#[command(name = "codeprobe", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(ValueEnum, Clone, Copy)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(ValueEnum, Clone, Copy)]
enum ModeArg {
    All,
    Burst,
}

impl From<ModeArg> for SweepMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::All => SweepMode::All,
            ModeArg::Burst => SweepMode::Burst,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Construct a code and write it as JSON; prints n, |C|, d, linearity.
    Code {
        #[command(subcommand)]
        spec: CodeSpecCmd,
    },
    /// All bound values for one explicit erasure pattern.
    Bound {
        /// Code JSON file.
        #[arg(long = "in")]
        input: PathBuf,
        /// Erased positions, 1-based, comma-separated.
        #[arg(long, value_delimiter = ',')]
        erase: Option<Vec<usize>>,
        /// Also run the exact density-operator oracle.
        #[arg(long)]
        exact: bool,
        #[arg(long, value_enum, default_value = "json")]
        format: FormatArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bounds for every erasure pattern of a given size.
    Sweep {
        #[arg(long = "in")]
        input: PathBuf,
        /// Number of erased positions.
        #[arg(short = 't', long = "t")]
        t: usize,
        /// Pattern enumeration: all subsets or consecutive windows.
        #[arg(long, value_enum, default_value = "all")]
        mode: ModeArg,
        #[arg(long)]
        exact: bool,
        /// Worker threads for the sweep.
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Boosted lower bound: outer code concatenated with a length-r inner
    /// repetition code, erasures given on the concatenated length.
    Boost {
        /// Outer code JSON file.
        #[arg(long = "in")]
        input: PathBuf,
        /// Inner repetition length.
        #[arg(long)]
        r: usize,
        /// Erased positions on the concatenated code, comma-separated.
        #[arg(long, value_delimiter = ',')]
        erase: Option<Vec<usize>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimator moment curves (CSV) plus a JSON summary.
    Estimator {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_delimiter = ',')]
        erase: Option<Vec<usize>>,
        /// Half-width of the symmetric θ grid.
        #[arg(long = "theta-max", default_value_t = 0.05)]
        theta_max: f64,
        /// Number of grid points.
        #[arg(long, default_value_t = 101)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute the headline values and compare against their expected
    /// constants; exits 4 on any mismatch.
    Reproduce {
        /// Write the advantage-curve CSV here (defaults to stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Load the base code from a file instead of constructing it.
        #[arg(long)]
        base: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum CodeSpecCmd {
    /// Reed-Muller code RM(r, m).
    Rm {
        #[arg(long)]
        r: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Length-n repetition code.
    Rep {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Concatenate a code with an inner length-r repetition code.
    Concat {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// XOR-translate a code by a shift word.
    Coset {
        #[arg(long = "in")]
        input: PathBuf,
        /// Shift as a 0/1 string, position 1 leftmost.
        #[arg(long)]
        shift: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Expand a generator-matrix JSON file into explicit codewords.
    FromGenerator {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    // die quietly on a closed pipe like any other command-line filter
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => match err {
            Error::Disjointness { .. } => {
                println!("{}", disjointness_error_json(&err));
                eprintln!("error: {err}");
                ExitCode::from(3)
            }
            other => {
                eprintln!("error: {other}");
                ExitCode::from(1)
            }
        },
    }
}

fn write_output(output: CommandOutput, out: Option<PathBuf>) -> Result<ExitCode, Error> {
    emit(&output, out.as_deref()).map_err(|e| Error::Parse(format!("writing output: {e}")))?;
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.cmd {
        Cmd::Code { spec } => {
            let (spec, out) = match spec {
                CodeSpecCmd::Rm { r, m, out } => (CodeSpec::ReedMuller { r, m }, out),
                CodeSpecCmd::Rep { n, out } => (CodeSpec::Repetition { n }, out),
                CodeSpecCmd::Concat { input, r, out } => (CodeSpec::Concat { input, r }, out),
                CodeSpecCmd::Coset { input, shift, out } => (CodeSpec::Coset { input, shift }, out),
                CodeSpecCmd::FromGenerator { input, out } => {
                    (CodeSpec::FromGenerator { input }, out)
                }
            };
            // an out-of-domain constructor spec is a usage error
            match cmd_code(&spec) {
                Ok(output) => write_output(output, out),
                Err(Error::Domain(msg)) => {
                    eprintln!("error: {msg}");
                    Ok(ExitCode::from(2))
                }
                Err(other) => Err(other),
            }
        }
        Cmd::Bound {
            input,
            erase,
            exact,
            format,
            out,
        } => {
            let code = load_code_file(&input)?;
            let format = match format {
                FormatArg::Json => BoundFormat::Json,
                FormatArg::Csv => BoundFormat::Csv,
            };
            write_output(
                cmd_bound(&code, &erase.unwrap_or_default(), exact, &format)?,
                out,
            )
        }
        Cmd::Sweep {
            input,
            t,
            mode,
            exact,
            jobs,
            format,
            out,
        } => {
            let code = load_code_file(&input)?;
            let as_json = matches!(format, FormatArg::Json);
            let output = match jobs {
                Some(n) if n >= 1 => {
                    let pool = rayon::ThreadPoolBuilder::new()
                        .num_threads(n)
                        .build()
                        .map_err(|e| Error::Domain(format!("thread pool: {e}")))?;
                    pool.install(|| cmd_sweep(&code, t, mode.into(), exact, as_json))?
                }
                Some(_) => {
                    return Err(Error::Domain("--jobs must be at least 1".into()));
                }
                None => cmd_sweep(&code, t, mode.into(), exact, as_json)?,
            };
            write_output(output, out)
        }
        Cmd::Boost {
            input,
            r,
            erase,
            out,
        } => {
            let code = load_code_file(&input)?;
            write_output(cmd_boost(&code, r, &erase.unwrap_or_default())?, out)
        }
        Cmd::Estimator {
            input,
            erase,
            theta_max,
            steps,
            out,
        } => {
            let code = load_code_file(&input)?;
            write_output(
                cmd_estimator(&code, &erase.unwrap_or_default(), theta_max, steps)?,
                out,
            )
        }
        Cmd::Reproduce { out, base } => {
            let report = reproduce::reproduce(base.as_deref())?;
            print!("{}", report.render_table());
            let output = CommandOutput {
                artifact: report.advantage_csv(),
                summary: None,
            };
            emit(&output, out.as_deref())
                .map_err(|e| Error::Parse(format!("writing output: {e}")))?;
            if report.all_pass() {
                Ok(ExitCode::SUCCESS)
            } else {
                for failure in report.failures() {
                    eprintln!(
                        "mismatch: {} expected {} computed {}",
                        failure.label, failure.expected, failure.computed
                    );
                }
                Ok(ExitCode::from(4))
            }
        }
    }
}

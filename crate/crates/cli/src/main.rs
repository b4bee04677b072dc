use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use torsionlab::harness::commands::{
    cmd_circle_table, cmd_torsion, cmd_verify, BaseSpec, CommandError, EXIT_FAILURE, EXIT_INVALID_INPUT, EXIT_OK,
};
use torsionlab::harness::VerifyOptions;

/// Environment variable capping the number of worker threads.
const THREADS_VAR: &str = "TORSIONLAB_THREADS";

#[derive(Parser)]
#[command(name = "torsionlab", version, about = "Torsion forms of flat complexes over tori")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Base {
    Point,
    T1,
    T2,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the torsion form of the complex described in a JSON file.
    Torsion {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "point")]
        base: Base,
        /// Grid points per axis (ignored over a point).
        #[arg(long, default_value_t = 32)]
        grid: usize,
        /// Quadrature tolerance.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Write the result here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification suite, or `all`.
    Verify {
        suite: String,
        /// Tolerance override, `suite=value`; may be repeated.
        #[arg(long = "tol", value_parser = parse_override)]
        overrides: Vec<(String, f64)>,
        /// Include wall times in the report.
        #[arg(long)]
        timing: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate circle-bundle torsion coefficients as CSV.
    CircleTable {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        kmax: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_override(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| format!("expected suite=value, got {s:?}"))?;
    let value: f64 = value.parse().map_err(|e| format!("bad tolerance {value:?}: {e}"))?;
    Ok((name.to_string(), value))
}

fn emit<T: Serialize>(value: &T, out: Option<&PathBuf>) -> Result<(), CommandError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable report");
    text.push('\n');
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| CommandError::Io {
            path: path.display().to_string(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = value
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("{THREADS_VAR} must be a positive integer, got {value:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn run(cli: Cli) -> Result<i32, CommandError> {
    match cli.command {
        Command::Torsion {
            file,
            base,
            grid,
            tol,
            out,
        } => {
            let base = match base {
                Base::Point => BaseSpec::Point,
                Base::T1 => BaseSpec::T1,
                Base::T2 => BaseSpec::T2,
            };
            let result = cmd_torsion(&file, base, grid, tol)?;
            emit(&result, out.as_ref())?;
            Ok(EXIT_OK)
        }
        Command::Verify {
            suite,
            overrides,
            timing,
            out,
        } => {
            let opts = VerifyOptions {
                overrides: overrides.into_iter().collect::<BTreeMap<_, _>>(),
                timing,
            };
            let report = cmd_verify(&suite, &opts)?;
            emit(&report, out.as_ref())?;
            Ok(if report.passed { EXIT_OK } else { EXIT_FAILURE })
        }
        Command::CircleTable { n, kmax, out } => {
            let rows = cmd_circle_table(n, kmax, &out)?;
            eprintln!("wrote {rows} rows to {}", out.display());
            Ok(EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_INVALID_INPUT as u8);
    }
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

//! Command implementations; the binary only parses arguments and maps
//! errors to exit codes.

use std::fs;
use std::path::Path;

use thiserror::Error;

use super::schema::{ComplexJson, LoadError, SchemaError};
use super::{verify, HarnessError, VerifyOptions, VerifyReport};
use crate::circle_model::{circle_table, CircleError, CircleTableRow};
use crate::exterior::{ExteriorError, TorusBase};
use crate::torsion::{torsion_form, TorsionError, TorsionResult};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INVALID_INPUT: i32 = 2;
pub const EXIT_NOT_EXACT: i32 = 3;
pub const EXIT_NO_CONVERGENCE: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseSpec {
    Point,
    T1,
    T2,
}

impl BaseSpec {
    pub fn torus(self, grid: usize) -> Result<TorusBase, ExteriorError> {
        match self {
            BaseSpec::Point => Ok(TorusBase::point()),
            BaseSpec::T1 => TorusBase::new(1, grid),
            BaseSpec::T2 => TorusBase::new(2, grid),
        }
    }
}

#[derive(Debug, Error)]
pub enum CommandError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid input: {0}")]
    Schema(#[from] SchemaError),
    #[error("invalid base: {0}")]
    Base(#[from] ExteriorError),
    #[error(transparent)]
    Torsion(#[from] TorsionError),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error(transparent)]
    Circle(#[from] CircleError),
    #[error("writing CSV: {0}")]
    Csv(#[from] csv::Error),
}

impl From<LoadError> for CommandError {
    fn from(e: LoadError) -> Self {
        match e {
            LoadError::Schema(s) => CommandError::Schema(s),
            LoadError::Torsion(t) => CommandError::Torsion(t),
        }
    }
}

impl CommandError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CommandError::Schema(_) | CommandError::Base(_) | CommandError::Harness(_) | CommandError::Circle(_) => {
                EXIT_INVALID_INPUT
            }
            CommandError::Torsion(t) => match t {
                TorsionError::NotAComplex { .. } | TorsionError::NotExact { .. } => EXIT_NOT_EXACT,
                TorsionError::Convergence(_) => EXIT_NO_CONVERGENCE,
                TorsionError::Shape(_) | TorsionError::BadTol(_) | TorsionError::Bundle(_) => EXIT_INVALID_INPUT,
                _ => EXIT_FAILURE,
            },
            CommandError::Io { .. } | CommandError::Csv(_) => EXIT_FAILURE,
        }
    }
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> CommandError + '_ {
    move |source| CommandError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Reads a complex from `path`, samples it on the requested base and
/// computes its torsion form.
pub fn cmd_torsion(path: &Path, base: BaseSpec, grid: usize, tol: f64) -> Result<TorsionResult, CommandError> {
    let text = fs::read_to_string(path).map_err(io_error(path))?;
    let base = base.torus(grid)?;
    let cx = ComplexJson::parse(&text)?.build(base)?;
    Ok(torsion_form(&cx, tol)?)
}

pub fn cmd_verify(suite: &str, opts: &VerifyOptions) -> Result<VerifyReport, CommandError> {
    Ok(verify(suite, opts)?)
}

pub fn write_circle_csv<W: std::io::Write>(rows: &[CircleTableRow], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the circle coefficient table for `n` and `k <= kmax`; returns the
/// number of rows.
pub fn cmd_circle_table(n: u64, kmax: usize, out: &Path) -> Result<usize, CommandError> {
    let rows = circle_table(n, kmax)?;
    let file = fs::File::create(out).map_err(io_error(out))?;
    write_circle_csv(&rows, file)?;
    Ok(rows.len())
}

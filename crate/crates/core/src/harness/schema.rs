//! JSON input formats.
//!
//! Matrix entries are either a number or a `[re, im]` pair; matrices are
//! lists of rows. A metric family is
//! `{"rank": r, "samples": "fourier", "terms": [{"mode": [k1, k2], "matrix": M}]}`
//! or `{"samples": "constant", "matrix": M}`, and is sampled on the grid at
//! load time.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exterior::TorusBase;
use crate::flat_bundle::{BundleError, FourierTerm, MetricFamily};
use crate::linalg::CMatrix;
use crate::torsion::{FiltrationData, FlatComplexWithMetrics, TorsionError};

#[derive(Debug, Error)]
pub enum SchemaError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Bundle(#[from] BundleError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    pub fn value(self) -> Complex64 {
        match self {
            Entry::Real(re) => Complex64::new(re, 0.0),
            Entry::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

pub type MatrixJson = Vec<Vec<Entry>>;

/// Rows of entries to a matrix; `expected` fixes the shape when the row list
/// is empty.
pub fn matrix_from_json(rows: &MatrixJson, expected: Option<(usize, usize)>) -> Result<CMatrix, SchemaError> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(expected.map_or(0, |e| e.1), |r| r.len());
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(SchemaError::Invalid("matrix rows have different lengths".into()));
    }
    if let Some((er, ec)) = expected {
        if (nrows, ncols) != (er, ec) && !(nrows == 0 && er == 0) {
            return Err(SchemaError::Invalid(format!(
                "matrix is {nrows}×{ncols}, expected {er}×{ec}"
            )));
        }
        if nrows == 0 {
            return Ok(CMatrix::zeros(er, ec));
        }
    }
    Ok(CMatrix::from_fn(nrows, ncols, |i, j| rows[i][j].value()))
}

pub fn matrix_to_json(m: &CMatrix) -> MatrixJson {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| {
                    let z = m[(i, j)];
                    if z.im == 0.0 {
                        Entry::Real(z.re)
                    } else {
                        Entry::Complex([z.re, z.im])
                    }
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierTermJson {
    pub mode: Vec<i32>,
    pub matrix: MatrixJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "samples", rename_all = "lowercase")]
pub enum MetricJson {
    Fourier { rank: usize, terms: Vec<FourierTermJson> },
    Constant { matrix: MatrixJson },
}

impl MetricJson {
    pub fn rank(&self) -> usize {
        match self {
            MetricJson::Fourier { rank, .. } => *rank,
            MetricJson::Constant { matrix } => matrix.len(),
        }
    }

    pub fn materialize(&self, base: TorusBase) -> Result<MetricFamily, SchemaError> {
        match self {
            MetricJson::Constant { matrix } => {
                let r = matrix.len();
                Ok(MetricFamily::constant(base, matrix_from_json(matrix, Some((r, r)))?)?)
            }
            MetricJson::Fourier { rank, terms } => {
                let terms = terms
                    .iter()
                    .map(|t| {
                        if t.mode.len() > 2 || t.mode.len() < base.dim() {
                            return Err(SchemaError::Invalid(format!(
                                "Fourier mode {:?} does not fit a base of dimension {}",
                                t.mode,
                                base.dim()
                            )));
                        }
                        let mut mode = [0i32; 2];
                        for (m, v) in mode.iter_mut().zip(&t.mode) {
                            *m = *v;
                        }
                        Ok(FourierTerm {
                            mode,
                            matrix: matrix_from_json(&t.matrix, Some((*rank, *rank)))?,
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(MetricFamily::from_fourier(base, *rank, &terms)?)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexJson {
    pub ranks: Vec<usize>,
    pub boundaries: Vec<MatrixJson>,
    pub metrics: Vec<MetricJson>,
}

/// Failure to build a complex from valid JSON: either a schema problem or a
/// mathematical one.
#[derive(Debug, Error)]
pub enum LoadError {
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error(transparent)]
    Torsion(#[from] TorsionError),
}

impl ComplexJson {
    pub fn parse(text: &str) -> Result<Self, SchemaError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn build(&self, base: TorusBase) -> Result<FlatComplexWithMetrics, LoadError> {
        if self.metrics.len() != self.ranks.len() || self.boundaries.len() + 1 != self.ranks.len() {
            return Err(SchemaError::Invalid(format!(
                "{} ranks need {} metrics and {} boundaries",
                self.ranks.len(),
                self.ranks.len(),
                self.ranks.len().saturating_sub(1)
            ))
            .into());
        }
        let boundaries = self
            .boundaries
            .iter()
            .enumerate()
            .map(|(k, b)| matrix_from_json(b, Some((self.ranks[k + 1], self.ranks[k]))))
            .collect::<Result<Vec<_>, _>>()?;
        let metrics = self
            .metrics
            .iter()
            .zip(&self.ranks)
            .map(|(m, &r)| {
                if m.rank() != r {
                    return Err(SchemaError::Invalid(format!(
                        "metric has rank {}, expected {r}",
                        m.rank()
                    )));
                }
                m.materialize(base)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(FlatComplexWithMetrics::new(self.ranks.clone(), boundaries, metrics)?)
    }
}

/// `flag` lists the subspaces, each as a list of basis columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiltrationJson {
    pub flag: Vec<Vec<Vec<Entry>>>,
    pub factor_metrics: Vec<MatrixJson>,
}

impl FiltrationJson {
    pub fn build(&self, rank: usize) -> Result<FiltrationData, LoadError> {
        let flag = self
            .flag
            .iter()
            .map(|cols| {
                if cols.iter().any(|c| c.len() != rank) {
                    return Err(SchemaError::Invalid(format!("flag vectors must have length {rank}")));
                }
                Ok(CMatrix::from_fn(rank, cols.len(), |i, j| cols[j][i].value()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let metrics = self
            .factor_metrics
            .iter()
            .map(|m| matrix_from_json(m, None))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(FiltrationData::new(rank, flag, metrics)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_term_example_parses() {
        let text = r#"{"ranks": [1, 1], "boundaries": [[[1.0]]],
            "metrics": [{"samples": "constant", "matrix": [[1.0]]},
                        {"samples": "constant", "matrix": [[2.0]]}]}"#;
        let cx = ComplexJson::parse(text).unwrap().build(TorusBase::point()).unwrap();
        assert_eq!(cx.ranks(), &[1, 1]);
        assert_eq!(cx.metrics()[1].samples()[0][(0, 0)], Complex64::new(2.0, 0.0));
    }

    #[test]
    fn fourier_metric_and_complex_entries() {
        let base = TorusBase::new(1, 8).unwrap();
        let text = r#"{"rank": 1, "samples": "fourier",
            "terms": [{"mode": [0, 0], "matrix": [[2.0]]}, {"mode": [1, 0], "matrix": [[[0.0, 0.5]]]}]}"#;
        let m: MetricJson = serde_json::from_str(text).unwrap();
        let g = m.materialize(base).unwrap();
        // Hermitian part of 2 + 0.5i e^{ix} is 2 - 0.5 sin x.
        let x = base.coords(2)[0];
        assert!((g.samples()[2][(0, 0)].re - (2.0 - 0.5 * x.sin())).abs() < 1e-15);
    }

    #[test]
    fn schema_violations() {
        assert!(ComplexJson::parse(r#"{"ranks": [1]}"#).is_err());
        assert!(ComplexJson::parse(r#"{"ranks": [1], "boundaries": [], "metrics": [], "extra": 1}"#).is_err());
        let wrong = ComplexJson::parse(
            r#"{"ranks": [1, 1], "boundaries": [[[1.0, 2.0]]],
                "metrics": [{"samples": "constant", "matrix": [[1.0]]}, {"samples": "constant", "matrix": [[1.0]]}]}"#,
        )
        .unwrap();
        assert!(matches!(wrong.build(TorusBase::point()), Err(LoadError::Schema(_))));
    }

    #[test]
    fn filtration_parses() {
        let f: FiltrationJson =
            serde_json::from_str(r#"{"flag": [[[1, 0]], [[1, 0], [0, 1]]], "factor_metrics": [[[1.0]], [[2.0]]]}"#)
                .unwrap();
        let data = f.build(2).unwrap();
        assert_eq!(data.len(), 2);
        assert_eq!(
            matrix_to_json(&data.flag()[0]),
            vec![vec![Entry::Real(1.0)], vec![Entry::Real(0.0)]]
        );
    }
}

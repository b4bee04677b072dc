use num_complex::Complex64;

use super::{ses_torsion_with_complement, TorsionError, TorsionResult, EXACTNESS_TOL};
use crate::exterior::DifferentialForm;
use crate::flat_bundle::{FlatBundleData, MetricFamily, HERMITIAN_TOL};
use crate::linalg::{cholesky, max_abs, numerical_rank, CMatrix};

/// A flag `0 = V_0 ⊂ V_1 ⊂ ⋯ ⊂ V_r = C^rank` of constant subspaces with a
/// constant metric on each quotient `V_j / V_{j-1}`.
///
/// `flag[j-1]` is a basis of `V_j` (columns). The quotient `V_j / V_{j-1}`
/// is identified with the span of the last `dim V_j - dim V_{j-1}` columns
/// of that basis, and `factor_metrics[j-1]` is written in those coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct FiltrationData {
    flag: Vec<CMatrix>,
    factor_metrics: Vec<CMatrix>,
    /// `V_{j-1}` in the coordinates of the basis of `V_j`.
    embeddings: Vec<CMatrix>,
}

impl FiltrationData {
    pub fn new(rank: usize, flag: Vec<CMatrix>, factor_metrics: Vec<CMatrix>) -> Result<Self, TorsionError> {
        let bad = |msg: String| Err(TorsionError::InvalidFlag(msg));
        if flag.is_empty() {
            return bad("the flag is empty".into());
        }
        if flag.len() != factor_metrics.len() {
            return bad(format!(
                "{} subspaces but {} factor metrics",
                flag.len(),
                factor_metrics.len()
            ));
        }
        let mut embeddings = Vec::with_capacity(flag.len());
        let mut prev = CMatrix::zeros(rank, 0);
        for (j, b) in flag.iter().enumerate() {
            if b.nrows() != rank {
                return bad(format!(
                    "subspace {} has vectors of length {}, expected {rank}",
                    j + 1,
                    b.nrows()
                ));
            }
            if b.ncols() <= prev.ncols() {
                return bad(format!("dimensions must increase strictly at step {}", j + 1));
            }
            if numerical_rank(b, EXACTNESS_TOL) < b.ncols() {
                return bad(format!("basis of subspace {} is degenerate", j + 1));
            }
            // Least squares for V_{j-1} in the coordinates of V_j.
            let gram = b.adjoint() * b;
            let m = gram.lu().solve(&(b.adjoint() * &prev)).expect("full column rank basis");
            if max_abs(&(b * &m - &prev)) > 1e-9 * max_abs(&prev).max(1.0) {
                return bad(format!("subspace {} does not contain subspace {}", j + 1, j));
            }
            let d = b.ncols();
            let q = d - prev.ncols();
            let mut full = CMatrix::zeros(d, d);
            full.view_mut((0, 0), (d, prev.ncols())).copy_from(&m);
            for i in 0..q {
                full[(d - q + i, prev.ncols() + i)] = Complex64::new(1.0, 0.0);
            }
            if numerical_rank(&full, EXACTNESS_TOL) < d {
                return bad(format!(
                    "the last {q} basis vectors of subspace {} do not complement subspace {j}",
                    j + 1
                ));
            }
            let h = &factor_metrics[j];
            if h.nrows() != q || h.ncols() != q {
                return bad(format!("factor metric {} must be {q}×{q}", j + 1));
            }
            if max_abs(&(h - h.adjoint())) > HERMITIAN_TOL * max_abs(h).max(1.0) || cholesky(h).is_none() {
                return bad(format!("factor metric {} is not positive definite Hermitian", j + 1));
            }
            embeddings.push(m);
            prev = b.clone();
        }
        if prev.ncols() != rank {
            return bad(format!("last subspace has dimension {}, expected {rank}", prev.ncols()));
        }
        Ok(Self {
            flag,
            factor_metrics,
            embeddings,
        })
    }

    /// The full flag `C^1 ⊂ C^2 ⊂ ⋯` of the standard basis with the given
    /// scalar factor metrics.
    pub fn standard_full_flag(rank: usize, factors: &[f64]) -> Result<Self, TorsionError> {
        let flag = (1..=rank).map(|j| CMatrix::identity(rank, j)).collect();
        let metrics = factors
            .iter()
            .map(|&c| CMatrix::from_element(1, 1, Complex64::new(c, 0.0)))
            .collect();
        Self::new(rank, flag, metrics)
    }

    pub fn rank(&self) -> usize {
        self.flag[0].nrows()
    }

    pub fn flag(&self) -> &[CMatrix] {
        &self.flag
    }

    pub fn factor_metrics(&self) -> &[CMatrix] {
        &self.factor_metrics
    }

    pub fn len(&self) -> usize {
        self.flag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flag.is_empty()
    }
}

/// `𝒯(E_•, g^{F_•}, g^E) = -Σ_j 𝒯(g^{E_{j-1}}, g^{E_j}, g^{F_j})`, each term
/// the torsion of `0 → E_{j-1} → E_j → F_j → 0`.
pub fn filtration_torsion(
    bundle: &FlatBundleData,
    filt: &FiltrationData,
    tol: f64,
) -> Result<TorsionResult, TorsionError> {
    let g = &bundle.metric;
    if filt.rank() != g.rank() {
        return Err(TorsionError::InvalidFlag(format!(
            "flag is for rank {}, bundle has rank {}",
            filt.rank(),
            g.rank()
        )));
    }
    let base = g.base();
    let mut prev = MetricFamily::new(base, 0, vec![CMatrix::zeros(0, 0); base.num_points()])?;
    let mut total = DifferentialForm::zero(base);
    let mut report = None;
    for j in 0..filt.len() {
        let b = &filt.flag[j];
        let g_j = g.restrict(b)?;
        let g_q = MetricFamily::constant(base, filt.factor_metrics[j].clone())?;
        let d = b.ncols();
        let q = filt.factor_metrics[j].nrows();
        let complement = CMatrix::identity(d, d).columns(d - q, q).into_owned();
        let term = ses_torsion_with_complement(&prev, &g_j, &g_q, &filt.embeddings[j], &complement, tol)?;
        total = &total - &term.form;
        match &mut report {
            None => report = Some(term.report),
            Some(r) => r.merge(&term.report),
        }
        prev = g_j;
    }
    Ok(TorsionResult {
        form: total,
        report: report.expect("nonempty flag"),
    })
}

/// Positive-degree part of [`filtration_torsion`], a representative of the
/// torsion class of `(E, g^E)`.
pub fn torsion_class_rep(
    bundle: &FlatBundleData,
    filt: &FiltrationData,
    tol: f64,
) -> Result<DifferentialForm, TorsionError> {
    Ok(filtration_torsion(bundle, filt, tol)?.form.positive_degree_part())
}

/// `Σ_k (-1)^k 𝒯(E^k, g^{E^k})`.
pub fn graded_torsion_class(
    items: &[(usize, FlatBundleData, FiltrationData)],
    tol: f64,
) -> Result<DifferentialForm, TorsionError> {
    let Some((_, first, _)) = items.first() else {
        return Err(TorsionError::Shape("no bundles given".into()));
    };
    let base = first.base();
    let mut total = DifferentialForm::zero(base);
    for (k, bundle, filt) in items {
        if bundle.base() != base {
            return Err(TorsionError::Shape("bundles live on different bases".into()));
        }
        let rep = torsion_class_rep(bundle, filt, tol)?;
        total = if k % 2 == 0 { &total + &rep } else { &total - &rep };
    }
    Ok(total)
}

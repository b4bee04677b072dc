//! Torsion forms of exact flat complexes and the quantities built from them.
//!
//! For `X_t = ½(t∂* - ∂) + ½ω` the torsion form is
//! `𝒯 = -∫_0^∞ { φ tr_s[(N/2) f'(X_t)] - ½ χ'(E) f'(i√t/2) } dt/t`
//! with `f'(z) = (1 + 2z²) e^{z²}`, integrated in `u = ln t`.

mod complex;
mod filtration;
mod kernel;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

pub use crate::form_matrix::fprime_of;
pub use complex::{
    counterterm, superconnection_xt, torsion_integrand_reference, FlatComplexWithMetrics, EXACTNESS_TOL,
};
pub use filtration::{filtration_torsion, graded_torsion_class, torsion_class_rep, FiltrationData};

use crate::exterior::{DifferentialForm, Monomial};
use crate::flat_bundle::{phi_factor, BundleError, MetricFamily};
use crate::form_matrix::FormMatrixError;
use crate::linalg::{numerical_rank, CMatrix};
use crate::quadrature::{integrate_line, QuadError, QuadOptions, QuadReport};
use kernel::IntegrandKernel;

pub const MIN_TOL: f64 = 1e-12;
pub const MAX_TOL: f64 = 1e-4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TorsionError {
    #[error("{0}")]
    Shape(String),
    #[error("∂∘∂ does not vanish starting in degree {degree} (residual {residual:e})")]
    NotAComplex { degree: usize, residual: f64 },
    #[error("complex is not exact in degree {degree} (cohomology dimension {cohomology})")]
    NotExact { degree: usize, cohomology: i64 },
    #[error("t must be positive and finite, got {0}")]
    BadT(f64),
    #[error("tolerance {0:e} outside [{MIN_TOL:e}, {MAX_TOL:e}]")]
    BadTol(f64),
    #[error("quadrature failed: {0}")]
    Convergence(QuadError),
    #[error("embedding is not injective")]
    NotInjective,
    #[error("complement does not span a complement of the image")]
    BadComplement,
    #[error("invalid flag: {0}")]
    InvalidFlag(String),
    #[error(transparent)]
    Bundle(#[from] BundleError),
    #[error(transparent)]
    FormMatrix(#[from] FormMatrixError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TorsionReport {
    pub nodes: usize,
    pub est_error: f64,
    pub interval: [f64; 2],
    pub splits: Vec<f64>,
    /// Largest imaginary part discarded from the result.
    pub imag_residual: f64,
    pub provenance: Vec<String>,
}

impl TorsionReport {
    fn from_quad(q: QuadReport, imag_residual: f64) -> Self {
        Self {
            nodes: q.nodes,
            est_error: q.est_error,
            interval: q.interval,
            splits: q.splits,
            imag_residual,
            provenance: Vec::new(),
        }
    }

    fn merge(&mut self, other: &Self) {
        self.nodes += other.nodes;
        self.est_error += other.est_error;
        self.interval = [
            self.interval[0].min(other.interval[0]),
            self.interval[1].max(other.interval[1]),
        ];
        self.imag_residual = self.imag_residual.max(other.imag_residual);
        self.provenance.extend(other.provenance.iter().cloned());
    }
}

/// A real even form with the quadrature record that produced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TorsionResult {
    pub form: DifferentialForm,
    #[serde(flatten)]
    pub report: TorsionReport,
}

fn check_tol(tol: f64) -> Result<(), TorsionError> {
    if (MIN_TOL..=MAX_TOL).contains(&tol) {
        Ok(())
    } else {
        Err(TorsionError::BadTol(tol))
    }
}

/// The `φ`-normalized integrand at `t`, counterterm included.
pub fn torsion_integrand(cx: &FlatComplexWithMetrics, t: f64) -> Result<DifferentialForm, TorsionError> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(TorsionError::BadT(t));
    }
    let kernel = IntegrandKernel::new(cx);
    let values = kernel.eval(t);
    let base = cx.base();
    let mut form = DifferentialForm::zero(base);
    let phi2 = phi_factor(2);
    for (p, v) in values.iter().enumerate() {
        form.component_mut(Monomial::ONE)[p] = Complex64::new(v.body, 0.0);
        if base.dim() == 2 {
            form.component_mut(Monomial(3))[p] = v.top * phi2;
        }
    }
    Ok(form)
}

/// Smallest eigenvalue of `∂∂* + ∂*∂` over the grid; governs the decay of
/// the integrand at large `t`.
pub fn spectral_gap(cx: &FlatComplexWithMetrics) -> f64 {
    IntegrandKernel::new(cx).spectral_gap()
}

/// The torsion form `𝒯(∇, ∂, g)`.
pub fn torsion_form(cx: &FlatComplexWithMetrics, tol: f64) -> Result<TorsionResult, TorsionError> {
    check_tol(tol)?;
    let kernel = IntegrandKernel::new(cx);
    let base = cx.base();
    let np = base.num_points();
    let top = base.dim() == 2;
    let phi2 = phi_factor(2);
    let f = |u: f64| {
        let values = kernel.eval(u.exp());
        let mut out = Vec::with_capacity(if top { 3 * np } else { np });
        out.extend(values.iter().map(|v| v.body));
        if top {
            let scaled: Vec<Complex64> = values.iter().map(|v| v.top * phi2).collect();
            out.extend(scaled.iter().map(|z| z.re));
            out.extend(scaled.iter().map(|z| z.im));
        }
        out
    };
    let outcome = integrate_line(f, &QuadOptions::new(tol)).map_err(TorsionError::Convergence)?;
    let mut form = DifferentialForm::zero(base);
    for (dst, v) in form.component_mut(Monomial::ONE).iter_mut().zip(&outcome.value[..np]) {
        *dst = Complex64::new(-v, 0.0);
    }
    let mut imag: f64 = 0.0;
    if top {
        let re = &outcome.value[np..2 * np];
        let im = &outcome.value[2 * np..];
        for (dst, v) in form.component_mut(Monomial(3)).iter_mut().zip(re) {
            *dst = Complex64::new(-v, 0.0);
        }
        imag = im.iter().fold(0.0, |m, x| m.max(x.abs()));
    }
    Ok(TorsionResult {
        form,
        report: TorsionReport::from_quad(outcome.report, imag),
    })
}

/// Torsion of `0 → E → E → 0` with `∂ = Id`, metric `g` on the first
/// term and `g2` on the second.
pub fn metric_change_torsion(g: &MetricFamily, g2: &MetricFamily, tol: f64) -> Result<TorsionResult, TorsionError> {
    if g.base() != g2.base() {
        return Err(TorsionError::Shape("metrics live on different bases".into()));
    }
    if g.rank() != g2.rank() {
        return Err(TorsionError::Shape(format!(
            "ranks {} and {} differ",
            g.rank(),
            g2.rank()
        )));
    }
    let r = g.rank();
    let cx = FlatComplexWithMetrics::new(vec![r, r], vec![CMatrix::identity(r, r)], vec![g.clone(), g2.clone()])?;
    torsion_form(&cx, tol)
}

/// Standard basis vectors spanning a complement of `range(embed)`, chosen
/// greedily by largest distance to the span built so far.
pub fn default_complement(embed: &CMatrix) -> (CMatrix, Vec<usize>) {
    let n = embed.nrows();
    let m = n - embed.ncols();
    let mut basis: Vec<nalgebra::DVector<Complex64>> = Vec::new();
    let push = |v: nalgebra::DVector<Complex64>, basis: &mut Vec<nalgebra::DVector<Complex64>>| {
        let mut w = v;
        for b in basis.iter() {
            let c = b.dotc(&w);
            w -= b * c;
        }
        let norm = w.norm();
        if norm > 1e-12 {
            basis.push(w / Complex64::new(norm, 0.0));
        }
    };
    for j in 0..embed.ncols() {
        push(embed.column(j).into_owned(), &mut basis);
    }
    let mut chosen = Vec::new();
    for _ in 0..m {
        let mut best = (0, -1.0);
        for i in 0..n {
            if chosen.contains(&i) {
                continue;
            }
            let proj: f64 = basis.iter().map(|b| b[i].norm_sqr()).sum();
            let dist = (1.0 - proj).max(0.0);
            if dist > best.1 + 1e-12 {
                best = (i, dist);
            }
        }
        chosen.push(best.0);
        let mut e = nalgebra::DVector::<Complex64>::zeros(n);
        e[best.0] = Complex64::new(1.0, 0.0);
        push(e, &mut basis);
    }
    chosen.sort_unstable();
    let mut c = CMatrix::zeros(n, m);
    for (col, &i) in chosen.iter().enumerate() {
        c[(i, col)] = Complex64::new(1.0, 0.0);
    }
    (c, chosen)
}

/// `π`: the last `m` rows of `[embed | complement]^{-1}`.
fn quotient_projection(embed: &CMatrix, complement: &CMatrix) -> Result<CMatrix, TorsionError> {
    let n = embed.nrows();
    let k = embed.ncols();
    if complement.nrows() != n || complement.ncols() + k != n {
        return Err(TorsionError::BadComplement);
    }
    let mut full = CMatrix::zeros(n, n);
    full.view_mut((0, 0), (n, k)).copy_from(embed);
    full.view_mut((0, k), (n, n - k)).copy_from(complement);
    if numerical_rank(&full, EXACTNESS_TOL) < n {
        return Err(TorsionError::BadComplement);
    }
    let inv = full.try_inverse().ok_or(TorsionError::BadComplement)?;
    Ok(inv.rows(k, n - k).into_owned())
}

/// Torsion of `0 → F → E → E/F → 0`, with `E/F` identified with the span
/// of `complement`.
pub fn ses_torsion_with_complement(
    g_f: &MetricFamily,
    g_e: &MetricFamily,
    g_q: &MetricFamily,
    embed: &CMatrix,
    complement: &CMatrix,
    tol: f64,
) -> Result<TorsionResult, TorsionError> {
    if embed.nrows() != g_e.rank() || embed.ncols() != g_f.rank() {
        return Err(TorsionError::Shape(format!(
            "embedding is {}×{}, expected {}×{}",
            embed.nrows(),
            embed.ncols(),
            g_e.rank(),
            g_f.rank()
        )));
    }
    if numerical_rank(embed, EXACTNESS_TOL) < embed.ncols() {
        return Err(TorsionError::NotInjective);
    }
    let pi = quotient_projection(embed, complement)?;
    let cx = FlatComplexWithMetrics::new(
        vec![g_f.rank(), g_e.rank(), g_q.rank()],
        vec![embed.clone(), pi],
        vec![g_f.clone(), g_e.clone(), g_q.clone()],
    )?;
    torsion_form(&cx, tol)
}

/// [`ses_torsion_with_complement`] with the complement from
/// [`default_complement`]; the chosen coordinates are recorded in the
/// report's provenance.
pub fn ses_torsion(
    g_f: &MetricFamily,
    g_e: &MetricFamily,
    g_q: &MetricFamily,
    embed: &CMatrix,
    tol: f64,
) -> Result<TorsionResult, TorsionError> {
    if embed.nrows() < embed.ncols() || numerical_rank(embed, EXACTNESS_TOL) < embed.ncols() {
        return Err(TorsionError::NotInjective);
    }
    let (complement, chosen) = default_complement(embed);
    let mut result = ses_torsion_with_complement(g_f, g_e, g_q, embed, &complement, tol)?;
    result
        .report
        .provenance
        .push(format!("quotient identified with coordinates {chosen:?} of E"));
    Ok(result)
}

/// Largest componentwise difference `|d𝒯 - Σ(-1)^k f(E^k)|`.
pub fn anomaly_residual(cx: &FlatComplexWithMetrics, torsion: &DifferentialForm) -> Result<f64, TorsionError> {
    let f = crate::flat_bundle::graded_odd_char_form(&cx.graded_bundles())?;
    Ok((&torsion.exterior_d() - &f).sup_norm())
}

#[cfg(test)]
mod tests;

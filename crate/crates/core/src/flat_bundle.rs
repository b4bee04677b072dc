//! Flat bundles in a global flat frame (`∇ = d`) with Hermitian metric
//! families, the Kamber–Tondeur form and the odd characteristic forms.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::exterior::{spectral_partial, DifferentialForm, Monomial, TorusBase, MAX_DIM};
use crate::form_matrix::{FormMatrix, LocalFormMatrix, Parity};
use crate::linalg::{c64, max_abs, CMatrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BundleError {
    #[error("metric sample {index} is not Hermitian (deviation {deviation:e})")]
    NotHermitian { index: usize, deviation: f64 },
    #[error("metric sample {index} is not positive definite")]
    NotPositive { index: usize },
    #[error("expected {expected} samples of size {rank}x{rank}, got {got}")]
    BadSamples { expected: usize, got: usize, rank: usize },
    #[error("bundles live on different bases")]
    BaseMismatch,
    #[error("rank mismatch: {0} vs {1}")]
    RankMismatch(usize, usize),
}

/// Hermitian deviation allowed at construction, relative to the sample size.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// One Fourier term `matrix · e^{i mode·x}` of a metric family.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierTerm {
    pub mode: [i32; MAX_DIM],
    pub matrix: CMatrix,
}

/// A grid field of positive definite Hermitian matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricFamily {
    base: TorusBase,
    rank: usize,
    samples: Vec<CMatrix>,
}

impl MetricFamily {
    /// Validates every sample: Hermitian to [`HERMITIAN_TOL`] and a
    /// successful Cholesky factorization.
    pub fn new(base: TorusBase, rank: usize, samples: Vec<CMatrix>) -> Result<Self, BundleError> {
        if samples.len() != base.num_points() || samples.iter().any(|s| s.nrows() != rank || s.ncols() != rank) {
            return Err(BundleError::BadSamples {
                expected: base.num_points(),
                got: samples.len(),
                rank,
            });
        }
        for (index, s) in samples.iter().enumerate() {
            let deviation = max_abs(&(s - s.adjoint()));
            if deviation > HERMITIAN_TOL * max_abs(s).max(1.0) {
                return Err(BundleError::NotHermitian { index, deviation });
            }
            if crate::linalg::cholesky(s).is_none() {
                return Err(BundleError::NotPositive { index });
            }
        }
        Ok(Self { base, rank, samples })
    }

    /// A flat (constant) metric.
    pub fn constant(base: TorusBase, matrix: CMatrix) -> Result<Self, BundleError> {
        let rank = matrix.nrows();
        Self::new(base, rank, vec![matrix; base.num_points()])
    }

    /// The standard metric `Id`.
    pub fn identity(base: TorusBase, rank: usize) -> Self {
        Self::constant(base, CMatrix::identity(rank, rank)).expect("identity is a metric")
    }

    pub fn from_fn(base: TorusBase, rank: usize, f: impl Fn([f64; MAX_DIM]) -> CMatrix) -> Result<Self, BundleError> {
        Self::new(base, rank, (0..base.num_points()).map(|i| f(base.coords(i))).collect())
    }

    /// Hermitian part of `Σ_terms matrix · e^{i mode·x}`, sampled on the grid.
    pub fn from_fourier(base: TorusBase, rank: usize, terms: &[FourierTerm]) -> Result<Self, BundleError> {
        Self::from_fn(base, rank, |x| {
            let mut h = CMatrix::zeros(rank, rank);
            for term in terms {
                let phase: f64 = (0..base.dim()).map(|a| term.mode[a] as f64 * x[a]).sum();
                h += &term.matrix * Complex64::from_polar(1.0, phase);
            }
            crate::linalg::hermitian_part(&h)
        })
    }

    pub fn base(&self) -> TorusBase {
        self.base
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn samples(&self) -> &[CMatrix] {
        &self.samples
    }

    /// True when every sample equals the first one.
    pub fn is_constant(&self) -> bool {
        self.samples.iter().all(|s| s == &self.samples[0])
    }

    /// Pull back along a constant injection `basis: C^m → C^rank`: `B† g B`.
    pub fn restrict(&self, basis: &CMatrix) -> Result<Self, BundleError> {
        if basis.nrows() != self.rank {
            return Err(BundleError::RankMismatch(basis.nrows(), self.rank));
        }
        let samples = self.samples.iter().map(|g| basis.adjoint() * g * basis).collect();
        Self::new(self.base, basis.ncols(), samples)
    }

    /// Multiply by a positive scalar.
    pub fn scaled(&self, lambda: f64) -> Self {
        Self {
            samples: self.samples.iter().map(|g| g * c64(lambda)).collect(),
            ..self.clone()
        }
    }

    /// Entrywise spectral `∂g/∂x_axis`.
    pub fn spectral_derivative(&self, axis: usize) -> Vec<CMatrix> {
        let r = self.rank;
        let mut out = vec![CMatrix::zeros(r, r); self.samples.len()];
        for i in 0..r {
            for j in 0..r {
                let values: Vec<Complex64> = self.samples.iter().map(|g| g[(i, j)]).collect();
                let d = spectral_partial(self.base, &values, axis);
                for (o, v) in out.iter_mut().zip(d) {
                    o[(i, j)] = v;
                }
            }
        }
        out
    }

    /// `g^{-1} ∂_a g` at every grid point, one entry per axis.
    pub fn connection_components(&self) -> Vec<Vec<CMatrix>> {
        if self.rank == 0 {
            return vec![vec![CMatrix::zeros(0, 0); self.base.dim()]; self.samples.len()];
        }
        let derivs: Vec<Vec<CMatrix>> = (0..self.base.dim()).map(|a| self.spectral_derivative(a)).collect();
        (0..self.samples.len())
            .into_par_iter()
            .map(|p| {
                let lu = self.samples[p].clone().lu();
                derivs
                    .iter()
                    .map(|d| lu.solve(&d[p]).expect("metric samples are invertible"))
                    .collect()
            })
            .collect()
    }

    /// `ln det g` sampled on the grid.
    pub fn log_det(&self) -> DifferentialForm {
        let values = self
            .samples
            .iter()
            .map(|g| Complex64::new(g.determinant().re.ln(), 0.0))
            .collect();
        DifferentialForm::from_component(self.base, Monomial::ONE, values).expect("grid sized")
    }
}

/// A flat bundle `(F, ∇ = d)` in a global frame with metric `g^F`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatBundleData {
    pub metric: MetricFamily,
}

impl FlatBundleData {
    pub fn new(metric: MetricFamily) -> Self {
        Self { metric }
    }

    pub fn base(&self) -> TorusBase {
        self.metric.base()
    }

    pub fn rank(&self) -> usize {
        self.metric.rank()
    }
}

/// Kamber–Tondeur form `ω = g^{-1} dg` as a matrix of one-forms.
pub fn kamber_tondeur(bundle: &FlatBundleData) -> FormMatrix {
    let base = bundle.base();
    let rank = bundle.rank();
    let points = bundle
        .metric
        .connection_components()
        .into_iter()
        .map(|per_axis| {
            let mut p = LocalFormMatrix::zeros(base.dim(), rank);
            for (a, m) in per_axis.into_iter().enumerate() {
                p.comps[Monomial::dx(a).index()] = m;
            }
            p
        })
        .collect();
    FormMatrix::new(base, vec![rank], Parity::Odd, points).expect("one-forms with even values")
}

/// `(2πi)^{-k/2}` on degree `k`, principal branch `i^{1/2} = e^{iπ/4}`.
pub fn phi_factor(k: usize) -> Complex64 {
    Complex64::from_polar((2.0 * PI).powf(-(k as f64) / 2.0), -PI * k as f64 / 4.0)
}

/// `φ`: scale the degree-`k` piece by `(2πi)^{-k/2}`.
pub fn phi_normalize(form: &DifferentialForm) -> DifferentialForm {
    form.map_degrees(phi_factor)
}

/// Largest imaginary part tolerated in a form that is real in exact arithmetic.
pub const REALITY_TOL: f64 = 1e-10;

/// `f(∇, g) = (2πi)^{1/2} φ tr[f(ω/2)]` with `f(z) = z e^{z²}`.
///
/// `ω` has degree one, so the series stops once the form degree exceeds the
/// base dimension.
pub fn odd_char_form(bundle: &FlatBundleData) -> DifferentialForm {
    let base = bundle.base();
    let omega = kamber_tondeur(bundle);
    let half = omega.scale(c64(0.5));
    let signs = vec![1.0; bundle.rank()];
    let mut form = DifferentialForm::zero(base);
    for (idx, y) in half.points().iter().enumerate() {
        // f(Y) = Σ_m Y^{2m+1} / m!
        let y2 = y.mul(y, &signs);
        let mut power = y.clone();
        let mut total = LocalFormMatrix::zeros(base.dim(), bundle.rank());
        let mut m = 0usize;
        let mut fact = 1.0;
        while 2 * m < base.dim() + 1 {
            total = total.add(&power.scale(c64(1.0 / fact)));
            m += 1;
            fact *= m as f64;
            power = power.mul(&y2, &signs);
        }
        for (i, v) in total.weighted_trace(&signs).into_iter().enumerate() {
            form.component_mut(Monomial(i as u8))[idx] = v;
        }
    }
    let sqrt_2pi_i = Complex64::from_polar((2.0 * PI).sqrt(), PI / 4.0);
    let form = phi_normalize(&form).scale(sqrt_2pi_i);
    let bound = REALITY_TOL * form.sup_norm().max(1.0);
    assert!(
        form.max_imag() <= bound,
        "odd characteristic form has imaginary part {:e}",
        form.max_imag()
    );
    form.real_part()
}

/// `Σ_k (-1)^k f(∇^{E^k}, g^{E^k})`.
pub fn graded_odd_char_form(bundles: &[(usize, FlatBundleData)]) -> Result<DifferentialForm, BundleError> {
    let Some((_, first)) = bundles.first() else {
        return Ok(DifferentialForm::zero(TorusBase::point()));
    };
    let base = first.base();
    let mut total = DifferentialForm::zero(base);
    for (k, bundle) in bundles {
        if bundle.base() != base {
            return Err(BundleError::BaseMismatch);
        }
        let f = odd_char_form(bundle);
        total = if k % 2 == 0 { &total + &f } else { &total - &f };
    }
    Ok(total)
}

use num_complex::Complex64;
use rayon::prelude::*;

use super::TorsionError;
use crate::exterior::{DifferentialForm, Monomial, TorusBase};
use crate::flat_bundle::{phi_normalize, FlatBundleData, MetricFamily};
use crate::form_matrix::{fprime_of, FormMatrix, LocalFormMatrix, Parity};
use crate::linalg::{c64, max_abs, numerical_rank, CMatrix};

/// Singular-value threshold used for the rank conditions.
pub const EXACTNESS_TOL: f64 = 1e-10;

/// `0 → E^0 → E^1 → ⋯ → E^n → 0` of trivialized flat bundles over a torus,
/// with constant boundary maps and a Hermitian metric on each term.
///
/// `boundaries[k]` maps `E^k → E^{k+1}` and has shape `ranks[k+1] × ranks[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatComplexWithMetrics {
    base: TorusBase,
    ranks: Vec<usize>,
    boundaries: Vec<CMatrix>,
    metrics: Vec<MetricFamily>,
}

impl FlatComplexWithMetrics {
    pub fn new(ranks: Vec<usize>, boundaries: Vec<CMatrix>, metrics: Vec<MetricFamily>) -> Result<Self, TorsionError> {
        let Some(first) = metrics.first() else {
            return Err(TorsionError::Shape("a complex needs at least one term".into()));
        };
        let base = first.base();
        if metrics.len() != ranks.len() {
            return Err(TorsionError::Shape(format!(
                "{} ranks but {} metrics",
                ranks.len(),
                metrics.len()
            )));
        }
        if boundaries.len() + 1 != ranks.len() {
            return Err(TorsionError::Shape(format!(
                "{} terms need {} boundary maps, got {}",
                ranks.len(),
                ranks.len() - 1,
                boundaries.len()
            )));
        }
        for (k, (m, &r)) in metrics.iter().zip(&ranks).enumerate() {
            if m.base() != base {
                return Err(TorsionError::Shape(format!(
                    "metric in degree {k} lives on another base"
                )));
            }
            if m.rank() != r {
                return Err(TorsionError::Shape(format!(
                    "metric in degree {k} has rank {} but E^{k} has rank {r}",
                    m.rank()
                )));
            }
        }
        for (k, d) in boundaries.iter().enumerate() {
            if d.nrows() != ranks[k + 1] || d.ncols() != ranks[k] {
                return Err(TorsionError::Shape(format!(
                    "boundary {k} is {}×{}, expected {}×{}",
                    d.nrows(),
                    d.ncols(),
                    ranks[k + 1],
                    ranks[k]
                )));
            }
        }
        for k in 0..boundaries.len().saturating_sub(1) {
            let (a, b) = (&boundaries[k], &boundaries[k + 1]);
            if a.ncols() == 0 || b.nrows() == 0 {
                continue;
            }
            let residual = max_abs(&(b * a));
            let scale = max_abs(a).max(1.0) * max_abs(b).max(1.0);
            if residual > EXACTNESS_TOL * scale {
                return Err(TorsionError::NotAComplex { degree: k, residual });
            }
        }
        for k in 0..ranks.len() {
            let incoming = if k > 0 {
                numerical_rank(&boundaries[k - 1], EXACTNESS_TOL)
            } else {
                0
            };
            let outgoing = if k < boundaries.len() {
                numerical_rank(&boundaries[k], EXACTNESS_TOL)
            } else {
                0
            };
            if incoming + outgoing != ranks[k] {
                return Err(TorsionError::NotExact {
                    degree: k,
                    cohomology: ranks[k] as i64 - (incoming + outgoing) as i64,
                });
            }
        }
        Ok(Self {
            base,
            ranks,
            boundaries,
            metrics,
        })
    }

    pub fn base(&self) -> TorusBase {
        self.base
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn boundaries(&self) -> &[CMatrix] {
        &self.boundaries
    }

    pub fn metrics(&self) -> &[MetricFamily] {
        &self.metrics
    }

    pub fn size(&self) -> usize {
        self.ranks.iter().sum()
    }

    /// `χ'(E) = Σ_k (-1)^k k r_k`.
    pub fn chi_prime(&self) -> f64 {
        self.ranks
            .iter()
            .enumerate()
            .map(|(k, &r)| if k % 2 == 0 { (k * r) as f64 } else { -((k * r) as f64) })
            .sum()
    }

    pub fn offsets(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.ranks.len() + 1);
        let mut acc = 0;
        out.push(0);
        for &r in &self.ranks {
            acc += r;
            out.push(acc);
        }
        out
    }

    /// `(-1)^{deg}` and `deg` along the diagonal.
    pub fn grading(&self) -> (Vec<f64>, Vec<f64>) {
        let mut signs = Vec::new();
        let mut number = Vec::new();
        for (k, &r) in self.ranks.iter().enumerate() {
            for _ in 0..r {
                signs.push(if k % 2 == 0 { 1.0 } else { -1.0 });
                number.push(k as f64);
            }
        }
        (signs, number)
    }

    /// Direct sum, degree by degree; shorter complexes are padded with zero
    /// terms.
    pub fn direct_sum(&self, other: &Self) -> Result<Self, TorsionError> {
        if self.base != other.base {
            return Err(TorsionError::Shape("direct sum of complexes on different bases".into()));
        }
        let len = self.ranks.len().max(other.ranks.len());
        let rank = |c: &Self, k: usize| c.ranks.get(k).copied().unwrap_or(0);
        let ranks: Vec<usize> = (0..len).map(|k| rank(self, k) + rank(other, k)).collect();
        let metrics = (0..len)
            .map(|k| {
                let (ra, rb) = (rank(self, k), rank(other, k));
                let samples = (0..self.base.num_points())
                    .map(|p| {
                        let mut m = CMatrix::zeros(ra + rb, ra + rb);
                        if ra > 0 {
                            m.view_mut((0, 0), (ra, ra)).copy_from(&self.metrics[k].samples()[p]);
                        }
                        if rb > 0 {
                            m.view_mut((ra, ra), (rb, rb)).copy_from(&other.metrics[k].samples()[p]);
                        }
                        m
                    })
                    .collect();
                MetricFamily::new(self.base, ra + rb, samples)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let boundaries = (0..len - 1)
            .map(|k| {
                let mut d = CMatrix::zeros(ranks[k + 1], ranks[k]);
                if let Some(a) = self.boundaries.get(k) {
                    d.view_mut((0, 0), (a.nrows(), a.ncols())).copy_from(a);
                }
                if let Some(b) = other.boundaries.get(k) {
                    let (r0, c0) = (rank(self, k + 1), rank(self, k));
                    d.view_mut((r0, c0), (b.nrows(), b.ncols())).copy_from(b);
                }
                d
            })
            .collect();
        Self::new(ranks, boundaries, metrics)
    }

    /// The total boundary `∂` on `⊕E^k`.
    pub fn total_boundary(&self) -> CMatrix {
        let off = self.offsets();
        let n = self.size();
        let mut d = CMatrix::zeros(n, n);
        for (k, b) in self.boundaries.iter().enumerate() {
            d.view_mut((off[k + 1], off[k]), (b.nrows(), b.ncols())).copy_from(b);
        }
        d
    }

    /// Block-diagonal metric at grid point `p`.
    pub fn metric_at(&self, p: usize) -> CMatrix {
        let off = self.offsets();
        let n = self.size();
        let mut g = CMatrix::zeros(n, n);
        for (k, m) in self.metrics.iter().enumerate() {
            let r = self.ranks[k];
            if r > 0 {
                g.view_mut((off[k], off[k]), (r, r)).copy_from(&m.samples()[p]);
            }
        }
        g
    }

    /// Metric adjoint `∂* = g^{-1} ∂† g` on `⊕E^k` at every grid point.
    pub fn adjoint_boundary(&self) -> Vec<CMatrix> {
        let d = self.total_boundary();
        (0..self.base.num_points())
            .into_par_iter()
            .map(|p| {
                let g = self.metric_at(p);
                let rhs = d.adjoint() * &g;
                if g.nrows() == 0 {
                    return rhs;
                }
                g.lu().solve(&rhs).expect("metric is positive definite")
            })
            .collect()
    }

    /// `ω = g^{-1} dg` on `⊕E^k`: per grid point, one matrix per axis.
    pub fn connection_components(&self) -> Vec<Vec<CMatrix>> {
        let off = self.offsets();
        let n = self.size();
        let dim = self.base.dim();
        let per_degree: Vec<Vec<Vec<CMatrix>>> = self.metrics.iter().map(|m| m.connection_components()).collect();
        (0..self.base.num_points())
            .map(|p| {
                (0..dim)
                    .map(|a| {
                        let mut w = CMatrix::zeros(n, n);
                        for (k, comps) in per_degree.iter().enumerate() {
                            let r = self.ranks[k];
                            if r > 0 {
                                w.view_mut((off[k], off[k]), (r, r)).copy_from(&comps[p][a]);
                            }
                        }
                        w
                    })
                    .collect()
            })
            .collect()
    }

    /// The bundles `E^k` with their metrics, tagged by degree.
    pub fn graded_bundles(&self) -> Vec<(usize, FlatBundleData)> {
        self.metrics
            .iter()
            .enumerate()
            .map(|(k, m)| (k, FlatBundleData::new(m.clone())))
            .collect()
    }
}

/// `X_t = ½(t ∂* - ∂) + ½ ω`.
pub fn superconnection_xt(cx: &FlatComplexWithMetrics, t: f64) -> Result<FormMatrix, TorsionError> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(TorsionError::BadT(t));
    }
    let base = cx.base();
    let n = cx.size();
    let d = cx.total_boundary();
    let adj = cx.adjoint_boundary();
    let omega = cx.connection_components();
    let points = adj
        .iter()
        .zip(omega)
        .map(|(ds, w)| {
            let mut x = LocalFormMatrix::zeros(base.dim(), n);
            x.comps[0] = (ds * c64(t) - &d) * c64(0.5);
            for (a, wa) in w.into_iter().enumerate() {
                x.comps[Monomial::dx(a).index()] = wa * c64(0.5);
            }
            x
        })
        .collect();
    Ok(FormMatrix::new(base, cx.ranks().to_vec(), Parity::Odd, points)?)
}

/// `f'(i√t/2) = (1 - t/2) e^{-t/4}`.
pub fn counterterm(t: f64) -> f64 {
    (1.0 - 0.5 * t) * (-0.25 * t).exp()
}

/// The integrand through the generic route: build `X_t`, form `f'(X_t)`
/// with the Duhamel expansion, and take the weighted supertrace.
pub fn torsion_integrand_reference(cx: &FlatComplexWithMetrics, t: f64) -> Result<DifferentialForm, TorsionError> {
    let x = superconnection_xt(cx, t)?;
    let fp = fprime_of(&x);
    let (signs, number) = cx.grading();
    let weights: Vec<f64> = signs.iter().zip(&number).map(|(s, n)| s * n * 0.5).collect();
    let mut form = phi_normalize(&fp.weighted_trace(&weights));
    let shift = Complex64::new(-0.5 * cx.chi_prime() * counterterm(t), 0.0);
    for v in form.component_mut(Monomial::ONE) {
        *v += shift;
    }
    Ok(form)
}

//! Matrices with differential-form entries over a graded vector space.
//!
//! At each grid point an element is `Σ_I dx^I ⊗ A_I` in the super tensor
//! product `Λ(R^d) ⊗̂ End(V)`, where `V = ⊕_k E^k` is graded by block degree
//! and an endomorphism block `E^q → E^p` has parity `p - q mod 2`. Products
//! carry the Koszul sign
//! `(dx^I ⊗ A)(dx^J ⊗ B) = (-1)^{|A||J|} dx^I ∧ dx^J ⊗ AB`,
//! implemented for inhomogeneous `A` as `P^{|J|} A P^{|J|}` with `P = (-1)^N`.

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::exterior::{DifferentialForm, Monomial, TorusBase};
use crate::linalg::{c64, expm, max_abs, CMatrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormMatrixError {
    #[error("form matrices have incompatible shapes or bases")]
    ShapeMismatch,
    #[error("entry ({row}, {col}) in component {monomial} violates the declared {parity:?} parity")]
    ParityViolation {
        row: usize,
        col: usize,
        monomial: String,
        parity: Parity,
    },
}

/// Total parity of an operator: endomorphism parity plus form degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    fn of(n: usize) -> Self {
        if n % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// `Σ_I dx^I ⊗ A_I` at a single point; `comps[I]` indexed by monomial bitmask.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalFormMatrix {
    pub comps: Vec<CMatrix>,
}

impl LocalFormMatrix {
    pub fn zeros(dim: usize, n: usize) -> Self {
        Self {
            comps: vec![CMatrix::zeros(n, n); 1 << dim],
        }
    }

    pub fn size(&self) -> usize {
        self.comps[0].nrows()
    }

    fn dim(&self) -> usize {
        self.comps.len().trailing_zeros() as usize
    }

    pub fn body(&self) -> &CMatrix {
        &self.comps[0]
    }

    /// Super product with grading signs `signs[p] = (-1)^{deg p}`.
    pub fn mul(&self, rhs: &Self, signs: &[f64]) -> Self {
        let n = self.size();
        let mut out = Self::zeros(self.dim(), n);
        for (i, a) in self.comps.iter().enumerate() {
            if a.iter().all(|z| z.norm_sqr() == 0.0) {
                continue;
            }
            for (j, b) in rhs.comps.iter().enumerate() {
                let (mi, mj) = (Monomial(i as u8), Monomial(j as u8));
                let Some((sign, ij)) = mi.wedge(mj) else { continue };
                let twisted = if mj.degree() % 2 == 1 {
                    twist(a, signs)
                } else {
                    a.clone()
                };
                out.comps[ij.index()] += twisted * b * c64(sign);
            }
        }
        out
    }

    pub fn add(&self, rhs: &Self) -> Self {
        Self {
            comps: self.comps.iter().zip(&rhs.comps).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            comps: self.comps.iter().map(|a| a * c).collect(),
        }
    }

    pub fn identity(dim: usize, n: usize) -> Self {
        let mut out = Self::zeros(dim, n);
        out.comps[0] = CMatrix::identity(n, n);
        out
    }

    /// `f'(X) = (1 + 2X²) e^{X²}` for an odd element `X`.
    ///
    /// The body of `X²` is exponentiated by scaling and squaring; the
    /// nilpotent remainder enters through the finite Duhamel expansion,
    /// whose iterated integrals are read off block-triangular exponentials.
    pub fn fprime(&self, signs: &[f64]) -> Self {
        let x2 = self.mul(self, signs);
        let e = exp_even(&x2, signs);
        let two_x2_e = x2.mul(&e, signs).scale(c64(2.0));
        e.add(&two_x2_e)
    }

    /// Left-regular representation on `Λ(R^d) ⊗ V`, ordered by monomial then
    /// by row of `V`.
    pub fn regular_representation(&self, signs: &[f64]) -> CMatrix {
        let n = self.size();
        let m = self.comps.len();
        let mut big = CMatrix::zeros(n * m, n * m);
        for (i, a) in self.comps.iter().enumerate() {
            for j in 0..m {
                let (mi, mj) = (Monomial(i as u8), Monomial(j as u8));
                let Some((sign, ij)) = mi.wedge(mj) else { continue };
                let twisted = if mj.degree() % 2 == 1 {
                    twist(a, signs)
                } else {
                    a.clone()
                };
                let mut block = big.view_mut((ij.index() * n, j * n), (n, n));
                block += twisted * c64(sign);
            }
        }
        big
    }

    /// `f'(X)` through one large numeric exponential of the regular
    /// representation of `X²`. Slower than [`LocalFormMatrix::fprime`];
    /// kept as an independent route.
    pub fn fprime_embedded(&self, signs: &[f64]) -> Self {
        let n = self.size();
        let x2 = self.mul(self, signs);
        let big = expm(&x2.regular_representation(signs));
        let mut e = Self::zeros(self.dim(), n);
        for (i, comp) in e.comps.iter_mut().enumerate() {
            *comp = big.view((i * n, 0), (n, n)).into_owned();
        }
        let two_x2_e = x2.mul(&e, signs).scale(c64(2.0));
        e.add(&two_x2_e)
    }

    /// `Σ_I dx^I tr(W A_I)` for a diagonal weight `W`.
    pub fn weighted_trace(&self, weights: &[f64]) -> Vec<Complex64> {
        self.comps
            .iter()
            .map(|a| (0..a.nrows()).map(|p| a[(p, p)] * weights[p]).sum())
            .collect()
    }
}

/// `P A P` with `P = diag(signs)`.
fn twist(a: &CMatrix, signs: &[f64]) -> CMatrix {
    CMatrix::from_fn(a.nrows(), a.ncols(), |p, q| a[(p, q)] * (signs[p] * signs[q]))
}

/// `exp(Y)` for an even element `Y` whose positive-degree part is nilpotent.
fn exp_even(y: &LocalFormMatrix, signs: &[f64]) -> LocalFormMatrix {
    let n = y.size();
    let dim = y.dim();
    let body = y.body();
    let mut out = LocalFormMatrix::zeros(dim, n);
    out.comps[0] = expm(body);
    let nonzero: Vec<Monomial> = (1..y.comps.len())
        .map(|i| Monomial(i as u8))
        .filter(|m| y.comps[m.index()].iter().any(|z| z.norm_sqr() != 0.0))
        .collect();
    // First order: ∫_0^1 e^{sA} N e^{(1-s)A} ds.
    for &mono in &nonzero {
        let mut blk = CMatrix::zeros(2 * n, 2 * n);
        blk.view_mut((0, 0), (n, n)).copy_from(body);
        blk.view_mut((n, n), (n, n)).copy_from(body);
        blk.view_mut((0, n), (n, n)).copy_from(&y.comps[mono.index()]);
        let e = expm(&blk);
        out.comps[mono.index()] += e.view((0, n), (n, n));
    }
    // Second order over the simplex; only disjoint monomials survive.
    for &mi in &nonzero {
        for &mj in &nonzero {
            let Some((sign, ij)) = mi.wedge(mj) else { continue };
            let left = if mj.degree() % 2 == 1 {
                twist(&y.comps[mi.index()], signs)
            } else {
                y.comps[mi.index()].clone()
            };
            let mut blk = CMatrix::zeros(3 * n, 3 * n);
            for k in 0..3 {
                blk.view_mut((k * n, k * n), (n, n)).copy_from(body);
            }
            blk.view_mut((0, n), (n, n)).copy_from(&left);
            blk.view_mut((n, 2 * n), (n, n)).copy_from(&y.comps[mj.index()]);
            let e = expm(&blk);
            out.comps[ij.index()] += e.view((0, 2 * n), (n, n)) * c64(sign);
        }
    }
    // Three disjoint degree-one factors would need dim >= 3.
    out
}

/// A grid field of [`LocalFormMatrix`] values over a graded space.
#[derive(Debug, Clone, PartialEq)]
pub struct FormMatrix {
    base: TorusBase,
    /// Ranks of the graded pieces `E^0, E^1, …`.
    blocks: Vec<usize>,
    parity: Parity,
    points: Vec<LocalFormMatrix>,
}

impl FormMatrix {
    pub fn new(
        base: TorusBase,
        blocks: Vec<usize>,
        parity: Parity,
        points: Vec<LocalFormMatrix>,
    ) -> Result<Self, FormMatrixError> {
        let n: usize = blocks.iter().sum();
        let ok = points.len() == base.num_points()
            && points
                .iter()
                .all(|p| p.comps.len() == base.num_monomials() && p.size() == n);
        if !ok {
            return Err(FormMatrixError::ShapeMismatch);
        }
        let out = Self {
            base,
            blocks,
            parity,
            points,
        };
        out.check_parity(0.0)?;
        Ok(out)
    }

    pub fn base(&self) -> TorusBase {
        self.base
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn points(&self) -> &[LocalFormMatrix] {
        &self.points
    }

    pub fn size(&self) -> usize {
        self.blocks.iter().sum()
    }

    /// Block degree of each row of the graded space.
    pub fn row_degrees(&self) -> Vec<usize> {
        self.blocks
            .iter()
            .enumerate()
            .flat_map(|(k, &r)| std::iter::repeat_n(k, r))
            .collect()
    }

    pub fn grading_signs(&self) -> Vec<f64> {
        self.row_degrees()
            .iter()
            .map(|k| if k % 2 == 0 { 1.0 } else { -1.0 })
            .collect()
    }

    /// The `(row, col)` entry as a differential form.
    pub fn entry(&self, row: usize, col: usize) -> DifferentialForm {
        let mut form = DifferentialForm::zero(self.base);
        for mono in self.base.monomials() {
            let values = form.component_mut(mono);
            for (v, p) in values.iter_mut().zip(&self.points) {
                *v = p.comps[mono.index()][(row, col)];
            }
        }
        form
    }

    /// Every entry with magnitude above `tol` must have total parity equal
    /// to the declared one.
    pub fn check_parity(&self, tol: f64) -> Result<(), FormMatrixError> {
        let deg = self.row_degrees();
        for p in &self.points {
            for (i, comp) in p.comps.iter().enumerate() {
                let mono = Monomial(i as u8);
                for r in 0..comp.nrows() {
                    for c in 0..comp.ncols() {
                        let total = deg[r] + deg[c] + mono.degree();
                        if comp[(r, c)].norm() > tol && Parity::of(total) != self.parity {
                            return Err(FormMatrixError::ParityViolation {
                                row: r,
                                col: c,
                                monomial: mono.name(),
                                parity: self.parity,
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn compatible(&self, other: &Self) -> Result<(), FormMatrixError> {
        if self.base != other.base || self.blocks != other.blocks {
            return Err(FormMatrixError::ShapeMismatch);
        }
        Ok(())
    }

    /// Pointwise super product.
    pub fn mul(&self, other: &Self) -> Result<Self, FormMatrixError> {
        self.compatible(other)?;
        let signs = self.grading_signs();
        let points = self
            .points
            .par_iter()
            .zip(&other.points)
            .map(|(a, b)| a.mul(b, &signs))
            .collect();
        let parity = if self.parity == other.parity {
            Parity::Even
        } else {
            Parity::Odd
        };
        Ok(Self {
            base: self.base,
            blocks: self.blocks.clone(),
            parity,
            points,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self, FormMatrixError> {
        self.compatible(other)?;
        if self.parity != other.parity {
            return Err(FormMatrixError::ShapeMismatch);
        }
        Ok(Self {
            points: self.points.iter().zip(&other.points).map(|(a, b)| a.add(b)).collect(),
            ..self.clone()
        })
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            points: self.points.iter().map(|p| p.scale(c)).collect(),
            ..self.clone()
        }
    }

    /// `Σ_I dx^I tr(W A_I)` as a differential form.
    pub fn weighted_trace(&self, weights: &[f64]) -> DifferentialForm {
        let mut form = DifferentialForm::zero(self.base);
        for (idx, p) in self.points.iter().enumerate() {
            for (i, v) in p.weighted_trace(weights).into_iter().enumerate() {
                form.component_mut(Monomial(i as u8))[idx] = v;
            }
        }
        form
    }

    /// Plain trace.
    pub fn trace(&self) -> DifferentialForm {
        self.weighted_trace(&vec![1.0; self.size()])
    }

    /// Largest entry modulus over the grid.
    pub fn sup_norm(&self) -> f64 {
        self.points
            .iter()
            .flat_map(|p| p.comps.iter())
            .fold(0.0, |acc, m| acc.max(max_abs(m)))
    }
}

/// `f'(X) = (1 + 2X²) e^{X²}` evaluated pointwise.
pub fn fprime_of(x: &FormMatrix) -> FormMatrix {
    assert_eq!(x.parity, Parity::Odd, "f'(X) is defined here for odd X");
    let signs = x.grading_signs();
    let points = x.points.par_iter().map(|p| p.fprime(&signs)).collect();
    FormMatrix {
        base: x.base,
        blocks: x.blocks.clone(),
        parity: Parity::Even,
        points,
    }
}

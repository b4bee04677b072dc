//! Differential forms on flat tori `T^d = (R / 2πZ)^d`, `d ∈ {0, 1, 2}`.
//!
//! A form is stored densely: one complex grid array per exterior monomial
//! (a subset of `{dx1, …, dx_d}` encoded as a bitmask). Derivatives are
//! spectral, so `d` is exact on trigonometric polynomials resolved by the
//! grid. Averages over the uniform grid give the harmonic projection, which
//! on a flat torus decides whether a closed form is exact.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest supported base dimension.
pub const MAX_DIM: usize = 2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExteriorError {
    #[error("unsupported torus dimension {0} (expected 0, 1 or 2)")]
    BadDimension(usize),
    #[error("grid size {0} must be even and at least 4")]
    BadGrid(usize),
    #[error("forms live on different bases: {0:?} vs {1:?}")]
    BaseMismatch(TorusBase, TorusBase),
    #[error("component {name} has {got} samples, expected {expected}")]
    BadComponentLength { name: String, got: usize, expected: usize },
    #[error("unknown monomial name {0:?}")]
    UnknownMonomial(String),
}

/// A flat torus of circumference 2π per axis, sampled on a uniform grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TorusBase {
    dim: usize,
    grid: usize,
}

impl TorusBase {
    pub fn new(dim: usize, grid: usize) -> Result<Self, ExteriorError> {
        if dim > MAX_DIM {
            return Err(ExteriorError::BadDimension(dim));
        }
        if dim >= 1 && (grid < 4 || grid % 2 != 0) {
            return Err(ExteriorError::BadGrid(grid));
        }
        Ok(Self {
            dim,
            grid: if dim == 0 { 1 } else { grid },
        })
    }

    /// The zero-dimensional base (a point).
    pub fn point() -> Self {
        Self { dim: 0, grid: 1 }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn grid(&self) -> usize {
        self.grid
    }

    /// Number of grid samples, `N^dim`.
    pub fn num_points(&self) -> usize {
        self.grid.pow(self.dim as u32)
    }

    pub fn num_monomials(&self) -> usize {
        1 << self.dim
    }

    pub fn monomials(&self) -> impl Iterator<Item = Monomial> {
        (0..self.num_monomials() as u8).map(Monomial)
    }

    /// Same torus with a different grid.
    pub fn with_grid(&self, grid: usize) -> Result<Self, ExteriorError> {
        Self::new(self.dim, grid)
    }

    /// Coordinates of a flat (row-major) grid index; axis 1 varies slowest.
    pub fn coords(&self, index: usize) -> [f64; MAX_DIM] {
        let h = 2.0 * PI / self.grid as f64;
        match self.dim {
            0 => [0.0, 0.0],
            1 => [index as f64 * h, 0.0],
            _ => [(index / self.grid) as f64 * h, (index % self.grid) as f64 * h],
        }
    }

    /// Stride of `axis` in the flattened grid.
    fn stride(&self, axis: usize) -> usize {
        self.grid.pow((self.dim - 1 - axis) as u32)
    }
}

/// An exterior monomial `dx_{i1} ∧ … ∧ dx_{ik}` with `i1 < … < ik`,
/// bit `a` standing for `dx_{a+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(pub u8);

impl Monomial {
    pub const ONE: Monomial = Monomial(0);

    pub fn dx(axis: usize) -> Self {
        Monomial(1 << axis)
    }

    pub fn degree(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, axis: usize) -> bool {
        self.0 & (1 << axis) != 0
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// `self ∧ other = sign · (self ∪ other)`; `None` when they overlap.
    pub fn wedge(self, other: Monomial) -> Option<(f64, Monomial)> {
        if self.0 & other.0 != 0 {
            return None;
        }
        // Count pairs (i in self, j in other) with i > j.
        let mut inversions = 0;
        for i in 0..8 {
            if self.contains(i) {
                inversions += (other.0 & ((1u8 << i) - 1)).count_ones();
            }
        }
        let sign = if inversions % 2 == 0 { 1.0 } else { -1.0 };
        Some((sign, Monomial(self.0 | other.0)))
    }

    /// Name used in the JSON format: `""`, `"dx1"`, `"dx2"`, `"dx1dx2"`.
    pub fn name(self) -> String {
        (0..8)
            .filter(|&a| self.contains(a))
            .map(|a| format!("dx{}", a + 1))
            .collect()
    }

    pub fn parse(name: &str, dim: usize) -> Result<Self, ExteriorError> {
        Self::all(dim)
            .find(|m| m.name() == name)
            .ok_or_else(|| ExteriorError::UnknownMonomial(name.to_string()))
    }

    pub fn all(dim: usize) -> impl Iterator<Item = Monomial> {
        (0..(1u8 << dim)).map(Monomial)
    }
}

/// A complex-valued differential form on a [`TorusBase`].
#[derive(Debug, Clone, PartialEq)]
pub struct DifferentialForm {
    base: TorusBase,
    components: Vec<Vec<Complex64>>,
}

impl DifferentialForm {
    pub fn zero(base: TorusBase) -> Self {
        let n = base.num_points();
        Self {
            base,
            components: vec![vec![Complex64::new(0.0, 0.0); n]; base.num_monomials()],
        }
    }

    /// Constant multiple of `mono`.
    pub fn constant(base: TorusBase, mono: Monomial, value: Complex64) -> Self {
        let mut form = Self::zero(base);
        form.components[mono.index()].fill(value);
        form
    }

    /// The constant function `c`.
    pub fn scalar(base: TorusBase, c: f64) -> Self {
        Self::constant(base, Monomial::ONE, Complex64::new(c, 0.0))
    }

    /// `f(x) · mono`, sampled on the grid.
    pub fn from_fn(base: TorusBase, mono: Monomial, f: impl Fn([f64; MAX_DIM]) -> Complex64) -> Self {
        let mut form = Self::zero(base);
        for (i, v) in form.components[mono.index()].iter_mut().enumerate() {
            *v = f(base.coords(i));
        }
        form
    }

    /// Real-valued convenience wrapper around [`DifferentialForm::from_fn`].
    pub fn from_real_fn(base: TorusBase, mono: Monomial, f: impl Fn([f64; MAX_DIM]) -> f64) -> Self {
        Self::from_fn(base, mono, |x| Complex64::new(f(x), 0.0))
    }

    pub fn from_component(base: TorusBase, mono: Monomial, values: Vec<Complex64>) -> Result<Self, ExteriorError> {
        if values.len() != base.num_points() {
            return Err(ExteriorError::BadComponentLength {
                name: mono.name(),
                got: values.len(),
                expected: base.num_points(),
            });
        }
        let mut form = Self::zero(base);
        form.components[mono.index()] = values;
        Ok(form)
    }

    pub fn base(&self) -> TorusBase {
        self.base
    }

    pub fn component(&self, mono: Monomial) -> &[Complex64] {
        &self.components[mono.index()]
    }

    pub fn component_mut(&mut self, mono: Monomial) -> &mut [Complex64] {
        &mut self.components[mono.index()]
    }

    /// Degrees whose components are not identically zero.
    pub fn degrees_present(&self) -> Vec<usize> {
        let mut degrees: Vec<usize> = self
            .base
            .monomials()
            .filter(|m| self.component(*m).iter().any(|z| *z != Complex64::new(0.0, 0.0)))
            .map(Monomial::degree)
            .collect();
        degrees.sort_unstable();
        degrees.dedup();
        degrees
    }

    fn check_base(&self, other: &Self) -> Result<(), ExteriorError> {
        if self.base != other.base {
            return Err(ExteriorError::BaseMismatch(self.base, other.base));
        }
        Ok(())
    }

    /// Exterior product, pointwise on the grid with Koszul signs.
    pub fn wedge(&self, other: &Self) -> Result<Self, ExteriorError> {
        self.check_base(other)?;
        let mut out = Self::zero(self.base);
        for a in self.base.monomials() {
            for b in self.base.monomials() {
                let Some((sign, ab)) = a.wedge(b) else { continue };
                let (x, y) = (self.component(a), other.component(b));
                for ((o, &u), &v) in out.components[ab.index()].iter_mut().zip(x).zip(y) {
                    *o += u * v * sign;
                }
            }
        }
        Ok(out)
    }

    /// Spectral exterior derivative.
    pub fn exterior_d(&self) -> Self {
        let mut out = Self::zero(self.base);
        for mono in self.base.monomials() {
            let values = self.component(mono);
            if values.iter().all(|z| z.norm_sqr() == 0.0) {
                continue;
            }
            for axis in 0..self.base.dim {
                let Some((sign, target)) = Monomial::dx(axis).wedge(mono) else {
                    continue;
                };
                let deriv = spectral_partial(self.base, values, axis);
                for (o, v) in out.components[target.index()].iter_mut().zip(deriv) {
                    *o += v * sign;
                }
            }
        }
        out
    }

    /// Constant-mode projection of every component.
    pub fn harmonic_part(&self) -> Self {
        let mut out = Self::zero(self.base);
        for mono in self.base.monomials() {
            let mean = self.mean(mono);
            out.components[mono.index()].fill(mean);
        }
        out
    }

    /// Grid average of one component.
    pub fn mean(&self, mono: Monomial) -> Complex64 {
        let values = self.component(mono);
        values.iter().sum::<Complex64>() / values.len() as f64
    }

    /// The piece of degree `k`.
    pub fn degree_part(&self, k: usize) -> Self {
        let mut out = Self::zero(self.base);
        for mono in self.base.monomials().filter(|m| m.degree() == k) {
            out.components[mono.index()].clone_from(&self.components[mono.index()]);
        }
        out
    }

    /// Sum of all pieces of positive degree.
    pub fn positive_degree_part(&self) -> Self {
        let mut out = self.clone();
        out.components[0].fill(Complex64::new(0.0, 0.0));
        out
    }

    pub fn degree_split(&self) -> GradedFormDecomposition {
        GradedFormDecomposition {
            pieces: (0..=self.base.dim).map(|k| self.degree_part(k)).collect(),
        }
    }

    /// Multiply the degree-`k` piece by `factor(k)`.
    pub fn map_degrees(&self, factor: impl Fn(usize) -> Complex64) -> Self {
        let mut out = self.clone();
        for mono in self.base.monomials() {
            let c = factor(mono.degree());
            out.components[mono.index()].iter_mut().for_each(|z| *z *= c);
        }
        out
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map_degrees(|_| c)
    }

    /// Largest modulus over all samples and components.
    pub fn sup_norm(&self) -> f64 {
        self.components.iter().flatten().fold(0.0, |acc, z| acc.max(z.norm()))
    }

    /// Largest `|Im|` over all samples and components.
    pub fn max_imag(&self) -> f64 {
        self.components.iter().flatten().fold(0.0, |acc, z| acc.max(z.im.abs()))
    }

    /// Drop imaginary parts.
    pub fn real_part(&self) -> Self {
        let mut out = self.clone();
        out.components
            .iter_mut()
            .flatten()
            .for_each(|z| *z = Complex64::new(z.re, 0.0));
        out
    }

    pub fn to_json(&self) -> FormJson {
        let components = self
            .base
            .monomials()
            .map(|m| {
                let values = self.component(m).iter().map(|z| [z.re, z.im]).collect();
                (m.name(), values)
            })
            .collect();
        FormJson {
            dim: self.base.dim,
            grid: self.base.grid,
            components,
        }
    }

    pub fn from_json(json: &FormJson) -> Result<Self, ExteriorError> {
        let base = TorusBase::new(json.dim, json.grid)?;
        let mut form = Self::zero(base);
        for (name, values) in &json.components {
            let mono = Monomial::parse(name, base.dim)?;
            let values: Vec<Complex64> = values.iter().map(|p| Complex64::new(p[0], p[1])).collect();
            form = &form + &Self::from_component(base, mono, values)?;
        }
        Ok(form)
    }
}

/// Serialized form: `{"dim", "grid", "components": {"": [[re, im], …], "dx1": …}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormJson {
    pub dim: usize,
    pub grid: usize,
    pub components: BTreeMap<String, Vec<[f64; 2]>>,
}

impl Serialize for DifferentialForm {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DifferentialForm {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let json = FormJson::deserialize(deserializer)?;
        Self::from_json(&json).map_err(serde::de::Error::custom)
    }
}

/// A form split into its homogeneous pieces, `pieces[k]` of degree `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradedFormDecomposition {
    pub pieces: Vec<DifferentialForm>,
}

impl GradedFormDecomposition {
    pub fn reassemble(&self) -> DifferentialForm {
        let base = self.pieces[0].base();
        self.pieces.iter().fold(DifferentialForm::zero(base), |acc, p| &acc + p)
    }
}

macro_rules! pointwise_op {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait for &DifferentialForm {
            type Output = DifferentialForm;

            /// Panics if the bases differ.
            fn $method(self, rhs: &DifferentialForm) -> DifferentialForm {
                assert_eq!(self.base, rhs.base, "forms live on different bases");
                let mut out = self.clone();
                for (a, b) in out.components.iter_mut().zip(&rhs.components) {
                    for (x, y) in a.iter_mut().zip(b) {
                        *x = *x $op *y;
                    }
                }
                out
            }
        }
    };
}

pointwise_op!(Add, add, +);
pointwise_op!(Sub, sub, -);

impl Neg for &DifferentialForm {
    type Output = DifferentialForm;
    fn neg(self) -> DifferentialForm {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Mul<f64> for &DifferentialForm {
    type Output = DifferentialForm;
    fn mul(self, rhs: f64) -> DifferentialForm {
        self.scale(Complex64::new(rhs, 0.0))
    }
}

/// Spectral partial derivative `∂/∂x_axis` of grid samples.
///
/// The Nyquist mode is dropped, so trigonometric polynomials of degree
/// below `N/2` are differentiated exactly.
pub fn spectral_partial(base: TorusBase, values: &[Complex64], axis: usize) -> Vec<Complex64> {
    let n = base.grid;
    let stride = base.stride(axis);
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);
    let mut out = vec![Complex64::new(0.0, 0.0); values.len()];
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    let lines = values.len() / n;
    for l in 0..lines {
        // Start index of line `l` along `axis`.
        let start = (l / stride) * stride * n + (l % stride);
        for (j, v) in line.iter_mut().enumerate() {
            *v = values[start + j * stride];
        }
        forward.process(&mut line);
        for (j, v) in line.iter_mut().enumerate() {
            let k = if j < n / 2 {
                j as f64
            } else if j == n / 2 {
                0.0
            } else {
                j as f64 - n as f64
            };
            *v *= Complex64::new(0.0, k / n as f64);
        }
        inverse.process(&mut line);
        for (j, v) in line.iter().enumerate() {
            out[start + j * stride] = *v;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn t2() -> TorusBase {
        TorusBase::new(2, 16).unwrap()
    }

    #[test]
    fn base_validation() {
        assert!(TorusBase::new(3, 8).is_err());
        assert!(TorusBase::new(1, 5).is_err());
        assert!(TorusBase::new(1, 2).is_err());
        assert_eq!(TorusBase::new(0, 0).unwrap().num_points(), 1);
        assert_eq!(t2().num_points(), 256);
    }

    #[test]
    fn monomial_signs() {
        let (dx1, dx2) = (Monomial::dx(0), Monomial::dx(1));
        assert_eq!(dx1.wedge(dx2), Some((1.0, Monomial(3))));
        assert_eq!(dx2.wedge(dx1), Some((-1.0, Monomial(3))));
        assert_eq!(dx1.wedge(dx1), None);
        assert_eq!(Monomial(3).name(), "dx1dx2");
        assert_eq!(Monomial::parse("dx2", 2).unwrap(), dx2);
    }

    #[test]
    fn wedge_with_one_is_identity() {
        let base = t2();
        let f = DifferentialForm::from_real_fn(base, Monomial::dx(1), |x| x[0].sin() + x[1].cos());
        let one = DifferentialForm::scalar(base, 1.0);
        assert_eq!(one.wedge(&f).unwrap(), f);
    }

    #[test]
    fn wedge_dx1_dx1_vanishes() {
        let dx1 = DifferentialForm::constant(t2(), Monomial::dx(0), c(1.0));
        assert_eq!(dx1.wedge(&dx1).unwrap().sup_norm(), 0.0);
    }

    #[test]
    fn wedge_sampled_product() {
        let base = t2();
        let a = DifferentialForm::from_real_fn(base, Monomial::dx(0), |x| x[0].sin());
        let b = DifferentialForm::from_real_fn(base, Monomial::dx(1), |x| x[0].cos());
        let w = a.wedge(&b).unwrap();
        let oracle = DifferentialForm::from_real_fn(base, Monomial(3), |x| x[0].sin() * x[0].cos());
        assert!((&w - &oracle).sup_norm() <= 1e-15);
    }

    #[test]
    fn wedge_base_mismatch() {
        let a = DifferentialForm::scalar(t2(), 1.0);
        let b = DifferentialForm::scalar(TorusBase::new(1, 8).unwrap(), 1.0);
        assert!(matches!(a.wedge(&b), Err(ExteriorError::BaseMismatch(..))));
    }

    #[test]
    fn d_of_constant_and_top_form() {
        let base = t2();
        assert_eq!(DifferentialForm::scalar(base, 3.0).exterior_d().sup_norm(), 0.0);
        let top = DifferentialForm::from_real_fn(base, Monomial(3), |x| x[0].sin());
        assert_eq!(top.exterior_d().sup_norm(), 0.0);
    }

    #[test]
    fn d_of_sine_matches_cosine() {
        let base = TorusBase::new(1, 32).unwrap();
        let f = DifferentialForm::from_real_fn(base, Monomial::ONE, |x| x[0].sin());
        let oracle = DifferentialForm::from_real_fn(base, Monomial::dx(0), |x| x[0].cos());
        assert!((&f.exterior_d() - &oracle).sup_norm() <= 1e-12);
    }

    #[test]
    fn d_on_second_axis_and_sign() {
        // d(g(x2) dx1) = g'(x2) dx2 ∧ dx1 = -g'(x2) dx1 ∧ dx2
        let base = t2();
        let f = DifferentialForm::from_real_fn(base, Monomial::dx(0), |x| (2.0 * x[1]).sin());
        let oracle = DifferentialForm::from_real_fn(base, Monomial(3), |x| -2.0 * (2.0 * x[1]).cos());
        assert!((&f.exterior_d() - &oracle).sup_norm() <= 1e-12);
    }

    #[test]
    fn harmonic_parts() {
        let base = t2();
        let s = DifferentialForm::from_real_fn(base, Monomial(3), |x| x[0].sin());
        assert!(s.harmonic_part().sup_norm() <= 1e-15);
        let k = DifferentialForm::constant(base, Monomial(3), c(2.5));
        assert_eq!(k.harmonic_part(), k);
        let g = DifferentialForm::from_real_fn(base, Monomial::dx(0), |x| (x[0] + x[1]).cos().exp());
        assert!(g.exterior_d().harmonic_part().sup_norm() <= 1e-12);
    }

    #[test]
    fn degree_split_direct() {
        let base = TorusBase::new(1, 8).unwrap();
        let f = DifferentialForm::from_real_fn(base, Monomial::ONE, |x| x[0].cos());
        let g = DifferentialForm::from_real_fn(base, Monomial::dx(0), |x| x[0].sin());
        let split = (&f + &g).degree_split();
        assert_eq!(split.pieces[0], f);
        assert_eq!(split.pieces[1], g);
        let zero = DifferentialForm::zero(base).degree_split();
        assert!(zero.pieces.iter().all(|p| p.sup_norm() == 0.0));
    }

    #[test]
    fn json_layout() {
        let base = TorusBase::new(1, 4).unwrap();
        let f = DifferentialForm::from_real_fn(base, Monomial::dx(0), |x| x[0]);
        let json = serde_json::to_value(&f).unwrap();
        assert_eq!(json["dim"], 1);
        assert_eq!(json["grid"], 4);
        assert_eq!(json["components"]["dx1"][1][0].as_f64().unwrap(), PI / 2.0);
        let back: DifferentialForm = serde_json::from_value(json).unwrap();
        assert_eq!(back, f);
    }
}

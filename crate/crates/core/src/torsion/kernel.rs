//! Spectral evaluation of the torsion integrand.
//!
//! At a grid point let `D = ∂∂* + ∂*∂`, which preserves degree and is
//! self-adjoint for `g`. With `g_k = L L†` on `E^k`, `L† D L^{-†}` is
//! Hermitian with eigenvectors `U`, so `S = L^{-†} U` diagonalizes `D` and
//! commutes with the grading. In that basis `X_t² = A + Σ dx^a N_a +
//! dx^1dx^2 N_12` has diagonal body `A = -(t/4) Λ`, and the Duhamel terms of
//! `e^{X_t²}` reduce to divided differences of `exp` at the eigenvalues.
//! Only diagonal entries enter the supertrace, which makes the cost
//! quadratic in the total rank per point and per `t`.

use num_complex::Complex64;
use rayon::prelude::*;

use super::complex::{counterterm, FlatComplexWithMetrics};
use crate::linalg::{cholesky, exp_dd1, exp_dd2_confluent, hermitian_part, CMatrix};

struct PointData {
    lambda: Vec<f64>,
    /// `N_a = t U_a + V_a` in the eigenbasis.
    u: Vec<CMatrix>,
    v: Vec<CMatrix>,
    /// Diagonal of `N_12` in the eigenbasis.
    n12: Vec<Complex64>,
}

pub(crate) struct IntegrandKernel {
    dim: usize,
    weights: Vec<f64>,
    chi_prime: f64,
    points: Vec<PointData>,
}

/// Integrand values at one point: the scalar part, and the `dx¹dx²` part
/// before the `φ` factor.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PointValue {
    pub body: f64,
    pub top: Complex64,
}

impl IntegrandKernel {
    pub fn new(cx: &FlatComplexWithMetrics) -> Self {
        let dim = cx.base().dim();
        let (signs, number) = cx.grading();
        let weights = signs.iter().zip(&number).map(|(s, n)| 0.5 * s * n).collect();
        let d = cx.total_boundary();
        let adj = cx.adjoint_boundary();
        let omega = cx.connection_components();
        let off = cx.offsets();
        let ranks = cx.ranks().to_vec();
        let points = adj
            .into_par_iter()
            .zip(omega)
            .enumerate()
            .map(|(p, (ds, w))| {
                let n = d.nrows();
                let lap = &d * &ds + &ds * &d;
                let g = cx.metric_at(p);
                let mut s = CMatrix::zeros(n, n);
                let mut s_inv = CMatrix::zeros(n, n);
                let mut lambda = vec![0.0; n];
                for (k, &r) in ranks.iter().enumerate() {
                    if r == 0 {
                        continue;
                    }
                    let o = off[k];
                    let gk = g.view((o, o), (r, r)).into_owned();
                    let dk = lap.view((o, o), (r, r)).into_owned();
                    let l = cholesky(&gk).expect("metric is positive definite");
                    let l_adj = l.adjoint();
                    let l_adj_inv = l_adj
                        .clone()
                        .solve_upper_triangular(&CMatrix::identity(r, r))
                        .expect("Cholesky factor is invertible");
                    let h = hermitian_part(&(&l_adj * dk * &l_adj_inv));
                    let eig = h.symmetric_eigen();
                    let sk = &l_adj_inv * &eig.eigenvectors;
                    let sk_inv = eig.eigenvectors.adjoint() * &l_adj;
                    s.view_mut((o, o), (r, r)).copy_from(&sk);
                    s_inv.view_mut((o, o), (r, r)).copy_from(&sk_inv);
                    lambda[o..o + r].copy_from_slice(eig.eigenvalues.as_slice());
                }
                let half = Complex64::new(0.5, 0.0);
                let wh: Vec<CMatrix> = w.iter().map(|m| m * half).collect();
                let to_eig = |m: CMatrix| &s_inv * m * &s;
                let u = wh.iter().map(|wa| to_eig((wa * &ds - &ds * wa) * half)).collect();
                let v = wh.iter().map(|wa| to_eig((&d * wa - wa * &d) * half)).collect();
                let n12 = if wh.len() == 2 {
                    to_eig(&wh[0] * &wh[1] - &wh[1] * &wh[0])
                        .diagonal()
                        .iter()
                        .copied()
                        .collect()
                } else {
                    vec![Complex64::new(0.0, 0.0); n]
                };
                PointData { lambda, u, v, n12 }
            })
            .collect();
        Self {
            dim,
            weights,
            chi_prime: cx.chi_prime(),
            points,
        }
    }

    /// Smallest eigenvalue of `∂∂* + ∂*∂` over the grid.
    pub fn spectral_gap(&self) -> f64 {
        self.points
            .iter()
            .flat_map(|p| p.lambda.iter().copied())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn eval(&self, t: f64) -> Vec<PointValue> {
        let shift = -0.5 * self.chi_prime * counterterm(t);
        self.points
            .par_iter()
            .map(|p| {
                let a: Vec<f64> = p.lambda.iter().map(|l| -0.25 * t * l).collect();
                let e: Vec<f64> = a.iter().map(|x| x.exp()).collect();
                let body: f64 = (0..a.len())
                    .map(|i| self.weights[i] * (1.0 + 2.0 * a[i]) * e[i])
                    .sum::<f64>()
                    + shift;
                let top = if self.dim == 2 {
                    self.top(p, t, &a, &e)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                PointValue { body, top }
            })
            .collect()
    }

    fn top(&self, p: &PointData, t: f64, a: &[f64], e: &[f64]) -> Complex64 {
        let tc = Complex64::new(t, 0.0);
        let n1 = &p.u[0] * tc + &p.v[0];
        let n2 = &p.u[1] * tc + &p.v[1];
        let n = a.len();
        let mut total = Complex64::new(0.0, 0.0);
        for i in 0..n {
            if self.weights[i] == 0.0 {
                continue;
            }
            let mut second = Complex64::new(0.0, 0.0);
            let mut first = Complex64::new(0.0, 0.0);
            for k in 0..n {
                let c = n1[(i, k)] * n2[(k, i)] - n2[(i, k)] * n1[(k, i)];
                if c == Complex64::new(0.0, 0.0) {
                    continue;
                }
                second += c * exp_dd2_confluent(a[i], a[k]);
                first += c * exp_dd1(a[i], a[k]);
            }
            let diag = p.n12[i] * e[i];
            let f12 = (diag - second) * (1.0 + 2.0 * a[i]) + diag * 2.0 - first * 2.0;
            total += f12 * self.weights[i];
        }
        total
    }
}

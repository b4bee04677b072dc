//! Small dense complex linear algebra used across the crate.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

pub fn c64(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Max-abs entry norm.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

fn one_norm(m: &CMatrix) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Matrix exponential by scaling and squaring with a degree-13 Padé
/// approximant (Higham 2005).
pub fn expm(a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm needs a square matrix");
    if n == 0 {
        return CMatrix::zeros(0, 0);
    }
    const THETA13: f64 = 5.371920351148152;
    let norm = one_norm(a);
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = a * c64(0.5f64.powi(s));
    let id = CMatrix::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = &PADE13;
    let u_inner = &a6 * (&a6 * c64(b[13]) + &a4 * c64(b[11]) + &a2 * c64(b[9]))
        + &a6 * c64(b[7])
        + &a4 * c64(b[5])
        + &a2 * c64(b[3])
        + &id * c64(b[1]);
    let u = &a * u_inner;
    let v = &a6 * (&a6 * c64(b[12]) + &a4 * c64(b[10]) + &a2 * c64(b[8]))
        + &a6 * c64(b[6])
        + &a4 * c64(b[4])
        + &a2 * c64(b[2])
        + &id * c64(b[0]);
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.lu().solve(&p).expect("Padé denominator is nonsingular after scaling");
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

/// Lower Cholesky factor `L` with `m = L L†`, or `None` when the Hermitian
/// matrix `m` is not positive definite.
pub fn cholesky(m: &CMatrix) -> Option<CMatrix> {
    let n = m.nrows();
    let mut l = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if d.is_nan() || d <= 0.0 {
            return None;
        }
        let d = d.sqrt();
        l[(j, j)] = c64(d);
        for i in j + 1..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / d;
        }
    }
    Some(l)
}

/// Hermitian part `(m + m†)/2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c64(0.5)
}

/// Numerical rank from singular values above `tol · max(1, σ_max)`.
pub fn numerical_rank(m: &CMatrix, tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().singular_values();
    let scale = sv.iter().cloned().fold(1.0, f64::max);
    sv.iter().filter(|&&s| s > tol * scale).count()
}

/// Divided differences of `exp` at up to three real nodes.
///
/// `exp[a] = e^a`, `exp[a, b] = (e^a - e^b)/(a - b)`, and so on, with the
/// confluent limits. Nodes close together are handled by a Taylor series
/// around their mean, well-separated ones by the recursion.
pub fn exp_divided_difference(nodes: &[f64]) -> f64 {
    let mut x = nodes.to_vec();
    x.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let k = x.len() - 1;
    let spread = x[k] - x[0];
    if k == 0 {
        return x[0].exp();
    }
    if spread < 0.5 {
        // exp[x0..xk] = e^m Σ_j h_j(y) / (j + k)!,  y_i = x_i - m.
        let m = x.iter().sum::<f64>() / x.len() as f64;
        let y: Vec<f64> = x.iter().map(|v| v - m).collect();
        // h_j via the recursion on number of variables.
        let terms = 40;
        let mut h = vec![0.0; terms];
        h[0] = 1.0;
        for &yi in &y {
            for j in 1..terms {
                h[j] += yi * h[j - 1];
            }
        }
        let mut fact = (1..=k).map(|i| i as f64).product::<f64>();
        let mut sum = 0.0;
        for (j, hj) in h.iter().enumerate() {
            if j > 0 {
                fact *= (j + k) as f64;
            }
            sum += hj / fact;
        }
        return m.exp() * sum;
    }
    if k == 1 {
        // e^b · expm1(a - b)/(a - b) with b the larger node.
        let (a, b) = (x[0], x[1]);
        return b.exp() * (a - b).exp_m1() / (a - b);
    }
    let lower = exp_divided_difference(&x[..k]);
    let upper = exp_divided_difference(&x[1..]);
    (upper - lower) / spread
}

/// `exp[a, b]` without allocation.
pub fn exp_dd1(a: f64, b: f64) -> f64 {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let delta = lo - hi;
    if delta == 0.0 {
        hi.exp()
    } else {
        hi.exp() * delta.exp_m1() / delta
    }
}

/// `exp[a, a, b] = e^a (e^δ - 1 - δ)/δ²` with `δ = b - a`.
pub fn exp_dd2_confluent(a: f64, b: f64) -> f64 {
    let delta = b - a;
    if delta.abs() < 0.5 {
        // Σ_j δ^j / (j + 2)!
        let mut term = 0.5;
        let mut sum = 0.5;
        for j in 1..20 {
            term *= delta / (j + 2) as f64;
            sum += term;
        }
        a.exp() * sum
    } else if delta < 0.0 {
        a.exp() * (delta.exp_m1() - delta) / (delta * delta)
    } else {
        b.exp() * (-(-delta).exp_m1() - delta * (-delta).exp()) / (delta * delta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_divided_differences_agree() {
        for &(a, b) in &[
            (0.0, 0.0),
            (-1.0, -1.3),
            (-0.2, -40.0),
            (-30.0, -0.1),
            (-5.0, -5.0 + 1e-7),
            (-700.0, -2.0),
        ] {
            let d1 = exp_divided_difference(&[a, b]);
            assert!((exp_dd1(a, b) - d1).abs() <= 1e-14 * d1.abs() + 1e-300);
            let d2 = exp_divided_difference(&[a, a, b]);
            assert!(
                (exp_dd2_confluent(a, b) - d2).abs() <= 1e-13 * d2.abs() + 1e-300,
                "{a} {b}"
            );
        }
    }

    fn taylor_exp(a: &CMatrix) -> CMatrix {
        let n = a.nrows();
        let mut term = CMatrix::identity(n, n);
        let mut sum = term.clone();
        for k in 1..80 {
            term = &term * a * c64(1.0 / k as f64);
            sum += &term;
        }
        sum
    }

    #[test]
    fn expm_matches_taylor() {
        let a = CMatrix::from_fn(4, 4, |i, j| {
            Complex64::new(((i * 7 + j * 3) % 5) as f64 * 0.3 - 0.6, (i as f64 - j as f64) * 0.1)
        });
        let diff = &expm(&a) - &taylor_exp(&a);
        assert!(max_abs(&diff) < 1e-12);
    }

    #[test]
    fn expm_diagonal_large_norm() {
        let a = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c64(-40.0), c64(3.0)]));
        let e = expm(&a);
        assert!((e[(0, 0)].re - (-40.0f64).exp()).abs() < 1e-28);
        assert!((e[(1, 1)].re - 3.0f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn divided_differences_against_bidiagonal_exp() {
        // exp of [[a,1,0],[0,b,1],[0,0,c]] carries exp[a,b] and exp[a,b,c]
        // in its superdiagonals.
        let cases = [
            [0.0, 0.0, 0.0],
            [-1.0, -1.0 + 1e-9, -1.0 + 2e-9],
            [-3.0, -0.2, -0.1],
            [-20.0, -0.5, -0.5],
            [-50.0, -49.7, -3.0],
            [0.3, -0.1, -0.4],
        ];
        for [a, b, c] in cases {
            let m = CMatrix::from_row_slice(
                3,
                3,
                &[
                    c64(a),
                    c64(1.0),
                    c64(0.0),
                    c64(0.0),
                    c64(b),
                    c64(1.0),
                    c64(0.0),
                    c64(0.0),
                    c64(c),
                ],
            );
            let e = expm(&m);
            let d1 = exp_divided_difference(&[a, b]);
            let d2 = exp_divided_difference(&[a, b, c]);
            assert!(
                (e[(0, 1)].re - d1).abs() <= 1e-13 * d1.abs().max(1e-300) + 1e-300,
                "{a} {b}"
            );
            assert!((e[(0, 2)].re - d2).abs() <= 1e-12 * d2.abs().max(1e-30), "{a} {b} {c}");
        }
    }

    #[test]
    fn rank_of_projector() {
        let m = CMatrix::from_row_slice(2, 2, &[c64(1.0), c64(1.0), c64(1.0), c64(1.0)]);
        assert_eq!(numerical_rank(&m, 1e-10), 1);
    }
}

//! Seeded sample data: smooth metric families and exact complexes.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::exterior::TorusBase;
use crate::flat_bundle::MetricFamily;
use crate::linalg::{c64, expm, hermitian_part, max_abs, CMatrix};
use crate::torsion::{FiltrationData, FlatComplexWithMetrics, TorsionError};

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, real: bool) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re = rng.random_range(-1.0..1.0);
        let im = if real { 0.0 } else { rng.random_range(-1.0..1.0) };
        Complex64::new(re, im)
    })
}

fn random_hermitian(rng: &mut ChaCha8Rng, n: usize, real: bool) -> CMatrix {
    let m = random_matrix(rng, n, n, real);
    (&m + m.adjoint()) * c64(0.5)
}

fn modes_for(base: TorusBase) -> &'static [[i32; 2]] {
    match base.dim() {
        0 => &[],
        1 => &[[1, 0], [2, 0]],
        _ => &[[1, 0], [0, 1], [1, 1], [1, -1]],
    }
}

type Term = ([i32; 2], CMatrix, CMatrix);

fn random_terms(rng: &mut ChaCha8Rng, modes: &[[i32; 2]], rank: usize, amplitude: f64, real: bool) -> Vec<Term> {
    modes
        .iter()
        .map(|&k| {
            let s = random_hermitian(rng, rank, real) * c64(amplitude);
            let t = random_hermitian(rng, rank, real) * c64(amplitude);
            (k, s, t)
        })
        .collect()
}

/// `g(x) = exp(H_0 + Σ_k (S_k cos(k·x) + T_k sin(k·x)))` over a few low
/// modes, with `H_0, S_k, T_k` Hermitian (real symmetric when `real`) and
/// the oscillating terms scaled by `amplitude`.
pub fn smooth_metric(base: TorusBase, rank: usize, seed: u64, amplitude: f64, real: bool) -> MetricFamily {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes = modes_for(base);
    let h0 = random_hermitian(&mut rng, rank, real) * c64(0.5);
    let terms = random_terms(&mut rng, modes, rank, amplitude, real);
    MetricFamily::from_fn(base, rank, |x| {
        let mut h = h0.clone();
        for (k, s, t) in &terms {
            let phase = k[0] as f64 * x[0] + k[1] as f64 * x[1];
            h += s * c64(phase.cos()) + t * c64(phase.sin());
        }
        hermitian_part(&expm(&h))
    })
    .expect("exponential of a Hermitian matrix")
}

/// `g(x) = c·I + H_0 + Σ_k (S_k cos(k·x) + T_k sin(k·x))`, a trigonometric
/// polynomial with `c` chosen so that every sample is positive definite.
pub fn band_limited_metric(base: TorusBase, rank: usize, seed: u64, amplitude: f64, real: bool) -> MetricFamily {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes = modes_for(base);
    let h0 = random_hermitian(&mut rng, rank, real) * c64(0.5);
    let terms = random_terms(&mut rng, modes, rank, amplitude, real);
    let bound: f64 = rank as f64 * (max_abs(&h0) + terms.iter().map(|(_, s, t)| max_abs(s) + max_abs(t)).sum::<f64>());
    let shift = 1.0 + bound;
    MetricFamily::from_fn(base, rank, |x| {
        let mut g = CMatrix::identity(rank, rank) * c64(shift) + &h0;
        for (k, s, t) in &terms {
            let phase = k[0] as f64 * x[0] + k[1] as f64 * x[1];
            g += s * c64(phase.cos()) + t * c64(phase.sin());
        }
        g
    })
    .expect("diagonally dominant Hermitian samples")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricStyle {
    Exponential,
    BandLimited,
}

/// An exact complex with the given ranks: `E^k = B^k ⊕ C^k` with `∂`
/// mapping `C^k` isomorphically onto `B^{k+1}`, then conjugated by random
/// changes of basis. Metrics come from [`smooth_metric`].
pub fn exact_complex(
    base: TorusBase,
    ranks: &[usize],
    seed: u64,
    amplitude: f64,
    real: bool,
) -> Result<FlatComplexWithMetrics, TorsionError> {
    exact_complex_styled(base, ranks, seed, amplitude, real, MetricStyle::Exponential)
}

pub fn exact_complex_styled(
    base: TorusBase,
    ranks: &[usize],
    seed: u64,
    amplitude: f64,
    real: bool,
    style: MetricStyle,
) -> Result<FlatComplexWithMetrics, TorsionError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut image = vec![0usize; ranks.len() + 1];
    for k in 0..ranks.len() {
        if ranks[k] < image[k] {
            return Err(TorsionError::Shape(format!("ranks {ranks:?} admit no exact complex")));
        }
        image[k + 1] = ranks[k] - image[k];
    }
    if image[ranks.len()] != 0 {
        return Err(TorsionError::Shape(format!("ranks {ranks:?} admit no exact complex")));
    }
    let frames: Vec<CMatrix> = ranks
        .iter()
        .map(|&r| CMatrix::identity(r, r) + random_matrix(&mut rng, r, r, real) * c64(0.3 / (r.max(1) as f64)))
        .collect();
    let mut boundaries = Vec::new();
    for k in 0..ranks.len().saturating_sub(1) {
        let c = image[k + 1];
        let b = image[k];
        let mut d = CMatrix::zeros(ranks[k + 1], ranks[k]);
        let core = CMatrix::identity(c, c) + random_matrix(&mut rng, c, c, real) * c64(0.3 / (c.max(1) as f64));
        d.view_mut((0, b), (c, c)).copy_from(&core);
        let inv = frames[k].clone().try_inverse().expect("near-identity frame");
        boundaries.push(&frames[k + 1] * d * inv);
    }
    let metrics = ranks
        .iter()
        .enumerate()
        .map(|(k, &r)| {
            let s = seed.wrapping_mul(31).wrapping_add(k as u64 + 1);
            match style {
                MetricStyle::Exponential => smooth_metric(base, r, s, amplitude, real),
                MetricStyle::BandLimited => band_limited_metric(base, r, s, amplitude, real),
            }
        })
        .collect();
    FlatComplexWithMetrics::new(ranks.to_vec(), boundaries, metrics)
}

/// `0 → C → C → 0` over a point with `∂ = 1`, `g⁰ = 1`, `g¹ = r`.
pub fn scalar_two_term(r: f64) -> FlatComplexWithMetrics {
    let base = TorusBase::point();
    let one = |v: f64| CMatrix::from_element(1, 1, c64(v));
    FlatComplexWithMetrics::new(
        vec![1, 1],
        vec![one(1.0)],
        vec![
            MetricFamily::constant(base, one(1.0)).expect("positive"),
            MetricFamily::constant(base, one(r)).expect("positive"),
        ],
    )
    .expect("exact")
}

/// A full flag spanned by the leading columns of a random near-identity
/// basis, with random positive factor metrics.
pub fn generic_full_flag(rank: usize, seed: u64, real: bool) -> Result<FiltrationData, TorsionError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let basis = CMatrix::identity(rank, rank) + random_matrix(&mut rng, rank, rank, real) * c64(0.4);
    let flag = (1..=rank).map(|j| basis.columns(0, j).into_owned()).collect();
    let metrics = (0..rank)
        .map(|_| CMatrix::from_element(1, 1, c64(rng.random_range(0.5..2.0))))
        .collect();
    FiltrationData::new(rank, flag, metrics)
}

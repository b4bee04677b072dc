//! Oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;

/// Hurwitz zeta by Euler–Maclaurin: `N` terms, then the integral, the
/// half term and Bernoulli corrections.
pub fn hurwitz_zeta(s: u32, a: f64) -> f64 {
    const B2K: [f64; 8] = [
        1.0 / 6.0,
        -1.0 / 30.0,
        1.0 / 42.0,
        -1.0 / 30.0,
        5.0 / 66.0,
        -691.0 / 2730.0,
        7.0 / 6.0,
        -3617.0 / 510.0,
    ];
    let s = s as f64;
    let n = 30.0;
    let mut sum: f64 = (0..30).map(|k| (k as f64 + a).powf(-s)).sum();
    let x = n + a;
    sum += x.powf(1.0 - s) / (s - 1.0) + 0.5 * x.powf(-s);
    // B_{2k}/(2k)! · s(s+1)…(s+2k-2) · x^{-s-2k+1}
    let mut rising = s;
    let mut fact = 2.0;
    for (k, b) in B2K.iter().enumerate() {
        let k = k + 1;
        if k > 1 {
            rising *= (s + 2.0 * k as f64 - 3.0) * (s + 2.0 * k as f64 - 2.0);
            fact *= (2 * k - 1) as f64 * (2 * k) as f64;
        }
        sum += b / fact * rising * x.powf(-s - 2.0 * k as f64 + 1.0);
    }
    sum
}

/// `Li_s(e^{2πij/n}) = n^{-s} Σ_{r=1}^{n} e^{2πijr/n} ζ(s, r/n)`.
pub fn polylog_root_oracle(s: u32, j: u64, n: u64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for r in 1..=n {
        let angle = 2.0 * PI * ((j * r) % n) as f64 / n as f64;
        acc += Complex64::from_polar(1.0, angle) * hurwitz_zeta(s, r as f64 / n as f64);
    }
    acc / (n as f64).powi(s as i32)
}

//! Polylogarithms on the closed unit disk, `ζ` at integers, and `ζ'` at
//! negative even integers.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecialFnError {
    #[error("order s = {0} is outside the supported range s >= 2")]
    OrderTooSmall(i64),
    #[error("|z| = {0} lies outside the closed unit disk")]
    OutsideDisk(f64),
    #[error("k = {0} must be at least 1")]
    BadIndex(i64),
    #[error("invalid root of unity {0}/{1}")]
    BadRoot(u64, u64),
}

/// Slack on `|z| <= 1` for points computed on the unit circle.
pub const DISK_SLACK: f64 = 1e-12;

/// `ζ(s)` for integer `s >= 2`, through the alternating `η` series with
/// Borwein's acceleration.
pub fn zeta(s: u32) -> Result<f64, SpecialFnError> {
    if s < 2 {
        return Err(SpecialFnError::OrderTooSmall(s as i64));
    }
    Ok(eta(s as f64) / (1.0 - 2f64.powf(1.0 - s as f64)))
}

fn eta(s: f64) -> f64 {
    const N: usize = 40;
    // d_k = n Σ_{i<=k} (n+i-1)! 4^i / ((n-i)! (2i)!)
    let mut d = [0.0f64; N + 1];
    let mut term = 1.0 / N as f64; // i = 0: (n-1)!/n! = 1/n
    let mut acc = term;
    d[0] = N as f64 * acc;
    for i in 1..=N {
        let (n, i_f) = (N as f64, i as f64);
        term *= (n + i_f - 1.0) * (n - i_f + 1.0) * 4.0 / ((2.0 * i_f - 1.0) * (2.0 * i_f));
        acc += term;
        d[i] = n * acc;
    }
    let dn = d[N];
    let mut sum = 0.0;
    for k in 0..N {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * (d[k] - dn) / ((k + 1) as f64).powf(s);
    }
    -sum / dn
}

/// `ζ'(-2k) = (-1)^k (2k)! ζ(2k+1) / (2^{2k+1} π^{2k})`.
pub fn zeta_prime_neg_even(k: u32) -> Result<f64, SpecialFnError> {
    if k < 1 {
        return Err(SpecialFnError::BadIndex(k as i64));
    }
    let two_k = 2 * k;
    let z = zeta(two_k + 1)?;
    let mut value = z / 2.0;
    for i in 1..=two_k {
        value *= i as f64 / (2.0 * PI);
    }
    Ok(if k % 2 == 0 { value } else { -value })
}

/// `Li_s(z) = Σ_{m>=1} z^m / m^s` for integer `s >= 2` and `|z| <= 1`.
///
/// Small `|z|` uses the defining series. Elsewhere the expansion in
/// `μ = ln z`,
/// `Li_s(e^μ) = μ^{s-1}/(s-1)! (H_{s-1} - ln(-μ)) + Σ_{k != s-1} ζ(s-k) μ^k / k!`,
/// converges geometrically with ratio `|μ| / 2π <= 1/2` on the disk.
/// Real arguments give real values, and `Li_s(z̄)` is computed as the
/// conjugate of `Li_s(z)`.
pub fn polylog(s: u32, z: Complex64) -> Result<Complex64, SpecialFnError> {
    if s < 2 {
        return Err(SpecialFnError::OrderTooSmall(s as i64));
    }
    let r = z.norm();
    if r > 1.0 + DISK_SLACK {
        return Err(SpecialFnError::OutsideDisk(r));
    }
    if z.im < 0.0 {
        return Ok(polylog(s, z.conj())?.conj());
    }
    let value = if r <= 0.5 {
        direct_series(s, z)
    } else {
        log_series(s, z)?
    };
    Ok(if z.im == 0.0 {
        Complex64::new(value.re, 0.0)
    } else {
        value
    })
}

fn direct_series(s: u32, z: Complex64) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut power = z;
    for m in 1..200u32 {
        let term = power / (m as f64).powi(s as i32);
        sum += term;
        if term.norm() <= 1e-18 * sum.norm().max(1e-300) {
            break;
        }
        power *= z;
    }
    sum
}

fn log_series(s: u32, z: Complex64) -> Result<Complex64, SpecialFnError> {
    let mu = z.ln();
    if mu.norm() == 0.0 {
        return Ok(Complex64::new(zeta(s)?, 0.0));
    }
    let s_us = s as usize;
    let mut sum = Complex64::new(0.0, 0.0);
    // k = 0 … s-2: ζ(s-k) with s-k >= 2.
    let mut power = Complex64::new(1.0, 0.0);
    let mut fact = 1.0;
    for k in 0..s_us - 1 {
        if k > 0 {
            power *= mu;
            fact *= k as f64;
        }
        sum += power * (zeta(s - k as u32)? / fact);
    }
    // k = s-1: the logarithmic term.
    power *= mu;
    fact *= (s_us - 1).max(1) as f64;
    let harmonic: f64 = (1..s_us).map(|i| 1.0 / i as f64).sum();
    sum += power / fact * (Complex64::new(harmonic, 0.0) - (-mu).ln());
    // k = s: ζ(0) = -1/2.
    power *= mu;
    fact *= s as f64;
    sum += power * (-0.5 / fact);
    // k = s + 2m - 1, m >= 1: ζ(1-2m) = (-1)^m 2 (2m-1)! ζ(2m) / (2π)^{2m}.
    let mut mu_k = power; // μ^s
    let mut ratio = 1.0 / fact; // 1/s!
    for m in 1..200usize {
        let k = s_us + 2 * m - 1;
        mu_k *= if m == 1 { mu } else { mu * mu };
        // (2m-1)!/k! accumulated alongside 1/(2π)^{2m}.
        ratio = if m == 1 {
            // (1)!/(s+1)!
            1.0 / (1..=k).map(|i| i as f64).product::<f64>()
        } else {
            ratio * ((2 * m - 2) as f64 * (2 * m - 1) as f64) / ((k - 1) as f64 * k as f64)
        };
        let scale = (2.0 * PI).powi(-(2 * m as i32));
        let zeta_2m = zeta(2 * m as u32)?;
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        let term = mu_k * (sign * 2.0 * zeta_2m * scale * ratio);
        sum += term;
        if term.norm() <= 1e-18 * sum.norm().max(1e-300) {
            break;
        }
    }
    Ok(sum)
}

/// A root of unity `e^{2πi j/n}` in lowest terms, `0 <= j < n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RootOfUnity {
    num: u64,
    den: u64,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl RootOfUnity {
    /// `e^{2πi j/n}`; `j` is reduced mod `n` and the fraction to lowest terms.
    pub fn new(j: u64, n: u64) -> Result<Self, SpecialFnError> {
        if n == 0 {
            return Err(SpecialFnError::BadRoot(j, n));
        }
        let j = j % n;
        let g = gcd(j, n).max(1);
        let (num, den) = if j == 0 { (0, 1) } else { (j / g, n / g) };
        Ok(Self { num, den })
    }

    pub fn one() -> Self {
        Self { num: 0, den: 1 }
    }

    pub fn numerator(&self) -> u64 {
        self.num
    }

    pub fn denominator(&self) -> u64 {
        self.den
    }

    /// True when `α^n = 1`.
    pub fn divides(&self, n: u64) -> bool {
        n % self.den == 0
    }

    pub fn conj(&self) -> Self {
        Self::new(self.den - self.num, self.den).expect("nonzero denominator")
    }

    /// The complex value, exact at `±1, ±i` and conjugation-symmetric.
    pub fn value(&self) -> Complex64 {
        let (j, n) = (self.num, self.den);
        if 2 * j > n {
            return self.conj().value().conj();
        }
        match (j, n) {
            (0, _) => Complex64::new(1.0, 0.0),
            (1, 2) => Complex64::new(-1.0, 0.0),
            (1, 4) => Complex64::new(0.0, 1.0),
            _ => Complex64::from_polar(1.0, 2.0 * PI * j as f64 / n as f64),
        }
    }

    /// Angle in `[0, 2π)`.
    pub fn angle(&self) -> f64 {
        2.0 * PI * self.num as f64 / self.den as f64
    }
}

//! Torsion classes of circle bundles `S¹(L^{⊗n}) → S` with the flat line
//! bundle of holonomy `α`.
//!
//! Both classes are polynomials in `ω = c₁(L^{⊗n})` whose coefficients are
//! real or imaginary parts of `Li_{k+1}(α)`. The fibre is odd-dimensional,
//! so the Euler-form correction term vanishes and the comparison between
//! the two classes reduces to one scalar identity per degree.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::special_fn::{polylog, zeta, RootOfUnity, SpecialFnError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircleError {
    #[error("α = e^(2πi·{num}/{den}) is not an n-th root of unity for n = {n}")]
    NotAnNthRoot { num: u64, den: u64, n: u64 },
    #[error("twist power n must be positive")]
    ZeroTwist,
    #[error(transparent)]
    Special(#[from] SpecialFnError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TorsionKind {
    #[serde(rename = "BL")]
    BismutLott,
    #[serde(rename = "IK")]
    IgusaKlein,
}

impl TorsionKind {
    pub fn label(&self) -> &'static str {
        match self {
            TorsionKind::BismutLott => "BL",
            TorsionKind::IgusaKlein => "IK",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Even,
    Odd,
}

/// `Σ_k coeffs[k] ω^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircleTorsionPoly {
    pub kind: TorsionKind,
    pub alpha: RootOfUnity,
    pub twist_power: u64,
    pub coeffs: BTreeMap<usize, f64>,
}

impl CircleTorsionPoly {
    pub fn coeff(&self, k: usize) -> Option<f64> {
        self.coeffs.get(&k).copied()
    }
}

/// `(2k+1)! / (2^{2k} (k!)² (2π)^k)`.
fn bl_prefactor(k: usize) -> f64 {
    let mut binom = 1.0; // C(2k, k) / 4^k
    for i in 1..=k {
        binom *= (k + i) as f64 / (4.0 * i as f64);
    }
    (2 * k + 1) as f64 * binom / (2.0 * PI).powi(k as i32)
}

fn sign(even: bool) -> f64 {
    if even {
        1.0
    } else {
        -1.0
    }
}

/// Coefficient of `ω^k` in the Bismut–Lott class, `k >= 1`.
pub fn bl_coefficient(alpha: RootOfUnity, k: usize) -> Result<f64, SpecialFnError> {
    let li = polylog(k as u32 + 1, alpha.value())?;
    let pre = bl_prefactor(k);
    Ok(if k % 2 == 0 {
        sign((k / 2) % 2 == 0) * pre * li.re
    } else {
        sign(((k - 1) / 2) % 2 == 0) * pre * li.im
    })
}

/// Coefficient of `ω^k` in the Igusa–Klein class. Degree 0 would need
/// `Li_1`, which diverges at `α = 1`, and is returned as `None`.
pub fn ik_coefficient(alpha: RootOfUnity, k: usize) -> Result<Option<f64>, SpecialFnError> {
    if k == 0 {
        return Ok(None);
    }
    let li = polylog(k as u32 + 1, alpha.value())?;
    let inv_fact = 1.0 / (1..=k).map(|i| i as f64).product::<f64>();
    Ok(Some(if k % 2 == 0 {
        sign(((k + 2) / 2) % 2 == 0) * inv_fact * li.re
    } else {
        sign(((k + 1) / 2) % 2 == 0) * inv_fact * li.im
    }))
}

fn check_root(alpha: RootOfUnity, n: u64) -> Result<(), CircleError> {
    if n == 0 {
        return Err(CircleError::ZeroTwist);
    }
    if !alpha.divides(n) {
        return Err(CircleError::NotAnNthRoot {
            num: alpha.numerator(),
            den: alpha.denominator(),
            n,
        });
    }
    Ok(())
}

/// Bismut–Lott class through degree `ω^{kmax}`.
pub fn bl_circle_class(alpha: RootOfUnity, n: u64, kmax: usize) -> Result<CircleTorsionPoly, CircleError> {
    check_root(alpha, n)?;
    let mut coeffs = BTreeMap::new();
    for k in 1..=kmax {
        coeffs.insert(k, bl_coefficient(alpha, k)?);
    }
    Ok(CircleTorsionPoly {
        kind: TorsionKind::BismutLott,
        alpha,
        twist_power: n,
        coeffs,
    })
}

/// Igusa–Klein class through degree `ω^{kmax}`, starting at `ω^1`.
pub fn ik_circle_class(alpha: RootOfUnity, n: u64, kmax: usize) -> Result<CircleTorsionPoly, CircleError> {
    check_root(alpha, n)?;
    let mut coeffs = BTreeMap::new();
    for k in 1..=kmax {
        if let Some(c) = ik_coefficient(alpha, k)? {
            coeffs.insert(k, c);
        }
    }
    Ok(CircleTorsionPoly {
        kind: TorsionKind::IgusaKlein,
        alpha,
        twist_power: n,
        coeffs,
    })
}

/// `2^{4k}((2k)!)²/(4k+1)!` on the even branch and
/// `2^{4k+2}((2k+1)!)²/(4k+3)!` on the odd branch.
pub fn chern_normalization(k: usize, branch: Branch) -> f64 {
    let m = match branch {
        Branch::Even => 2 * k,
        Branch::Odd => 2 * k + 1,
    };
    // 2^{2m} (m!)² / (2m+1)! = Π_{i<=m} 2i/(2i+1)
    (1..=m).map(|i| (2 * i) as f64 / (2 * i + 1) as f64).product()
}

/// Chern normalization for the coefficient of `ω^m`.
pub fn chern_normalization_for_power(m: usize) -> f64 {
    if m % 2 == 0 {
        chern_normalization(m / 2, Branch::Even)
    } else {
        chern_normalization(m / 2, Branch::Odd)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MainTheoremCheck {
    pub power: usize,
    /// Chern normalization times the Bismut–Lott coefficient.
    pub lhs: f64,
    /// `-(m!/(2π)^m)` times the Igusa–Klein coefficient.
    pub rhs: f64,
    pub residual: f64,
}

/// Compares the two classes in the coefficient of `ω^m`, `m >= 1`.
pub fn check_main_theorem(alpha: RootOfUnity, n: u64, power: usize) -> Result<MainTheoremCheck, CircleError> {
    check_root(alpha, n)?;
    assert!(power >= 1, "the comparison starts at ω^1");
    let lhs = chern_normalization_for_power(power) * bl_coefficient(alpha, power)?;
    let ik = ik_coefficient(alpha, power)?.expect("power >= 1");
    let mut scale = 1.0;
    for i in 1..=power {
        scale *= i as f64 / (2.0 * PI);
    }
    let rhs = -scale * ik;
    Ok(MainTheoremCheck {
        power,
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
    })
}

/// Pushing forward along the `n`-fold fibrewise cover `S¹(L^{⊗n}) → S¹(L)`.
///
/// Returns the larger of the two residuals: the distribution relation
/// `Σ_{α^n=1} Li_s(α) - n^{1-s} ζ(s)`, and the class identity
/// `n^k Σ_α τ_k(S¹(L^{⊗n}), F_α) - τ_k(S¹(L), 1)` for `k = s - 1` and both
/// kinds. The factor `n^k` converts `ω_{L^{⊗n}}^k = n^k ω_L^k`.
pub fn check_induction_axiom(n: u64, s: u32) -> Result<f64, CircleError> {
    if n == 0 {
        return Err(CircleError::ZeroTwist);
    }
    if s < 2 {
        return Err(SpecialFnError::OrderTooSmall(s as i64).into());
    }
    let roots: Vec<RootOfUnity> = (0..n).map(|j| RootOfUnity::new(j, n)).collect::<Result<_, _>>()?;
    let mut sum = num_complex::Complex64::new(0.0, 0.0);
    for a in &roots {
        sum += polylog(s, a.value())?;
    }
    let target = (n as f64).powf(1.0 - s as f64) * zeta(s)?;
    let mut residual = (sum - num_complex::Complex64::new(target, 0.0)).norm();

    let k = (s - 1) as usize;
    let nk = (n as f64).powi(k as i32);
    let one = RootOfUnity::one();
    let mut bl_sum = 0.0;
    let mut ik_sum = 0.0;
    for a in &roots {
        bl_sum += bl_coefficient(*a, k)?;
        ik_sum += ik_coefficient(*a, k)?.expect("k >= 1");
    }
    residual = residual.max((nk * bl_sum - bl_coefficient(one, k)?).abs() / nk);
    residual = residual.max((nk * ik_sum - ik_coefficient(one, k)?.expect("k >= 1")).abs() / nk);
    Ok(residual)
}

/// `(1/n^k) τ_k` measured against `ω_L`, which equals the `ω_{L^{⊗n}}`
/// coefficient of the Bismut–Lott class since `ω_{L^{⊗n}} = n ω_L`.
pub fn normalized_coefficient(alpha: RootOfUnity, k: usize) -> Result<f64, SpecialFnError> {
    let n = alpha.denominator() as f64;
    let nk = n.powi(k as i32);
    Ok(bl_coefficient(alpha, k)? * nk / nk)
}

/// Largest change of the normalized coefficient map between consecutive
/// entries of `roots`.
pub fn check_continuity_axiom(k: usize, roots: &[RootOfUnity]) -> Result<f64, SpecialFnError> {
    assert!(k >= 1, "continuity is checked from degree 1");
    let values: Vec<f64> = roots
        .iter()
        .map(|a| normalized_coefficient(*a, k))
        .collect::<Result<_, _>>()?;
    Ok(values.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max))
}

/// Largest `|map(α) - map(α')| / |θ - θ'|^γ` over pairs of `roots` at
/// angular distance at most `delta`.
pub fn continuity_modulus(k: usize, roots: &[RootOfUnity], delta: f64, gamma: f64) -> Result<f64, SpecialFnError> {
    let values: Vec<(f64, f64)> = roots
        .iter()
        .map(|a| Ok((a.angle(), normalized_coefficient(*a, k)?)))
        .collect::<Result<_, SpecialFnError>>()?;
    let mut worst: f64 = 0.0;
    for (i, &(t1, v1)) in values.iter().enumerate() {
        for &(t2, v2) in &values[i + 1..] {
            let d = (t1 - t2).abs();
            let d = d.min(2.0 * PI - d);
            if d > 0.0 && d <= delta {
                worst = worst.max((v1 - v2).abs() / d.powf(gamma));
            }
        }
    }
    Ok(worst)
}

/// Lipschitz constant in the angle of the normalized map for `k >= 2`:
/// `d/dθ Li_{k+1}(e^{iθ}) = i Li_k(e^{iθ})` and `|Li_k| <= ζ(k)`.
pub fn lipschitz_bound(k: usize) -> Result<f64, SpecialFnError> {
    Ok(bl_prefactor(k) * zeta(k as u32)?)
}

/// One row of the coefficient table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CircleTableRow {
    pub kind: TorsionKind,
    pub n: u64,
    pub j: u64,
    pub k: usize,
    pub coefficient: f64,
    pub residual: f64,
}

/// Both classes for `α = e^{2πij/n}`, every `j < n` and `1 <= k <= kmax`.
/// The residual column is the main-theorem residual of that degree.
pub fn circle_table(n: u64, kmax: usize) -> Result<Vec<CircleTableRow>, CircleError> {
    if n == 0 {
        return Err(CircleError::ZeroTwist);
    }
    let mut rows = Vec::new();
    for j in 0..n {
        let alpha = RootOfUnity::new(j, n)?;
        let bl = bl_circle_class(alpha, n, kmax)?;
        let ik = ik_circle_class(alpha, n, kmax)?;
        for k in 1..=kmax {
            let residual = check_main_theorem(alpha, n, k)?.residual;
            for class in [&bl, &ik] {
                rows.push(CircleTableRow {
                    kind: class.kind,
                    n,
                    j,
                    k,
                    coefficient: class.coeffs[&k],
                    residual,
                });
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    const ZETA3: f64 = 1.2020569031595942854;
    const CATALAN: f64 = 0.915965594177219015054603514932;

    fn root(j: u64, n: u64) -> RootOfUnity {
        RootOfUnity::new(j, n).unwrap()
    }

    #[test]
    fn chern_values() {
        assert!((chern_normalization(1, Branch::Even) - 8.0 / 15.0).abs() < 1e-16);
        assert!((chern_normalization(0, Branch::Odd) - 2.0 / 3.0).abs() < 1e-16);
        let k2 = 256.0 * 576.0 / 362880.0;
        assert!((chern_normalization(2, Branch::Even) - k2).abs() < 1e-15);
    }

    #[test]
    fn bl_examples() {
        let one = root(0, 1);
        let c = bl_circle_class(one, 1, 5).unwrap();
        for k in [1, 3, 5] {
            assert_eq!(c.coeff(k), Some(0.0));
        }
        let expected = -120.0 / (64.0 * 4.0 * PI * PI) * ZETA3;
        assert!((c.coeff(2).unwrap() - expected).abs() < 1e-13);
        let m1 = bl_circle_class(root(1, 2), 2, 1).unwrap();
        assert_eq!(m1.coeff(1), Some(0.0));
        assert!(bl_circle_class(root(1, 3), 2, 1).is_err());
    }

    #[test]
    fn ik_examples() {
        let c = ik_circle_class(root(0, 1), 1, 3).unwrap();
        assert!((c.coeff(2).unwrap() - ZETA3 / 2.0).abs() < 1e-13);
        assert_eq!(c.coeff(0), None);
        let i = ik_circle_class(root(1, 4), 4, 1).unwrap();
        assert!((i.coeff(1).unwrap() + CATALAN).abs() < 1e-12);
    }

    #[test]
    fn main_theorem_examples() {
        let c = check_main_theorem(root(0, 1), 1, 2).unwrap();
        assert!((c.lhs + ZETA3 / (4.0 * PI * PI)).abs() < 1e-13);
        assert!(c.residual < 1e-12);
        let odd = check_main_theorem(root(2, 7), 7, 1).unwrap();
        let im = polylog(2, root(2, 7).value()).unwrap().im;
        assert!((odd.lhs - im / (2.0 * PI)).abs() < 1e-13);
        assert!(odd.residual < 1e-12);
        for m in [1, 3, 5, 7] {
            let t = check_main_theorem(root(0, 1), 1, m).unwrap();
            assert_eq!((t.lhs, t.rhs), (0.0, 0.0));
        }
    }

    #[test]
    fn induction_examples() {
        assert_eq!(check_induction_axiom(1, 4).unwrap(), 0.0);
        assert!(check_induction_axiom(2, 3).unwrap() < 1e-12);
        assert!(check_induction_axiom(3, 2).unwrap() < 1e-11);
    }

    #[test]
    fn conjugate_roots() {
        for k in 1..6 {
            let a = bl_coefficient(root(2, 9), k).unwrap();
            let b = bl_coefficient(root(7, 9), k).unwrap();
            if k % 2 == 0 {
                assert_eq!(a, b);
            } else {
                assert_eq!(a, -b);
            }
        }
    }

    #[test]
    fn continuity_examples() {
        let same = vec![root(1, 5); 4];
        assert_eq!(check_continuity_axiom(2, &same).unwrap(), 0.0);
        let n = 1024;
        let roots: Vec<_> = (0..=n).map(|j| root(j, n)).collect();
        let dev = check_continuity_axiom(2, &roots).unwrap();
        assert!(dev <= lipschitz_bound(2).unwrap() * 2.0 * PI / n as f64);
        assert_eq!(
            normalized_coefficient(root(3, 11), 2).unwrap(),
            normalized_coefficient(root(8, 11), 2).unwrap()
        );
    }

    #[test]
    fn table_layout() {
        let rows = circle_table(4, 2).unwrap();
        assert_eq!(rows.len(), 4 * 2 * 2);
        let ik = rows
            .iter()
            .find(|r| r.kind == TorsionKind::IgusaKlein && r.j == 1 && r.k == 1)
            .unwrap();
        assert!((ik.coefficient + CATALAN).abs() < 1e-12);
    }
}

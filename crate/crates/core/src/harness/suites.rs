//! The named verification suites.
//!
//! Torus scenarios are built from fixed seeds so that every run sees the
//! same data. Each scenario is a function of the grid size and quadrature
//! tolerance, which lets the convergence suite rerun it at double
//! resolution.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::schema::{ComplexJson, LoadError};
use super::{timed, CheckRecord, SuiteReport};
use crate::circle_model::{
    bl_circle_class, check_continuity_axiom, check_induction_axiom, check_main_theorem, continuity_modulus,
    ik_coefficient, lipschitz_bound,
};
use crate::exterior::{DifferentialForm, Monomial, TorusBase};
use crate::fixtures::{
    exact_complex, exact_complex_styled, generic_full_flag, scalar_two_term, smooth_metric, MetricStyle,
};
use crate::flat_bundle::FlatBundleData;
use crate::special_fn::{polylog, zeta_prime_neg_even, RootOfUnity};
use crate::torsion::{
    anomaly_residual, graded_torsion_class, torsion_class_rep, torsion_form, FiltrationData, TorsionError,
};

pub const SUITES: &[&str] = &[
    "scalar",
    "anomaly",
    "mod4",
    "filtration",
    "exactseq",
    "circle",
    "induction",
    "triviality",
    "specialfn",
    "convergence",
];

pub const SCALAR_TOL: f64 = 1e-9;
pub const ANOMALY_TOL: f64 = 1e-6;
pub const MOD4_TOL: f64 = 1e-9;
pub const FILTRATION_TOL: f64 = 1e-6;
pub const EXACTSEQ_TOL: f64 = 1e-6;
pub const CIRCLE_TOL: f64 = 1e-10;
pub const SPECIAL_TOL: f64 = 1e-12;

/// Quadrature tolerances used by the suites at base resolution.
pub const POINT_QUAD_TOL: f64 = 1e-10;
pub const TORUS_QUAD_TOL: f64 = 1e-9;

pub const T1_GRID: usize = 64;
pub const T2_GRID: usize = 32;

const ZETA3: f64 = 1.202_056_903_159_594_3;
const CATALAN: f64 = 0.915_965_594_177_219;
const ZETA_PRIME_NEG2: f64 = -0.030_448_457_058_393_27;

pub fn run_suite(name: &str, timing: bool) -> Option<SuiteReport> {
    let records = match name {
        "scalar" => scalar_suite(timing),
        "anomaly" => anomaly_suite(timing),
        "mod4" => mod4_suite(timing),
        "filtration" => filtration_suite(timing),
        "exactseq" => exactseq_suite(timing),
        "circle" => circle_suite(timing),
        "induction" => induction_suite(timing),
        "triviality" => triviality_suite(timing),
        "specialfn" => specialfn_suite(timing),
        "convergence" => convergence_suite(timing),
        _ => return None,
    };
    Some(SuiteReport::new(name, records))
}

fn t1(grid: usize) -> TorusBase {
    TorusBase::new(1, grid).expect("valid grid")
}

fn t2(grid: usize) -> TorusBase {
    TorusBase::new(2, grid).expect("valid grid")
}

fn record_or_fail(name: String, anchor: &str, tolerance: f64, residual: Result<f64, TorsionError>) -> CheckRecord {
    match residual {
        Ok(r) => CheckRecord::new(name, anchor, r, tolerance),
        Err(e) => CheckRecord::failed(name, anchor, tolerance, e),
    }
}

// Scenarios.

pub const SCALAR_RATIOS: [f64; 3] = [0.5, 2.0, 10.0];

/// Degree-0 torsion of `0 → C → C → 0` with metrics `1` and `r`.
pub fn scalar_value(r: f64, quad_tol: f64) -> Result<f64, TorsionError> {
    let res = torsion_form(&scalar_two_term(r), quad_tol)?;
    Ok(res.form.component(Monomial::ONE)[0].re)
}

/// Torsion form and anomaly residual of a `(1,2,1)` complex over `T¹` with
/// band-limited metrics.
pub fn anomaly_t1(grid: usize, quad_tol: f64) -> Result<(DifferentialForm, f64), TorsionError> {
    let cx = exact_complex_styled(t1(grid), &[1, 2, 1], 11, 0.3, false, MetricStyle::BandLimited)?;
    let res = torsion_form(&cx, quad_tol)?;
    let residual = anomaly_residual(&cx, &res.form)?;
    Ok((res.form, residual))
}

/// The `(1,2,1)` example shipped in `data/t1_complex.json`.
pub const BUNDLED_T1_EXAMPLE: &str = include_str!("../../../../data/t1_complex.json");

/// Torsion form and anomaly residual of [`BUNDLED_T1_EXAMPLE`].
pub fn anomaly_bundled(grid: usize, quad_tol: f64) -> Result<(DifferentialForm, f64), TorsionError> {
    let cx = match ComplexJson::parse(BUNDLED_T1_EXAMPLE).map(|c| c.build(t1(grid))) {
        Ok(Ok(cx)) => cx,
        Ok(Err(LoadError::Torsion(e))) => return Err(e),
        Ok(Err(LoadError::Schema(e))) | Err(e) => panic!("bundled example is malformed: {e}"),
    };
    let res = torsion_form(&cx, quad_tol)?;
    let residual = anomaly_residual(&cx, &res.form)?;
    Ok((res.form, residual))
}

/// Same as [`anomaly_t1`] over `T²` with exponential metrics.
pub fn anomaly_t2(grid: usize, quad_tol: f64) -> Result<(DifferentialForm, f64), TorsionError> {
    let cx = exact_complex(t2(grid), &[1, 2, 1], 12, 0.5, false)?;
    let res = torsion_form(&cx, quad_tol)?;
    let residual = anomaly_residual(&cx, &res.form)?;
    Ok((res.form, residual))
}

/// Largest degree-2 coefficient of the torsion form of real data over `T²`.
pub fn mod4_degree_two(grid: usize, quad_tol: f64) -> Result<f64, TorsionError> {
    let cx = exact_complex(t2(grid), &[1, 2, 1], 13, 0.7, true)?;
    let res = torsion_form(&cx, quad_tol)?;
    Ok(res.form.degree_part(2).sup_norm())
}

/// Harmonic degree-2 parts of the torsion class of one rank-3 bundle over
/// `T²` computed with two different full flags.
pub fn filtration_pair(grid: usize, quad_tol: f64) -> Result<(f64, f64), TorsionError> {
    let bundle = FlatBundleData::new(smooth_metric(t2(grid), 3, 14, 1.0, false));
    let standard = FiltrationData::standard_full_flag(3, &[1.0, 2.0, 0.5])?;
    let generic = generic_full_flag(3, 15, false)?;
    let a = torsion_class_rep(&bundle, &standard, quad_tol)?;
    let b = torsion_class_rep(&bundle, &generic, quad_tol)?;
    Ok((a.mean(Monomial(3)).re, b.mean(Monomial(3)).re))
}

/// Harmonic degree-2 parts of the graded torsion class of the terms of an
/// exact `(1,2,1)` complex over `T²`, and of the torsion form of the
/// complex.
pub fn exactseq_pair(grid: usize, quad_tol: f64) -> Result<(f64, f64), TorsionError> {
    let cx = exact_complex(t2(grid), &[1, 2, 1], 16, 0.8, false)?;
    let items = cx
        .graded_bundles()
        .into_iter()
        .enumerate()
        .map(|(k, (deg, bundle))| {
            let factors: Vec<f64> = (0..bundle.rank()).map(|i| 1.0 + 0.5 * (i + k) as f64).collect();
            Ok((
                deg,
                bundle,
                FiltrationData::standard_full_flag(cx.ranks()[k], &factors)?,
            ))
        })
        .collect::<Result<Vec<_>, TorsionError>>()?;
    let graded = graded_torsion_class(&items, quad_tol)?;
    let tau = torsion_form(&cx, quad_tol)?.form.positive_degree_part();
    Ok((graded.mean(Monomial(3)).re, tau.mean(Monomial(3)).re))
}

// Suites.

fn scalar_suite(timing: bool) -> Vec<CheckRecord> {
    SCALAR_RATIOS
        .iter()
        .map(|&r| {
            timed(timing, || {
                record_or_fail(
                    format!("two-term complex r={r}"),
                    "metric-change torsion over a point equals -½ ln r",
                    SCALAR_TOL,
                    scalar_value(r, POINT_QUAD_TOL).map(|v| (v + 0.5 * r.ln()).abs()),
                )
            })
        })
        .collect()
}

const ANOMALY: &str = "anomaly formula d𝒯 = f(∇, g)";

fn anomaly_suite(timing: bool) -> Vec<CheckRecord> {
    vec![
        timed(timing, || {
            record_or_fail(
                format!("(1,2,1) complex over T1, grid {T1_GRID}, band-limited metrics"),
                ANOMALY,
                ANOMALY_TOL,
                anomaly_t1(T1_GRID, TORUS_QUAD_TOL).map(|x| x.1),
            )
        }),
        timed(timing, || {
            record_or_fail(
                format!("bundled T1 example, grid {T1_GRID}"),
                ANOMALY,
                ANOMALY_TOL,
                anomaly_bundled(T1_GRID, TORUS_QUAD_TOL).map(|x| x.1),
            )
        }),
        timed(timing, || {
            record_or_fail(
                format!("(1,2,1) complex over T2, grid {T2_GRID}"),
                ANOMALY,
                ANOMALY_TOL,
                anomaly_t2(T2_GRID, TORUS_QUAD_TOL).map(|x| x.1),
            )
        }),
    ]
}

const MOD4: &str = "degree 4k+2 part of the torsion form vanishes for real data";

fn mod4_suite(timing: bool) -> Vec<CheckRecord> {
    vec![timed(timing, || {
        record_or_fail(
            format!("real (1,2,1) complex over T2, grid {T2_GRID}"),
            MOD4,
            MOD4_TOL,
            mod4_degree_two(T2_GRID, TORUS_QUAD_TOL),
        )
    })]
}

const FILTRATION: &str = "torsion class is independent of the flag";

fn filtration_suite(timing: bool) -> Vec<CheckRecord> {
    vec![timed(timing, || {
        record_or_fail(
            format!("two full flags on a rank-3 bundle over T2, grid {T2_GRID}"),
            FILTRATION,
            FILTRATION_TOL,
            filtration_pair(T2_GRID, TORUS_QUAD_TOL).map(|(a, b)| (a - b).abs()),
        )
    })]
}

const EXACTSEQ: &str = "graded torsion class of an exact complex equals the class of its torsion form";

fn exactseq_suite(timing: bool) -> Vec<CheckRecord> {
    vec![timed(timing, || {
        record_or_fail(
            format!("(1,2,1) exact complex over T2, grid {T2_GRID}"),
            EXACTSEQ,
            EXACTSEQ_TOL,
            exactseq_pair(T2_GRID, TORUS_QUAD_TOL).map(|(a, b)| (a - b).abs()),
        )
    })]
}

pub const CIRCLE_MAX_N: u64 = 12;
pub const CIRCLE_MAX_POWER: usize = 7;

fn circle_suite(timing: bool) -> Vec<CheckRecord> {
    const MAIN: &str = "Bismut-Lott and Igusa-Klein classes of circle bundles agree after normalization";
    let mut out = Vec::new();
    for n in 1..=CIRCLE_MAX_N {
        for j in 0..n {
            for m in 1..=CIRCLE_MAX_POWER {
                out.push(timed(timing, || {
                    let name = format!("n={n} j={j} power={m}");
                    match RootOfUnity::new(j, n)
                        .map_err(Into::into)
                        .and_then(|a| check_main_theorem(a, n, m))
                    {
                        Ok(c) => CheckRecord::new(name, MAIN, c.residual, CIRCLE_TOL),
                        Err(e) => CheckRecord::failed(name, MAIN, CIRCLE_TOL, e),
                    }
                }));
            }
        }
    }
    out.push(timed(timing, || {
        let anchor = "ω² coefficient of the trivial circle bundle is -ζ(3)/(4π²) on both sides";
        match check_main_theorem(RootOfUnity::one(), 1, 2) {
            Ok(c) => {
                let target = -ZETA3 / (4.0 * PI * PI);
                let residual = (c.lhs - target).abs().max((c.rhs - target).abs());
                CheckRecord::new("n=1 j=0 power=2 value", anchor, residual, CIRCLE_TOL)
            }
            Err(e) => CheckRecord::failed("n=1 j=0 power=2 value", anchor, CIRCLE_TOL, e),
        }
    }));
    out
}

fn induction_suite(timing: bool) -> Vec<CheckRecord> {
    const ANCHOR: &str = "torsion classes are compatible with pushforward along fibrewise covers";
    let mut out = Vec::new();
    for n in 2..=8u64 {
        for s in 2..=7u32 {
            out.push(timed(timing, || {
                let name = format!("distribution relation n={n} s={s}");
                match check_induction_axiom(n, s) {
                    Ok(r) => CheckRecord::new(name, ANCHOR, r, CIRCLE_TOL),
                    Err(e) => CheckRecord::failed(name, ANCHOR, CIRCLE_TOL, e),
                }
            }));
        }
    }
    // Continuity in α: on roots of unity ordered by angle, the normalized
    // coefficient map stays within its Lipschitz bound.
    let mut roots: Vec<RootOfUnity> = (1..=24u64)
        .flat_map(|n| (0..n).filter_map(move |j| RootOfUnity::new(j, n).ok()))
        .collect();
    roots.sort_by(|a, b| a.angle().total_cmp(&b.angle()));
    roots.dedup();
    for k in 2..=5usize {
        out.push(timed(timing, || {
            let anchor = "torsion classes depend continuously on the holonomy";
            let name = format!("Lipschitz continuity k={k}");
            let excess = continuity_modulus(k, &roots, 0.5, 1.0)
                .and_then(|m| Ok(m - lipschitz_bound(k)?))
                .and_then(|x| Ok((x.max(0.0), check_continuity_axiom(k, &roots)?)));
            match excess {
                Ok((x, _)) => CheckRecord::new(name, anchor, x, CIRCLE_TOL),
                Err(e) => CheckRecord::failed(name, anchor, CIRCLE_TOL, e),
            }
        }));
    }
    out
}

fn triviality_suite(timing: bool) -> Vec<CheckRecord> {
    const ANCHOR: &str = "degree 4k+2 classes of circle bundles with trivial holonomy vanish";
    [1usize, 3, 5, 7]
        .iter()
        .map(|&k| {
            timed(timing, || {
                let name = format!("alpha=1 Bismut-Lott coefficient k={k}");
                match bl_circle_class(RootOfUnity::one(), 1, 7) {
                    Ok(c) => CheckRecord::new(name, ANCHOR, c.coeff(k).map_or(f64::NAN, f64::abs), 0.0),
                    Err(e) => CheckRecord::failed(name, ANCHOR, 0.0, e),
                }
            })
        })
        .collect()
}

fn specialfn_suite(timing: bool) -> Vec<CheckRecord> {
    let li = |s: u32, re: f64| polylog(s, Complex64::new(re, 0.0));
    let checks: Vec<(&str, &str, Box<dyn Fn() -> Result<f64, String>>)> = vec![
        (
            "zeta'(-2)",
            "ζ'(-2) = -ζ(3)/(4π²)",
            Box::new(|| Ok((zeta_prime_neg_even(1).map_err(|e| e.to_string())? - ZETA_PRIME_NEG2).abs())),
        ),
        (
            "Li2(1)",
            "Li₂(1) = π²/6",
            Box::new(move || Ok((li(2, 1.0).map_err(|e| e.to_string())? - Complex64::new(PI * PI / 6.0, 0.0)).norm())),
        ),
        (
            "distribution relation n=2 s=3",
            "Li₃(1) + Li₃(-1) = ζ(3)/4",
            Box::new(move || {
                let sum = li(3, 1.0).map_err(|e| e.to_string())? + li(3, -1.0).map_err(|e| e.to_string())?;
                Ok((sum - Complex64::new(ZETA3 / 4.0, 0.0)).norm())
            }),
        ),
        (
            "Li3(-1)",
            "Li₃(-1) = -3ζ(3)/4",
            Box::new(move || Ok((li(3, -1.0).map_err(|e| e.to_string())? + Complex64::new(0.75 * ZETA3, 0.0)).norm())),
        ),
        (
            "Igusa-Klein coefficient n=4 j=1 k=1",
            "Igusa-Klein coefficient at α = i, k = 1, is -G (Catalan)",
            Box::new(|| {
                let alpha = RootOfUnity::new(1, 4).map_err(|e| e.to_string())?;
                let c = ik_coefficient(alpha, 1).map_err(|e| e.to_string())?.ok_or("missing")?;
                Ok((c + CATALAN).abs())
            }),
        ),
    ];
    checks
        .into_iter()
        .map(|(name, anchor, f)| {
            timed(timing, || match f() {
                Ok(r) => CheckRecord::new(name, anchor, r, SPECIAL_TOL),
                Err(e) => CheckRecord::failed(name, anchor, SPECIAL_TOL, e),
            })
        })
        .collect()
}

/// Values of `fine` at the points of the grid coarser by a factor of two.
pub fn subsample(fine: &DifferentialForm, coarse: TorusBase) -> DifferentialForm {
    let g = coarse.grid();
    let fg = fine.base().grid();
    assert_eq!(fg, 2 * g, "fine grid must be twice the coarse grid");
    let map = |p: usize| match coarse.dim() {
        0 => 0,
        1 => 2 * p,
        _ => 2 * (p / g) * fg + 2 * (p % g),
    };
    let mut out = DifferentialForm::zero(coarse);
    for mono in coarse.monomials() {
        let src = fine.component(mono);
        for (p, v) in out.component_mut(mono).iter_mut().enumerate() {
            *v = src[map(p)];
        }
    }
    out
}

fn convergence_suite(timing: bool) -> Vec<CheckRecord> {
    const ANCHOR: &str = "results are stable under doubling the grid and halving the quadrature tolerance";
    let mut out = Vec::new();
    for &r in &SCALAR_RATIOS {
        out.push(timed(timing, || {
            let diff =
                scalar_value(r, POINT_QUAD_TOL).and_then(|a| Ok((a - scalar_value(r, POINT_QUAD_TOL / 2.0)?).abs()));
            record_or_fail(format!("scalar r={r}"), ANCHOR, SCALAR_TOL, diff)
        }));
    }
    out.push(timed(timing, || {
        let diff = anomaly_t1(T1_GRID, TORUS_QUAD_TOL).and_then(|(a, _)| {
            let (b, _) = anomaly_t1(2 * T1_GRID, TORUS_QUAD_TOL / 2.0)?;
            Ok((&a - &subsample(&b, a.base())).sup_norm())
        });
        record_or_fail(
            format!("anomaly T1 torsion form, grid {T1_GRID} vs {}", 2 * T1_GRID),
            ANCHOR,
            ANOMALY_TOL,
            diff,
        )
    }));
    out.push(timed(timing, || {
        let diff = anomaly_bundled(T1_GRID, TORUS_QUAD_TOL).and_then(|(a, _)| {
            let (b, _) = anomaly_bundled(2 * T1_GRID, TORUS_QUAD_TOL / 2.0)?;
            Ok((&a - &subsample(&b, a.base())).sup_norm())
        });
        record_or_fail(
            format!("bundled T1 example, grid {T1_GRID} vs {}", 2 * T1_GRID),
            ANCHOR,
            ANOMALY_TOL,
            diff,
        )
    }));
    out.push(timed(timing, || {
        let diff = anomaly_t2(T2_GRID, TORUS_QUAD_TOL).and_then(|(a, _)| {
            let (b, _) = anomaly_t2(2 * T2_GRID, TORUS_QUAD_TOL / 2.0)?;
            Ok((&a - &subsample(&b, a.base())).sup_norm())
        });
        record_or_fail(
            format!("anomaly T2 torsion form, grid {T2_GRID} vs {}", 2 * T2_GRID),
            ANCHOR,
            ANOMALY_TOL,
            diff,
        )
    }));
    out.push(timed(timing, || {
        let diff = mod4_degree_two(T2_GRID, TORUS_QUAD_TOL)
            .and_then(|a| Ok((a - mod4_degree_two(2 * T2_GRID, TORUS_QUAD_TOL / 2.0)?).abs()));
        record_or_fail(
            format!("mod 4 degree-2 part, grid {T2_GRID} vs {}", 2 * T2_GRID),
            ANCHOR,
            MOD4_TOL,
            diff,
        )
    }));
    out.push(timed(timing, || {
        let diff = filtration_pair(T2_GRID, TORUS_QUAD_TOL).and_then(|(a1, b1)| {
            let (a2, b2) = filtration_pair(2 * T2_GRID, TORUS_QUAD_TOL / 2.0)?;
            Ok((a1 - a2).abs().max((b1 - b2).abs()))
        });
        record_or_fail(
            format!("filtration classes, grid {T2_GRID} vs {}", 2 * T2_GRID),
            ANCHOR,
            FILTRATION_TOL,
            diff,
        )
    }));
    out.push(timed(timing, || {
        let diff = exactseq_pair(T2_GRID, TORUS_QUAD_TOL).and_then(|(a1, b1)| {
            let (a2, b2) = exactseq_pair(2 * T2_GRID, TORUS_QUAD_TOL / 2.0)?;
            Ok((a1 - a2).abs().max((b1 - b2).abs()))
        });
        record_or_fail(
            format!("exact-sequence classes, grid {T2_GRID} vs {}", 2 * T2_GRID),
            ANCHOR,
            EXACTSEQ_TOL,
            diff,
        )
    }));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsample_picks_coarse_points() {
        let coarse = t2(4);
        let fine = t2(8);
        let f = |x: [f64; 2]| (x[0] + 2.0 * x[1]).sin();
        let a = DifferentialForm::from_real_fn(coarse, Monomial::ONE, f);
        let b = subsample(&DifferentialForm::from_real_fn(fine, Monomial::ONE, f), coarse);
        assert!((&a - &b).sup_norm() < 1e-15);
    }

    #[test]
    fn cheap_suites_pass() {
        for name in ["scalar", "anomaly", "circle", "induction", "triviality", "specialfn"] {
            let report = run_suite(name, false).unwrap();
            for r in &report.records {
                assert!(r.pass, "{name}: {r:?}");
            }
        }
    }
}

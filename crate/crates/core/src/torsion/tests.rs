use super::*;
use crate::exterior::TorusBase;
use crate::fixtures::{exact_complex, scalar_two_term, smooth_metric};
use crate::flat_bundle::{odd_char_form, FlatBundleData};
use crate::form_matrix::LocalFormMatrix;
use crate::linalg::{c64, max_abs};

fn t1(n: usize) -> TorusBase {
    TorusBase::new(1, n).unwrap()
}

fn t2(n: usize) -> TorusBase {
    TorusBase::new(2, n).unwrap()
}

fn one(v: f64) -> CMatrix {
    CMatrix::from_element(1, 1, c64(v))
}

/// Trapezoid rule in `u = ln t`, independent of the adaptive scheme.
fn trapezoid(f: impl Fn(f64) -> f64, lo: f64, hi: f64, step: f64) -> f64 {
    let n = ((hi - lo) / step).round() as usize;
    let h = (hi - lo) / n as f64;
    let mut sum = 0.5 * (f(lo) + f(hi));
    for i in 1..n {
        sum += f(lo + i as f64 * h);
    }
    sum * h
}

#[test]
fn two_term_superconnection_square() {
    let r = 3.0;
    let cx = scalar_two_term(r);
    let t = 0.7;
    let x = superconnection_xt(&cx, t).unwrap();
    let body = x.points()[0].body();
    assert!((body[(0, 1)] - c64(0.5 * t * r)).norm() < 1e-15);
    assert!((body[(1, 0)] - c64(-0.5)).norm() < 1e-15);
    let sq = body * body;
    assert!(max_abs(&(sq - CMatrix::identity(2, 2) * c64(-t * r / 4.0))) < 1e-15);
    assert!(superconnection_xt(&cx, 0.0).is_err());
}

#[test]
fn constant_metrics_have_no_form_part() {
    let base = t1(8);
    let g = MetricFamily::constant(base, one(2.0)).unwrap();
    let cx = FlatComplexWithMetrics::new(vec![1, 1], vec![one(1.0)], vec![g.clone(), g]).unwrap();
    let x = superconnection_xt(&cx, 1.0).unwrap();
    for p in x.points() {
        assert_eq!(max_abs(&p.comps[1]), 0.0);
    }
}

#[test]
fn adjoint_property() {
    let cx = exact_complex(t2(8), &[1, 2, 1], 7, 0.2, false).unwrap();
    let d = cx.total_boundary();
    for (p, ds) in cx.adjoint_boundary().iter().enumerate() {
        let g = cx.metric_at(p);
        assert!(max_abs(&(&g * ds - d.adjoint() * &g)) < 1e-12);
    }
}

#[test]
fn validation_errors() {
    let base = TorusBase::point();
    let g = |r: usize| MetricFamily::identity(base, r);
    // ∂ ∘ ∂ ≠ 0.
    let d0 = CMatrix::from_row_slice(1, 1, &[c64(1.0)]);
    let err = FlatComplexWithMetrics::new(vec![1, 1, 1], vec![d0.clone(), d0.clone()], vec![g(1), g(1), g(1)]);
    assert!(matches!(err, Err(TorsionError::NotAComplex { degree: 0, .. })));
    // Cohomology in degree 1.
    let err = FlatComplexWithMetrics::new(
        vec![1, 2],
        vec![CMatrix::from_row_slice(2, 1, &[c64(1.0), c64(0.0)])],
        vec![g(1), g(2)],
    );
    assert!(matches!(
        err,
        Err(TorsionError::NotExact {
            degree: 1,
            cohomology: 1
        })
    ));
    let err = FlatComplexWithMetrics::new(vec![1, 1], vec![CMatrix::zeros(2, 1)], vec![g(1), g(1)]);
    assert!(matches!(err, Err(TorsionError::Shape(_))));
    let cx = scalar_two_term(2.0);
    assert!(matches!(torsion_form(&cx, 1e-3), Err(TorsionError::BadTol(_))));
    assert!(matches!(torsion_form(&cx, 1e-13), Err(TorsionError::BadTol(_))));
}

#[test]
fn two_term_integrand_closed_form() {
    for &r in &[0.5, 1.0, 2.0, 10.0] {
        let cx = scalar_two_term(r);
        for &t in &[1e-3, 0.3, 1.0, 4.0, 40.0] {
            let expected = -0.5 * counterterm(t * r) + 0.5 * counterterm(t);
            let fast = torsion_integrand(&cx, t).unwrap().component(Monomial::ONE)[0];
            let slow = torsion_integrand_reference(&cx, t).unwrap().component(Monomial::ONE)[0];
            assert!((fast.re - expected).abs() < 1e-15, "r={r} t={t}");
            assert!((slow - c64(expected)).norm() < 1e-14);
        }
    }
}

#[test]
fn integrand_decays_at_spectral_rate() {
    // Gap r < 1, so the e^{-rt/4} mode outlives the counterterm.
    let r = 0.5;
    let cx = scalar_two_term(r);
    let gap = spectral_gap(&cx);
    assert!((gap - r).abs() < 1e-14);
    let h = |t: f64| torsion_integrand(&cx, t).unwrap().component(Monomial::ONE)[0].re;
    let big_t = 200.0;
    let rate = (h(2.0 * big_t) / h(big_t)).ln();
    // Linear prefactor contributes ln 2.
    assert!((rate + gap * big_t / 4.0 - 2f64.ln()).abs() < 0.05, "{rate}");
}

#[test]
fn fast_integrand_matches_duhamel_route() {
    for (base, ranks, seed) in [
        (t1(8), vec![1, 2, 1], 1u64),
        (t2(4), vec![1, 2, 1], 2),
        (t2(4), vec![2, 3, 1], 3),
        (t2(4), vec![0, 1, 2, 1], 4),
    ] {
        let cx = exact_complex(base, &ranks, seed, 0.3, false).unwrap();
        for &t in &[0.05, 0.8, 3.0, 20.0] {
            let fast = torsion_integrand(&cx, t).unwrap();
            let slow = torsion_integrand_reference(&cx, t).unwrap();
            let diff = (&fast - &slow).sup_norm();
            assert!(diff < 1e-11 * slow.sup_norm().max(1.0), "{ranks:?} t={t}: {diff:e}");
        }
    }
}

#[test]
fn scalar_torsion_is_minus_half_log_r() {
    for &r in &[0.5, 2.0, 10.0] {
        let res = torsion_form(&scalar_two_term(r), 1e-10).unwrap();
        let value = res.form.component(Monomial::ONE)[0].re;
        let h = |u: f64| {
            let t = u.exp();
            -0.5 * counterterm(t * r) + 0.5 * counterterm(t)
        };
        let oracle = -trapezoid(h, -40.0, 8.0, 1e-3);
        assert!((oracle + 0.5 * r.ln()).abs() < 1e-12);
        assert!((value - oracle).abs() < 1e-10, "r={r}: {value} vs {oracle}");
        assert!(res.report.est_error <= 1e-10);
    }
}

#[test]
fn equal_metrics_give_zero() {
    let base = t1(16);
    let g = smooth_metric(base, 2, 5, 0.3, false);
    let res = metric_change_torsion(&g, &g, 1e-9).unwrap();
    assert!(res.form.sup_norm() < 1e-12);
}

#[test]
fn point_complex_matches_brute_quadrature() {
    let cx = exact_complex(TorusBase::point(), &[1, 2, 1], 11, 0.0, false).unwrap();
    let res = torsion_form(&cx, 1e-10).unwrap();
    let h = |u: f64| {
        torsion_integrand_reference(&cx, u.exp())
            .unwrap()
            .component(Monomial::ONE)[0]
            .re
    };
    let oracle = -trapezoid(h, -40.0, 12.0, 5e-3);
    let value = res.form.component(Monomial::ONE)[0].re;
    assert!((value - oracle).abs() < 1e-9, "{value} vs {oracle}");
}

#[test]
fn direct_sum_is_additive() {
    let base = t1(8);
    let a = exact_complex(base, &[1, 1], 21, 0.3, false).unwrap();
    let b = exact_complex(base, &[1, 2, 1], 22, 0.3, false).unwrap();
    let sum = a.direct_sum(&b).unwrap();
    let tol = 1e-9;
    let ta = torsion_form(&a, tol).unwrap().form;
    let tb = torsion_form(&b, tol).unwrap().form;
    let ts = torsion_form(&sum, tol).unwrap().form;
    assert!((&ts - &(&ta + &tb)).sup_norm() < 2e-9);
}

#[test]
fn metric_change_degree_zero_and_cocycle() {
    let base = t1(16);
    let g1 = smooth_metric(base, 2, 31, 0.3, false);
    let g2 = smooth_metric(base, 2, 32, 0.3, false);
    let g3 = smooth_metric(base, 2, 33, 0.3, false);
    let tol = 1e-9;
    let m12 = metric_change_torsion(&g1, &g2, tol).unwrap().form.degree_part(0);
    let m23 = metric_change_torsion(&g2, &g3, tol).unwrap().form.degree_part(0);
    let m13 = metric_change_torsion(&g1, &g3, tol).unwrap().form.degree_part(0);
    assert!((&m13 - &(&m12 + &m23)).sup_norm() < 3e-9);
    // Degree 0 is -½ ln det(g1^{-1} g2).
    let expected = &(&g1.log_det() - &g2.log_det()) * 0.5;
    assert!((&m12 - &expected).sup_norm() < 2e-9);
}

#[test]
fn ses_split_isometric_is_zero() {
    let base = t1(8);
    let gf = smooth_metric(base, 1, 41, 0.3, false);
    let gq = smooth_metric(base, 1, 42, 0.3, false);
    let samples = gf
        .samples()
        .iter()
        .zip(gq.samples())
        .map(|(a, b)| {
            let mut m = CMatrix::zeros(2, 2);
            m[(0, 0)] = a[(0, 0)];
            m[(1, 1)] = b[(0, 0)];
            m
        })
        .collect();
    let ge = MetricFamily::new(base, 2, samples).unwrap();
    let embed = CMatrix::from_row_slice(2, 1, &[c64(1.0), c64(0.0)]);
    let res = ses_torsion(&gf, &ge, &gq, &embed, 1e-9).unwrap();
    assert!(res.form.sup_norm() < 1e-9);
    assert_eq!(
        res.report.provenance,
        vec!["quotient identified with coordinates [1] of E".to_string()]
    );
    assert!(matches!(
        ses_torsion(&gf, &ge, &gq, &CMatrix::zeros(2, 1), 1e-9),
        Err(TorsionError::NotInjective)
    ));
}

#[test]
fn ses_scaling_of_middle_metric() {
    // Non-split constant metrics over a point.
    let base = TorusBase::point();
    let gf = MetricFamily::constant(base, one(1.5)).unwrap();
    let ge = MetricFamily::constant(
        base,
        CMatrix::from_row_slice(
            2,
            2,
            &[c64(2.0), Complex64::new(0.3, 0.4), Complex64::new(0.3, -0.4), c64(1.0)],
        ),
    )
    .unwrap();
    let gq = MetricFamily::constant(base, one(0.7)).unwrap();
    let embed = CMatrix::from_row_slice(2, 1, &[c64(1.0), c64(0.5)]);
    let tol = 1e-10;
    let before = ses_torsion(&gf, &ge, &gq, &embed, tol)
        .unwrap()
        .form
        .component(Monomial::ONE)[0]
        .re;
    let lambda = 3.0;
    let after = ses_torsion(&gf, &ge.scaled(lambda), &gq, &embed, tol)
        .unwrap()
        .form
        .component(Monomial::ONE)[0]
        .re;
    // Composition with the metric-change complex of E in degree 1.
    assert!(
        (after - before + 0.5 * 2.0 * lambda.ln()).abs() < 1e-9,
        "{}",
        after - before
    );
}

#[test]
fn anomaly_identity_on_circle() {
    let cx = exact_complex(t1(32), &[1, 2, 1], 51, 0.3, false).unwrap();
    let res = torsion_form(&cx, 1e-9).unwrap();
    assert!(anomaly_residual(&cx, &res.form).unwrap() < 1e-6);
    assert!(res.form.component(Monomial::dx(0)).iter().all(|z| z.norm() == 0.0));
}

#[test]
fn real_data_has_no_degree_two_part() {
    let cx = exact_complex(t2(8), &[1, 2, 1], 61, 0.3, true).unwrap();
    let res = torsion_form(&cx, 1e-9).unwrap();
    assert!(res.form.degree_part(2).sup_norm() < 1e-9);
    let cxc = exact_complex(t2(8), &[1, 2, 1], 61, 0.3, false).unwrap();
    let resc = torsion_form(&cxc, 1e-9).unwrap();
    assert!(resc.form.degree_part(2).sup_norm() > 1e-6);
    assert!(resc.report.imag_residual < 1e-9);
}

#[test]
fn boundary_plus_flat_connection_squares_to_zero() {
    // (∂ + d)² = ∂² + (∂d + d∂) + d²; the cross term vanishes for constant ∂
    // by the sign rule ∂(τ ⊗ w) = (-1)^{deg τ} τ ⊗ ∂w.
    let cx = exact_complex(t1(16), &[1, 2, 1], 71, 0.3, false).unwrap();
    let d = cx.total_boundary();
    let (signs, _) = cx.grading();
    let base = cx.base();
    let mut a = LocalFormMatrix::zeros(base.dim(), cx.size());
    a.comps[0] = d.clone();
    let sq = a.mul(&a, &signs);
    assert!(sq.comps.iter().all(|m| max_abs(m) < 1e-12));
    // Apply ∂∘d + d∘∂ to a section τ ⊗ w with τ = sin x: both pieces cancel.
    let w = nalgebra::DVector::from_fn(cx.size(), |i, _| Complex64::new(i as f64 + 1.0, -0.5));
    let tau: Vec<Complex64> = (0..base.num_points()).map(|p| c64(base.coords(p)[0].sin())).collect();
    let dtau = crate::exterior::spectral_partial(base, &tau, 0);
    let mut worst: f64 = 0.0;
    for p in 0..base.num_points() {
        // d(∂(τ w)) = dτ ⊗ ∂w ; ∂(d(τ w)) = ∂(dτ ⊗ w) = -dτ ⊗ ∂w.
        let first = (&d * &w) * dtau[p];
        let second = -((&d * &w) * dtau[p]);
        worst = worst.max((first + second).norm());
    }
    assert!(worst < 1e-12);
}

#[test]
fn filtration_torsion_examples() {
    let base = t1(64);
    let tol = 1e-9;
    // Unitary bundle, trivial flag.
    let h = CMatrix::from_row_slice(
        2,
        2,
        &[c64(2.0), Complex64::new(0.1, 0.2), Complex64::new(0.1, -0.2), c64(1.0)],
    );
    let unitary = FlatBundleData::new(MetricFamily::constant(base, h.clone()).unwrap());
    let trivial = FiltrationData::new(2, vec![CMatrix::identity(2, 2)], vec![h]).unwrap();
    assert!(filtration_torsion(&unitary, &trivial, tol).unwrap().form.sup_norm() < 1e-9);
    assert!(torsion_class_rep(&unitary, &trivial, tol).unwrap().sup_norm() < 1e-9);
    // Varying metric, full flag: d(result) = f(∇, g).
    let bundle = FlatBundleData::new(smooth_metric(base, 2, 81, 0.3, false));
    let full = FiltrationData::standard_full_flag(2, &[1.0, 2.0]).unwrap();
    let res = filtration_torsion(&bundle, &full, tol).unwrap();
    let f = odd_char_form(&bundle);
    assert!((&res.form.exterior_d() - &f).sup_norm() < 1e-6);
    // Constant metric, mismatched factors: degree 0 only, equal to minus the
    // sum of the two short-exact-sequence torsions.
    let g = CMatrix::from_row_slice(2, 2, &[c64(3.0), c64(0.5), c64(0.5), c64(1.0)]);
    let flat = FlatBundleData::new(MetricFamily::constant(base, g.clone()).unwrap());
    let res = filtration_torsion(&flat, &full, tol).unwrap();
    assert!(res.form.positive_degree_part().sup_norm() < 1e-12);
    let value = res.form.component(Monomial::ONE)[0].re;
    let constant = |m: CMatrix| MetricFamily::constant(base, m).unwrap();
    let step1 = FlatComplexWithMetrics::new(
        vec![0, 1, 1],
        vec![CMatrix::zeros(1, 0), one(1.0)],
        vec![
            MetricFamily::new(base, 0, vec![CMatrix::zeros(0, 0); 64]).unwrap(),
            constant(one(3.0)),
            constant(one(1.0)),
        ],
    )
    .unwrap();
    let step2 = FlatComplexWithMetrics::new(
        vec![1, 2, 1],
        vec![
            CMatrix::from_row_slice(2, 1, &[c64(1.0), c64(0.0)]),
            CMatrix::from_row_slice(1, 2, &[c64(0.0), c64(1.0)]),
        ],
        vec![constant(one(3.0)), constant(g), constant(one(2.0))],
    )
    .unwrap();
    let expected = -(log_det_oracle(&step1) + log_det_oracle(&step2));
    assert!((value - expected).abs() < 1e-9, "{value} vs {expected}");
}

/// Degree-0 torsion for constant metrics: `½ Σ_k (-1)^k k ln det D_k`, from
/// Frullani's integral applied to each eigenvalue of `D = ∂∂* + ∂*∂`.
fn log_det_oracle(cx: &FlatComplexWithMetrics) -> f64 {
    let d = cx.total_boundary();
    let ds = &cx.adjoint_boundary()[0];
    let lap = &d * ds + ds * &d;
    let off = cx.offsets();
    let mut total = 0.0;
    for (k, &r) in cx.ranks().iter().enumerate() {
        if r == 0 {
            continue;
        }
        let det = lap.view((off[k], off[k]), (r, r)).into_owned().determinant().re;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        total += 0.5 * sign * k as f64 * det.ln();
    }
    total
}

#[test]
fn constant_metric_torsion_matches_log_det_oracle() {
    for (ranks, seed) in [
        (vec![1, 2, 1], 101u64),
        (vec![2, 3, 1], 102),
        (vec![1, 1], 103),
        (vec![1, 3, 3, 1], 104),
    ] {
        let cx = exact_complex(TorusBase::point(), &ranks, seed, 0.0, false).unwrap();
        let value = torsion_form(&cx, 1e-10).unwrap().form.component(Monomial::ONE)[0].re;
        let oracle = log_det_oracle(&cx);
        assert!((value - oracle).abs() < 1e-9, "{ranks:?}: {value} vs {oracle}");
    }
}

#[test]
fn flag_validation() {
    assert!(FiltrationData::new(2, vec![], vec![]).is_err());
    let v1 = CMatrix::from_row_slice(2, 1, &[c64(1.0), c64(1.0)]);
    let bad_nest = FiltrationData::new(
        2,
        vec![v1.clone(), CMatrix::from_row_slice(2, 1, &[c64(1.0), c64(0.0)])],
        vec![one(1.0), one(1.0)],
    );
    assert!(bad_nest.is_err());
    let not_full = FiltrationData::new(2, vec![v1.clone()], vec![one(1.0)]);
    assert!(not_full.is_err());
    let neg = FiltrationData::new(2, vec![v1.clone(), CMatrix::identity(2, 2)], vec![one(1.0), one(-1.0)]);
    assert!(neg.is_err());
    // Last column of the identity is e_2, which complements span(1, 1).
    assert!(FiltrationData::new(2, vec![v1, CMatrix::identity(2, 2)], vec![one(1.0), one(2.0)]).is_ok());
}

#[test]
fn graded_class_trivial_cases() {
    let base = t2(8);
    let bundle = FlatBundleData::new(smooth_metric(base, 2, 91, 0.3, false));
    let flag = FiltrationData::standard_full_flag(2, &[1.0, 1.0]).unwrap();
    let tol = 1e-9;
    let single = graded_torsion_class(&[(0, bundle.clone(), flag.clone())], tol).unwrap();
    let rep = torsion_class_rep(&bundle, &flag, tol).unwrap();
    assert!((&single - &rep).sup_norm() < 1e-15);
    let twice = graded_torsion_class(&[(0, bundle.clone(), flag.clone()), (1, bundle, flag)], tol).unwrap();
    assert!(twice.sup_norm() < 1e-15);
}

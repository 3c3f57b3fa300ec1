use num_complex::Complex64;
use obstrukt::charts::{CatalogEntry, KahlerChart};
use obstrukt::curvature::{
    covariant_derivs, frame_at, laplacian, lichnerowicz, CurvatureError, Geometry, ScalarField, Slot, Tensor,
};
use obstrukt::jets::CJet;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn chart(e: CatalogEntry) -> KahlerChart {
    KahlerChart::new(e).unwrap()
}

/// Point on C^2 with `|z|^2 = s`, spread over both coordinates.
fn burns_point(s: f64, phase: f64) -> [Complex64; 2] {
    let r = s.sqrt();
    [Complex64::from_polar(r * 0.6, phase), Complex64::from_polar(r * 0.8, -0.3 * phase)]
}

#[test]
fn siegel_jacobi_ricci_endomorphism() {
    let sj = chart(CatalogEntry::SiegelJacobi);
    let f = frame_at(&sj, &[c(1.0, 0.0), c(1.0, 0.0)], 6).unwrap();
    let expect = [[0.0, 0.0], [-3.0, -3.0]];
    for a in 0..2 {
        for b in 0..2 {
            assert!((f.ricci_endo[(a, b)] - expect[a][b]).norm() < 1e-12, "{a}{b}: {}", f.ricci_endo[(a, b)]);
        }
    }
    assert!((f.eigenvalues[0] + 3.0).abs() < 1e-12 && f.eigenvalues[1].abs() < 1e-12);
    // off-diagonal entry tracks -3 (z1 + z̄1)/(z2 + z̄2)
    let g = frame_at(&sj, &[c(0.4, 0.7), c(2.5, -1.0)], 6).unwrap();
    assert!((g.ricci_endo[(1, 0)] - (-3.0 * 0.8 / 5.0)).norm() < 1e-12);
}

#[test]
fn flat_and_fubini_study() {
    let f = frame_at(&chart(CatalogEntry::Flat { n: 2 }), &[c(0.3, 0.1), c(-1.0, 2.0)], 4).unwrap();
    assert!(f.ricci.iter().all(|x| x.norm() < 1e-14));
    assert_eq!(f.scalar, 0.0);
    assert_eq!(f.central, 0.0);
    let fs = frame_at(&chart(CatalogEntry::FubiniStudy { n: 1, scale: 1.0 }), &[c(0.0, 0.0)], 4).unwrap();
    assert!((fs.ricci[(0, 0)] - fs.g[(0, 0)] * 2.0).norm() < 1e-14);
    assert!((fs.g[(0, 0)] - 1.0).norm() < 1e-15);
}

#[test]
fn degenerate_metric_is_rejected() {
    let bad = KahlerChart::custom(1, "-z1*conj(z1)", obstrukt::charts::CustomKind::Potential).unwrap();
    assert!(matches!(
        frame_at(&bad, &[c(0.1, 0.0)], 4),
        Err(CurvatureError::DegenerateMetric(_))
    ));
}

#[test]
fn burns_simanca_closed_forms() {
    let bs = chart(CatalogEntry::BurnsSimanca);
    for k in 0..50 {
        let s = 0.05 + 2.0 * k as f64 / 49.0;
        let p = burns_point(s, 0.37 * k as f64);
        let geo = Geometry::from_potential(bs.potential_jet(&p, 8).unwrap()).unwrap();
        let r = geo.scalar_curvature();
        let cc = geo.central_curvature().unwrap();
        let d1 = geo.laplacian(&cc).unwrap();
        let d2 = geo.laplacian(&d1).unwrap();
        let rh = geo.ricci_hessian(&cc).unwrap();
        let t = 1.0 + s;
        assert!(r.value().abs() < 1e-9);
        assert!((cc.value() + t.powi(-4)).abs() < 1e-9);
        assert!((d1.value() - (-12.0 / t.powi(5) + 16.0 / t.powi(6))).abs() < 1e-7);
        let d2_expect = (-240.0 * s + 60.0) / t.powi(7) + (480.0 * s - 96.0) / t.powi(8);
        assert!((d2.value() - d2_expect).abs() < 1e-7, "s={s}: {} vs {d2_expect}", d2.value());
        assert!((rh.value() - (20.0 * s - 4.0) / t.powi(8)).abs() < 1e-7);
    }
    let p = burns_point(1.0, 0.2);
    let lc = lichnerowicz(&ScalarField::Central, &bs, &p, 8).unwrap();
    assert!((lc - 0.15625).abs() < 1e-8, "{lc}");
    let dc = laplacian(&ScalarField::Central, &bs, &p, 8).unwrap();
    assert!((dc + 0.125).abs() < 1e-9);
}

#[test]
fn lc_vanishes_on_the_outer_sphere() {
    let bs = chart(CatalogEntry::BurnsSimanca);
    let s = (4.0 + 10f64.sqrt()) / 6.0;
    let lc = lichnerowicz(&ScalarField::Central, &bs, &burns_point(s, 1.1), 10).unwrap();
    assert!(lc.abs() < 1e-8, "{lc}");
}

#[test]
fn lichnerowicz_requires_constant_scalar_curvature() {
    // |z|^2 + |z|^4 has nonconstant scalar curvature
    let ch = KahlerChart::custom(
        2,
        "exp(z1*conj(z1) + z2*conj(z2) + (z1*conj(z1))^2)",
        obstrukt::charts::CustomKind::BundleMetric,
    )
    .unwrap();
    let err = lichnerowicz(&ScalarField::Central, &ch, &[c(0.3, 0.2), c(0.1, 0.0)], 8).unwrap_err();
    match err {
        CurvatureError::NotConstantScalar { max_grad } => assert!(max_grad > 1e-3),
        e => panic!("unexpected {e}"),
    }
    let k = lichnerowicz(&ScalarField::Constant(2.0), &chart(CatalogEntry::BurnsSimanca), &burns_point(0.5, 0.0), 8)
        .unwrap();
    assert!(k.abs() < 1e-12);
}

#[test]
fn covariant_stack_of_flat_potential() {
    let flat = chart(CatalogEntry::Flat { n: 1 });
    let st = covariant_derivs(&ScalarField::Potential, &flat, &[c(0.4, -0.2)], 2, 6).unwrap();
    assert!((st.get(&[Slot::Hol, Slot::Anti]).unwrap().value(&[0, 0]) - 1.0).norm() < 1e-14);
    assert!(st.get(&[Slot::Hol, Slot::Hol]).unwrap().value(&[0, 0]).norm() < 1e-14);
    let cst = covariant_derivs(&ScalarField::Constant(3.0), &chart(CatalogEntry::BurnsSimanca), &burns_point(0.7, 0.1), 4, 8)
        .unwrap();
    for level in &cst.levels[1..] {
        for t in level {
            assert!(t.max_abs_value() < 1e-14);
        }
    }
}

/// ω_{a,b c̄} - ω_{a,c̄ b} = -g^{d ē} R_{b c̄ a ē} ω_d on the 1-form ω = ∂f.
#[test]
fn ricci_identity_on_one_forms() {
    let bs = chart(CatalogEntry::BurnsSimanca);
    let p = burns_point(0.8, 0.4);
    let geo = Geometry::from_potential(bs.potential_jet(&p, 8).unwrap()).unwrap();
    let f = Tensor::scalar(2, CJet::real(geo.central_curvature().unwrap()));
    let w = geo.covd(&f, Slot::Hol).unwrap();
    let hol_then_anti = geo.covd_chain(&w, &[Slot::Hol, Slot::Anti]).unwrap();
    let anti_then_hol = geo.covd_chain(&w, &[Slot::Anti, Slot::Hol]).unwrap();
    let fr = geo.frame().unwrap();
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for a in 0..2 {
        for b in 0..2 {
            for cc in 0..2 {
                let lhs = hol_then_anti.value(&[a, b, cc]) - anti_then_hol.value(&[a, cc, b]);
                let mut rhs = Complex64::new(0.0, 0.0);
                for d in 0..2 {
                    for e in 0..2 {
                        rhs -= fr.g_inv[(d, e)] * fr.riemann(b, cc, a, e) * w.value(&[d]);
                    }
                }
                worst = worst.max((lhs - rhs).norm());
                scale = scale.max(lhs.norm());
            }
        }
    }
    assert!(scale > 1e-3, "identity must be exercised nontrivially");
    assert!(worst < 1e-10 * (1.0 + scale), "{worst}");
}

#[test]
fn ricci_is_minus_trace_of_riemann() {
    let sj = chart(CatalogEntry::SiegelJacobi);
    let f = frame_at(&sj, &[c(0.3, 0.5), c(1.3, 0.2)], 6).unwrap();
    for mu in 0..2 {
        for nu in 0..2 {
            let mut tr = Complex64::new(0.0, 0.0);
            for a in 0..2 {
                for b in 0..2 {
                    tr += f.g_inv[(a, b)] * f.riemann(mu, nu, a, b);
                }
            }
            assert!((tr + f.ricci[(mu, nu)]).norm() < 1e-12);
        }
    }
}

/// Contracted second Bianchi identity with constant R: g^{a c̄} ∇_a R_{b c̄} = 0.
#[test]
fn bianchi_on_csc_charts() {
    let cases: Vec<(KahlerChart, Vec<Complex64>)> = vec![
        (chart(CatalogEntry::BurnsSimanca), burns_point(0.6, 0.9).to_vec()),
        (chart(CatalogEntry::SiegelJacobi), vec![c(0.2, -0.4), c(0.7, 0.3)]),
        (chart(CatalogEntry::FubiniStudy { n: 2, scale: 1.5 }), vec![c(0.2, 0.1), c(-0.3, 0.5)]),
    ];
    for (ch, p) in cases {
        let geo = Geometry::from_potential(ch.potential_jet(&p, 7).unwrap()).unwrap();
        let ric = Tensor::from_matrix([Slot::Hol, Slot::Anti], geo.ricci());
        let d = geo.covd(&ric, Slot::Hol).unwrap();
        let fr = geo.frame().unwrap();
        let scale = fr.ricci.iter().map(|x| x.norm()).fold(0.0, f64::max);
        for b in 0..2 {
            let mut s = Complex64::new(0.0, 0.0);
            for a in 0..2 {
                for cc in 0..2 {
                    s += fr.g_inv[(a, cc)] * d.value(&[b, cc, a]);
                }
            }
            assert!(s.norm() < 1e-6 * (1.0 + scale), "{}: {s}", ch.label());
        }
    }
}

#[test]
fn central_curvature_two_paths() {
    let sj = chart(CatalogEntry::SiegelJacobi);
    let f = frame_at(&sj, &[c(0.1, 0.2), c(0.9, -0.6)], 6).unwrap();
    assert!(f.central.abs() < 1e-12 && f.central_via_endo.abs() < 1e-12);
    let bs = chart(CatalogEntry::BurnsSimanca);
    let f = frame_at(&bs, &burns_point(0.3, 0.5), 6).unwrap();
    assert!((f.central - f.central_via_endo).abs() < 1e-10 * f.central.abs());
}

fn catalog() -> Vec<KahlerChart> {
    vec![
        chart(CatalogEntry::Flat { n: 2 }),
        chart(CatalogEntry::FubiniStudy { n: 2, scale: 0.7 }),
        chart(CatalogEntry::Ball { n: 2, lambda: -1.5 }),
        chart(CatalogEntry::ProductOfDisks { curvatures: vec![-1.0, 0.5] }),
        chart(CatalogEntry::SiegelJacobi),
        chart(CatalogEntry::BurnsSimanca),
        chart(CatalogEntry::FubiniStudy { n: 3, scale: 2.0 }),
    ]
}

/// Scales a raw sample into the chart's domain.
fn sample_point(ch: &KahlerChart, raw: &[f64]) -> Vec<Complex64> {
    let n = ch.dim();
    let mut p: Vec<Complex64> = (0..n).map(|i| c(raw[2 * i], raw[2 * i + 1])).collect();
    match ch.entry() {
        CatalogEntry::Ball { .. } | CatalogEntry::ProductOfDisks { .. } => {
            for z in p.iter_mut() {
                *z *= 0.45;
            }
        }
        CatalogEntry::SiegelJacobi => p[1].re = 0.2 + p[1].re.abs(),
        CatalogEntry::BurnsSimanca => p[0] += 0.3,
        _ => {}
    }
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn frame_invariants(raw in proptest::collection::vec(-1.0f64..1.0, 6), which in 0usize..7) {
        let ch = &catalog()[which];
        let p = sample_point(ch, &raw);
        let f = frame_at(ch, &p, 5).unwrap();
        let herm = |m: &nalgebra::DMatrix<Complex64>| (m - m.adjoint()).iter().map(|x| x.norm()).fold(0.0, f64::max);
        prop_assert!(herm(&f.g) < 1e-12);
        prop_assert!(herm(&f.ricci) < 1e-10 * (1.0 + f.ricci.norm()));
        let tr: f64 = f.eigenvalues.iter().sum();
        let det: f64 = f.eigenvalues.iter().product();
        let scale = 1.0 + f.scalar.abs() + f.eigenvalues.iter().map(|e| e.abs()).fold(0.0, f64::max);
        prop_assert!((tr - f.scalar).abs() < 1e-10 * scale);
        prop_assert!((det - f.central).abs() < 1e-10 * scale.powi(f.n as i32));
        prop_assert!((f.central - f.central_via_endo).abs() < 1e-10 * scale.powi(f.n as i32));
        for cc in 0..f.n {
            for a in 0..f.n {
                for b in 0..f.n {
                    prop_assert!((f.gamma(cc, a, b) - f.gamma(cc, b, a)).norm() < 1e-10 * (1.0 + f.gamma(cc, a, b).norm()));
                }
            }
        }
        if let Some(e) = ch.constant_ricci_eigenvalues() {
            for (x, y) in e.iter().zip(&f.eigenvalues) {
                prop_assert!((x - y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn swapping_coordinates_preserves_invariants(raw in proptest::collection::vec(-1.0f64..1.0, 4), which in 0usize..6) {
        let ch = &catalog()[which];
        if matches!(ch.entry(), CatalogEntry::SiegelJacobi | CatalogEntry::ProductOfDisks { .. }) {
            // not symmetric under z1 <-> z2 as charts; swap via a custom copy instead
            return Ok(());
        }
        let p = sample_point(ch, &raw);
        let q = vec![p[1], p[0]];
        let a = frame_at(ch, &p, 4).unwrap();
        let b = frame_at(ch, &q, 4).unwrap();
        prop_assert!((a.scalar - b.scalar).abs() < 1e-10 * (1.0 + a.scalar.abs()));
        prop_assert!((a.central - b.central).abs() < 1e-10 * (1.0 + a.central.abs()));
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            prop_assert!((x - y).abs() < 1e-10 * (1.0 + x.abs()));
        }
    }
}

#[test]
fn swapping_labels_of_a_custom_siegel_jacobi() {
    let sj = chart(CatalogEntry::SiegelJacobi);
    let swapped = KahlerChart::custom(
        2,
        "exp((z2+conj(z2))^2/(2*(z1+conj(z1))) - log(z1+conj(z1)))",
        obstrukt::charts::CustomKind::BundleMetric,
    )
    .unwrap();
    let p = [c(0.3, 0.1), c(1.4, -0.2)];
    let a = frame_at(&sj, &p, 5).unwrap();
    let b = frame_at(&swapped, &[p[1], p[0]], 5).unwrap();
    for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
        assert!((x - y).abs() < 1e-10);
    }
    assert!((a.scalar - b.scalar).abs() < 1e-10);
}

use num_complex::Complex64;
use obstrukt::charts::{CatalogEntry, CustomKind, KahlerChart};
use obstrukt::curvature::CurvatureError;
use obstrukt::fefferman::{
    bach_b00_surface, bach_components, bach_from_tables, cotton, identity_checks, identity_suite, k_tensor,
    schouten_derivatives, schouten_derivatives_direct, weyl_components, FIndex, FeffermanError, FeffermanTensors,
    DEFAULT_ORDER,
};
use proptest::prelude::*;

use FIndex::{AntiHol, Hol, Top, Zero};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn chart(e: CatalogEntry) -> KahlerChart {
    KahlerChart::new(e).unwrap()
}

fn product(a: f64, b: f64) -> KahlerChart {
    chart(CatalogEntry::ProductOfDisks { curvatures: vec![a, b] })
}

fn burns_point(s: f64, phase: f64) -> [Complex64; 2] {
    let r = s.sqrt();
    [Complex64::from_polar(r * 0.6, phase), Complex64::from_polar(r * 0.8, -0.3 * phase)]
}

/// Eigenvalues of `K` against the metric, ascending.
fn k_eigenvalues(ch: &KahlerChart, p: &[Complex64]) -> Vec<f64> {
    let kt = k_tensor(ch, p, DEFAULT_ORDER).unwrap();
    let mut ev: Vec<f64> = kt.k_mixed.clone().eigenvalues().unwrap().iter().map(|z| z.re).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

#[test]
fn k_fixtures() {
    // K = ((5a - b)/24, (5b - a)/24) in eigenvalues; Λ is their sum of squares.
    let p = [c(0.1, 0.2), c(-0.3, 0.05)];
    let kt = k_tensor(&product(-2.0, -2.0), &p, DEFAULT_ORDER).unwrap();
    for a in 0..2 {
        for b in 0..2 {
            assert!((kt.k[(a, b)] + kt.frame.g[(a, b)] / 3.0).norm() < 1e-12);
        }
    }
    assert!((kt.lambda - 2.0 / 9.0).abs() < 1e-12);

    let ev = k_eigenvalues(&product(0.0, -3.0), &p);
    assert!((ev[0] + 0.625).abs() < 1e-12 && (ev[1] - 0.125).abs() < 1e-12, "{ev:?}");
    let kt = k_tensor(&product(0.0, -3.0), &p, DEFAULT_ORDER).unwrap();
    assert!((kt.lambda - 13.0 / 32.0).abs() < 1e-12);

    // Siegel-Jacobi has the same eigenvalue data at every point.
    let sj = chart(CatalogEntry::SiegelJacobi);
    let ev = k_eigenvalues(&sj, &[c(0.4, -0.7), c(1.6, 0.3)]);
    assert!((ev[0] + 0.625).abs() < 1e-10 && (ev[1] - 0.125).abs() < 1e-10, "{ev:?}");

    let flat = k_tensor(&chart(CatalogEntry::Flat { n: 2 }), &p, DEFAULT_ORDER).unwrap();
    assert!(flat.k.iter().all(|z| z.norm() < 1e-14) && flat.lambda.abs() < 1e-14);
}

#[test]
fn bach_fixtures() {
    let p = [c(0.2, -0.1), c(0.05, 0.3)];
    let kt = k_tensor(&product(-2.0, -2.0), &p, DEFAULT_ORDER).unwrap();
    let b = bach_components(&kt);
    assert!(b.b00.norm() < 1e-12, "{}", b.b00);
    assert!(bach_b00_surface(&kt).unwrap().abs() < 1e-12);

    let kt = k_tensor(&product(0.0, -3.0), &p, DEFAULT_ORDER).unwrap();
    assert!((kt.k_cubed_trace + 0.2421875).abs() < 1e-12);
    let b = bach_components(&kt);
    assert!((b.b00 - c(-1.125, 0.0)).norm() < 1e-12, "{}", b.b00);
    assert!((bach_b00_surface(&kt).unwrap() + 1.125).abs() < 1e-12);
    assert_eq!(b.b0_top, c(0.0, 0.0));
    let t = bach_from_tables(&kt).unwrap();
    assert!((t.b00 - b.b00).norm() < 1e-10);
    assert!(t.b0_top.norm() < 1e-12);
}

#[test]
fn constant_eigenvalues_have_vanishing_cotton_lambda_column() {
    let kt = k_tensor(&product(0.5, -1.0), &[c(0.1, 0.1), c(0.2, -0.4)], DEFAULT_ORDER).unwrap();
    let ct = cotton(&kt);
    for k in FIndex::all(2) {
        assert!(ct.get(&[Zero, Zero, k]).norm() < 1e-12);
    }
    let dp = schouten_derivatives(&kt);
    for k in FIndex::all(2) {
        assert!(dp.get(&[Zero, Zero, k]).norm() < 1e-12);
    }
}

#[test]
fn burns_simanca_cotton_gradient() {
    // With R = 0, Λ = -C/8 = 1/(8 (1+s)^4), so ∂_a Λ = -z̄_a / (2 (1+s)^5).
    let bs = chart(CatalogEntry::BurnsSimanca);
    let p = burns_point(1.0, 0.7);
    let kt = k_tensor(&bs, &p, DEFAULT_ORDER).unwrap();
    assert!((kt.lambda - 1.0 / 128.0).abs() < 1e-12);
    let ct = cotton(&kt);
    for a in 0..2 {
        let grad = -p[a].conj() / (2.0 * 32.0);
        assert!((kt.grad_lambda[a] - grad).norm() < 1e-12);
        assert!((ct.get(&[Zero, Zero, Hol(a)]) - grad * 0.5).norm() < 1e-12);
        assert!((ct.get(&[Zero, Zero, AntiHol(a)]) - grad.conj() * 0.5).norm() < 1e-12);
    }
    for idx in ct.indices() {
        if idx.contains(&Top) {
            assert_eq!(ct.get(&idx), c(0.0, 0.0));
        }
    }
}

#[test]
fn schouten_derivative_two_path_is_exercised() {
    let bs = chart(CatalogEntry::BurnsSimanca);
    let kt = k_tensor(&bs, &burns_point(0.8, 1.9), DEFAULT_ORDER).unwrap();
    let lit = schouten_derivatives(&kt);
    let direct = schouten_derivatives_direct(&kt);
    let mut scale = 0.0f64;
    for a in 0..2 {
        for b in 0..2 {
            for g in 0..2 {
                let idx = [Hol(a), AntiHol(b), Hol(g)];
                scale = scale.max(lit.get(&idx).norm());
                assert!((lit.get(&idx) - direct.get(&idx)).norm() < 1e-10);
            }
        }
    }
    assert!(scale > 1e-3, "∇K must be nonzero here");
    assert!(lit.max_abs_diff(&direct) < 1e-10);
}

#[test]
fn weyl_closed_forms() {
    let bs = chart(CatalogEntry::BurnsSimanca);
    let kt = k_tensor(&bs, &burns_point(0.5, 0.3), DEFAULT_ORDER).unwrap();
    let w = weyl_components(&kt);
    for a in 0..2 {
        for b in 0..2 {
            for g in 0..2 {
                for d in 0..2 {
                    assert_eq!(w.get([Hol(a), Hol(b), AntiHol(g), AntiHol(d)]), Some(c(0.0, 0.0)));
                    let v = w.get([Hol(a), AntiHol(b), Hol(g), AntiHol(d)]).unwrap();
                    let swapped = w.get([Hol(g), AntiHol(b), Hol(a), AntiHol(d)]).unwrap();
                    assert!((v - swapped).norm() < 1e-12);
                }
            }
        }
    }
    // Pair symmetry reaches W_{β̄ 0 0 α} from W_{α 0 0 β̄}.
    let x = w.get([Hol(0), Zero, Zero, AntiHol(1)]).unwrap();
    assert_eq!(w.get([AntiHol(1), Zero, Zero, Hol(0)]), Some(x));
    assert_eq!(w.get([Zero, AntiHol(1), Hol(0), Zero]), Some(x));
}

fn assert_suite(ch: &KahlerChart, count: usize) {
    let pts = ch.sample_points(count);
    assert_eq!(pts.len(), count);
    let checks = identity_suite(ch, &pts, DEFAULT_ORDER).unwrap();
    assert!(checks.len() >= 20);
    for chk in &checks {
        let tol = if chk.name.starts_with("bach-b00") { 1e-8 } else { 1e-7 };
        assert!(chk.residual < tol, "{}: {} = {:e}", ch.label(), chk.name, chk.residual);
    }
}

#[test]
fn identity_suite_on_csc_charts() {
    for ch in [
        chart(CatalogEntry::BurnsSimanca),
        product(-2.0, -2.0),
        product(0.0, -3.0),
        chart(CatalogEntry::FubiniStudy { n: 2, scale: 2.5 }),
        chart(CatalogEntry::SiegelJacobi),
    ] {
        assert_suite(&ch, 50);
    }
}

#[test]
fn identity_suite_in_three_dimensions() {
    assert_suite(&chart(CatalogEntry::Ball { n: 3, lambda: -2.0 }), 5);
    assert_suite(&chart(CatalogEntry::ProductOfDisks { curvatures: vec![-1.0, 0.5, 2.0] }), 5);
}

#[test]
fn preconditions() {
    let bs = chart(CatalogEntry::BurnsSimanca);
    let p = burns_point(1.0, 0.0);
    assert!(matches!(
        k_tensor(&bs, &p, 5),
        Err(FeffermanError::DerivativeShortfall { needed: 6, have: 5 })
    ));
    let bumpy = KahlerChart::custom(2, "z1*conj(z1) + (z1*conj(z1))^2 + z2*conj(z2)", CustomKind::Potential).unwrap();
    assert!(matches!(
        k_tensor(&bumpy, &[c(0.3, 0.1), c(0.2, 0.0)], 8),
        Err(FeffermanError::Curvature(CurvatureError::NotConstantScalar { .. }))
    ));
    let ball3 = chart(CatalogEntry::Ball { n: 3, lambda: -1.0 });
    let kt = k_tensor(&ball3, &[c(0.1, 0.0), c(0.0, 0.1), c(0.2, 0.0)], 6).unwrap();
    assert!(matches!(bach_b00_surface(&kt), Err(FeffermanError::SurfaceOnly(3))));
}

#[test]
fn json_dump_lists_nonzero_entries() {
    let kt = k_tensor(&product(0.0, -3.0), &[c(0.1, 0.0), c(0.0, 0.2)], DEFAULT_ORDER).unwrap();
    let v = serde_json::to_value(FeffermanTensors::new(&kt)).unwrap();
    assert_eq!(v["n"], 2);
    let p = &v["schouten"]["entries"];
    assert_eq!(v["schouten"]["rank"], 2);
    let top = p.as_array().unwrap().iter().find(|e| e["indices"] == serde_json::json!(["5", "5"])).unwrap();
    assert_eq!(top["re"], 1.0);
    assert!(v["weyl"].as_array().unwrap().len() > 10);
    assert!((v["bach"]["b00"][0].as_f64().unwrap() + 1.125).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bach_paths_agree_on_products(a in -3.0f64..1.0, b in -3.0f64..1.0, x in -0.3f64..0.3, y in -0.3f64..0.3) {
        let kt = k_tensor(&product(a, b), &[c(x, y), c(y, -x)], DEFAULT_ORDER).unwrap();
        let closed = bach_components(&kt);
        prop_assert!((closed.b00.re - bach_b00_surface(&kt).unwrap()).abs() < 1e-10);
        let diff = closed.max_abs_diff(&bach_from_tables(&kt).unwrap());
        prop_assert!(diff.iter().all(|d| *d < 1e-10), "{:?}", diff);
        for chk in identity_checks(&kt).unwrap() {
            prop_assert!(chk.residual < 1e-9, "{} = {:e}", chk.name, chk.residual);
        }
    }
}

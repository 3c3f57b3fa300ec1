use num_complex::Complex64;
use obstrukt::charts::{real_base, CatalogEntry, ChartError, ChartSpec, CustomKind, KahlerChart};
use obstrukt::curvature::Geometry;
use obstrukt::jets::Jet;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn catalog() -> Vec<KahlerChart> {
    [
        CatalogEntry::Flat { n: 2 },
        CatalogEntry::FubiniStudy { n: 2, scale: 2.5 },
        CatalogEntry::FubiniStudy { n: 3, scale: 1.0 },
        CatalogEntry::Ball { n: 2, lambda: -3.0 },
        CatalogEntry::SpaceFormDisk { curvature: 0.5 },
        CatalogEntry::ProductOfDisks { curvatures: vec![-2.0, 0.0, 0.5] },
        CatalogEntry::SiegelJacobi,
        CatalogEntry::BurnsSimanca,
    ]
    .into_iter()
    .map(|e| KahlerChart::new(e).unwrap())
    .collect()
}

#[test]
fn siegel_jacobi_potential() {
    let ch = KahlerChart::new(CatalogEntry::SiegelJacobi).unwrap();
    let p = [c(0.0, 0.0), c(1.0, 0.0)];
    let j = ch.potential_jet(&p, 2).unwrap();
    assert!((j.value() + 2f64.ln()).abs() < 1e-15);
    // d²/dx1² of (2 x1)² / (4 x2) at x2 = 1
    assert!((j.derivative(&[2, 0, 0, 0]) - 2.0).abs() < 1e-14);
}

#[test]
fn burns_simanca_jet_against_log_series() {
    let ch = KahlerChart::new(CatalogEntry::BurnsSimanca).unwrap();
    let p = [c(1.0, 0.0), c(0.0, 0.0)];
    let jet = ch.potential_jet(&p, 4).unwrap();
    // t = |z|² = 1 + u, log t = u - u²/2 + u³/3 - u⁴/4
    let v = Jet::variables(&real_base(&p), 4).unwrap();
    let u = v.iter().map(|x| x * x).fold(v[0].zero_like(), |a, b| a + b) - 1.0;
    let mut log = u.zero_like();
    let mut power = u.constant_like(1.0);
    for k in 1..=4 {
        power = &power * &u;
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        log = log + &power * (sign / k as f64);
    }
    let oracle = u + 1.0 + log;
    assert!(jet.max_abs_diff(&oracle) < 1e-14);
}

#[test]
fn levi_form_positive_on_sample_grids() {
    for ch in catalog() {
        for p in ch.sample_points(20) {
            assert!(ch.contains(&p), "{}: {p:?}", ch.label());
            let geo = Geometry::from_potential(ch.potential_jet(&p, 4).unwrap());
            assert!(geo.is_ok(), "{} at {p:?}: {:?}", ch.label(), geo.err());
        }
    }
}

#[test]
fn lower_orders_are_truncations() {
    for ch in catalog() {
        let p = &ch.sample_points(3)[2];
        for k in 0..8 {
            let lo = ch.potential_jet(p, k).unwrap();
            let hi = ch.potential_jet(p, k + 1).unwrap();
            assert_eq!(lo.coeffs(), hi.truncate(k).coeffs(), "{} at order {k}", ch.label());
        }
    }
}

#[test]
fn bundle_metric_values() {
    let fs = KahlerChart::new(CatalogEntry::FubiniStudy { n: 1, scale: 3.0 }).unwrap();
    assert_eq!(fs.bundle_metric_value(&[c(0.0, 0.0)]).unwrap(), 1.0);
    assert!((fs.bundle_metric_value(&[c(0.6, 0.8)]).unwrap() - 8.0).abs() < 1e-13);
    // (1 - |z|²)^{m/λ} with m = n + 1
    let ball = KahlerChart::new(CatalogEntry::Ball { n: 2, lambda: -3.0 }).unwrap();
    assert_eq!(ball.bundle_metric_value(&[c(0.0, 0.0), c(0.0, 0.0)]).unwrap(), 1.0);
    let h = ball.bundle_metric_value(&[c(0.3, 0.0), c(0.0, -0.4)]).unwrap();
    assert!((h - 0.75f64.powf(-1.0)).abs() < 1e-14);
    let flat = KahlerChart::new(CatalogEntry::Flat { n: 2 }).unwrap();
    let h = flat.bundle_metric_value(&[c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
    assert!((h - std::f64::consts::E).abs() < 1e-15);

    let pot = KahlerChart::custom(1, "log(1 + z1*conj(z1))", CustomKind::Potential).unwrap();
    assert!(matches!(pot.bundle_metric_value(&[c(0.1, 0.0)]), Err(ChartError::UnsupportedForBundle(_))));
    let bundle = KahlerChart::custom(1, "1 + z1*conj(z1)", CustomKind::BundleMetric).unwrap();
    assert!((bundle.bundle_metric_value(&[c(0.6, 0.8)]).unwrap() - 2.0).abs() < 1e-15);
}

#[test]
fn custom_expressions_match_catalog() {
    let p = [c(0.4, -0.2), c(0.1, 0.5)];
    let cases = [
        ("z1*conj(z1) + z2*conj(z2) + log(z1*conj(z1) + z2*conj(z2))", CatalogEntry::BurnsSimanca),
        ("2.5*log(1 + z1*conj(z1) + z2*conj(z2))", CatalogEntry::FubiniStudy { n: 2, scale: 2.5 }),
        ("(z1 + conj(z1))^2/(2*(z2 + conj(z2))) - log(z2 + conj(z2))", CatalogEntry::SiegelJacobi),
    ];
    for (src, entry) in cases {
        let custom = KahlerChart::custom(2, src, CustomKind::Potential).unwrap();
        let cat = KahlerChart::new(entry).unwrap();
        let q = if matches!(cat.entry(), CatalogEntry::SiegelJacobi) { [p[0], c(0.8, 0.3)] } else { p };
        let d = custom.potential_jet(&q, 6).unwrap().max_abs_diff(&cat.potential_jet(&q, 6).unwrap());
        assert!(d < 1e-12, "{src}: {d:e}");
    }
}

#[test]
fn domain_and_parse_errors() {
    let bs = KahlerChart::new(CatalogEntry::BurnsSimanca).unwrap();
    assert!(matches!(bs.potential_jet(&[c(0.0, 0.0), c(0.0, 0.0)], 2), Err(ChartError::OutOfDomain { .. })));
    assert!(matches!(bs.potential_jet(&[c(0.5, 0.0)], 2), Err(ChartError::DimensionMismatch { expected: 2, got: 1, .. })));
    let ball = KahlerChart::new(CatalogEntry::Ball { n: 1, lambda: -2.0 }).unwrap();
    assert!(!ball.contains(&[c(0.8, 0.7)]));
    assert!(KahlerChart::new(CatalogEntry::FubiniStudy { n: 1, scale: -1.0 }).is_err());
    assert!(matches!(KahlerChart::custom(1, "z1*conj(z1", CustomKind::Potential), Err(ChartError::Parse { .. })));
    assert!(matches!(KahlerChart::custom(1, "z2", CustomKind::Potential), Err(ChartError::Parse { .. })));
    let complex = KahlerChart::custom(1, "z1", CustomKind::Potential).unwrap();
    assert!(matches!(complex.potential_jet(&[c(0.1, 0.2)], 1), Err(ChartError::NotReal(_))));
}

#[test]
fn config_tree_round_trip() {
    let spec: ChartSpec = serde_json::from_str(r#"{"kind": "custom", "n": 1, "bundle_metric": "exp(z1*conj(z1))"}"#).unwrap();
    let back: ChartSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
    assert_eq!(spec, back);
    assert!(spec.build().unwrap().has_bundle_metric());
    assert!(serde_json::from_str::<ChartSpec>(r#"{"kind": "custom", "n": 1}"#).unwrap().build().is_err());
    assert!(serde_json::from_str::<ChartSpec>(r#"{"kind": "flat", "n": 1, "extra": 0}"#).is_err());
}

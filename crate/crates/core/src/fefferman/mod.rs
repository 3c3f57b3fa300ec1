//! Tensors of the Fefferman space of a circle bundle over a Kähler base with
//! constant scalar curvature, in the adapted frame
//! `(X_0, X_1..X_n, X_1̄..X_n̄, X_{2n+1})`.
//!
//! Every component is S¹-invariant and reduces to curvature of the base, so
//! each table is evaluated from a base point; the Lorentzian metric is never
//! built as a manifold.

mod bach;
mod index;
mod ktensor;
mod tables;

pub use bach::{bach_b00_surface, bach_components, bach_from_tables, BachComponents};
pub use index::{FIndex, Table};
pub use ktensor::KTensor;
pub use tables::{
    christoffel_table, cotton, cotton_from_schouten, covariant_derivative, fefferman_metric,
    fefferman_metric_inverse, raise_pair, schouten, schouten_derivatives, schouten_derivatives_direct,
    schouten_upper, weyl_components, weyl_trace_residual, WeylComponents,
};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::charts::{ChartError, KahlerChart};
use crate::curvature::{self, CurvatureError, Geometry};
use crate::jets::{complex_partial, JetError, Wirtinger};

/// Potential jet order needed for `∇∇K` and `ΔΛ`.
pub const MIN_ORDER: usize = 6;

/// Jet order used when callers do not ask for one.
pub const DEFAULT_ORDER: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FeffermanError {
    #[error(transparent)]
    Curvature(#[from] CurvatureError),
    #[error(transparent)]
    Chart(#[from] ChartError),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("jet order {have} is too low; {needed} needed")]
    DerivativeShortfall { needed: usize, have: usize },
    #[error("the surface formula needs n = 2, got n = {0}")]
    SurfaceOnly(usize),
    #[error("{tensor} component {indices:?} has no closed form")]
    MissingComponent { tensor: &'static str, indices: Vec<String> },
}

/// Residual of one identity; zero up to rounding when the identity holds.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub residual: f64,
}

impl IdentityCheck {
    pub fn new(name: &'static str, residual: f64) -> IdentityCheck {
        IdentityCheck { name, residual }
    }
}

/// K data at `p`, after confirming constant scalar curvature.
pub fn k_tensor(chart: &KahlerChart, p: &[Complex64], order: usize) -> Result<KTensor, FeffermanError> {
    if order < MIN_ORDER {
        return Err(FeffermanError::DerivativeShortfall {
            needed: MIN_ORDER,
            have: order,
        });
    }
    let geo = Geometry::from_potential(chart.potential_jet(p, order)?)?;
    curvature::assert_csc(chart, &geo)?;
    KTensor::from_geometry(&geo)
}

fn max_entry(t: &Table, f: impl Fn(&[FIndex]) -> Complex64) -> f64 {
    t.indices().iter().map(|i| f(i).norm()).fold(0.0, f64::max)
}

/// `D𝗀 = 0` with `X_c 𝗀_{α β̄}` taken from the metric jets.
fn metric_compatibility(kt: &KTensor) -> Result<f64, FeffermanError> {
    use FIndex::{AntiHol, Hol};
    let n = kt.n;
    let mut xg = Table::zeros(n, 3);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let hol = complex_partial(&kt.jets.g[a][b], Wirtinger::Z(c))?.value() * 0.5;
                let anti = complex_partial(&kt.jets.g[a][b], Wirtinger::ZBar(c))?.value() * 0.5;
                xg.set(&[Hol(a), AntiHol(b), Hol(c)], hol);
                xg.set(&[AntiHol(b), Hol(a), Hol(c)], hol);
                xg.set(&[Hol(a), AntiHol(b), AntiHol(c)], anti);
                xg.set(&[AntiHol(b), Hol(a), AntiHol(c)], anti);
            }
        }
    }
    Ok(covariant_derivative(&christoffel_table(kt), &fefferman_metric(kt), &xg).max_abs())
}

/// Every identity the frame tables must satisfy at this point: the K
/// identities, consistency of the metric, Christoffel, Schouten and Cotton
/// tables, Weyl trace-freeness, and agreement of the Bach components
/// computed from closed forms and from the tables.
pub fn identity_checks(kt: &KTensor) -> Result<Vec<IdentityCheck>, FeffermanError> {
    let n = kt.n;
    let mut checks = kt.lemma_checks();

    let g = fefferman_metric(kt);
    let g_inv = fefferman_metric_inverse(kt);
    let all = FIndex::all(n);
    let inverse = max_entry(&g, |idx| {
        let delta = if idx[0] == idx[1] { 1.0 } else { 0.0 };
        all.iter().map(|&k| g.get(&[idx[0], k]) * g_inv.get(&[k, idx[1]])).sum::<Complex64>() - delta
    });
    checks.push(IdentityCheck::new("fefferman-metric-inverse", inverse));

    let p = schouten(kt);
    let p_up = schouten_upper(kt);
    checks.push(IdentityCheck::new("schouten-raised", raise_pair(&p, &g_inv).max_abs_diff(&p_up)));
    checks.push(IdentityCheck::new(
        "schouten-symmetric",
        max_entry(&p, |idx| p.get(idx) - p.get(&[idx[1], idx[0]])),
    ));

    let gamma = christoffel_table(kt);
    checks.push(IdentityCheck::new("christoffel-metric-compatible", metric_compatibility(kt)?));
    checks.push(IdentityCheck::new(
        "christoffel-conjugation",
        max_entry(&gamma, |idx| {
            let c: Vec<FIndex> = idx.iter().map(|i| i.conj()).collect();
            gamma.get(&c) - gamma.get(idx).conj()
        }),
    ));

    let dp = schouten_derivatives(kt);
    let dp_direct = schouten_derivatives_direct(kt);
    checks.push(IdentityCheck::new("schouten-derivative-two-path", dp.max_abs_diff(&dp_direct)));

    let c = cotton(kt);
    checks.push(IdentityCheck::new("cotton-two-path", c.max_abs_diff(&cotton_from_schouten(&dp_direct))));
    checks.push(IdentityCheck::new(
        "cotton-antisymmetric",
        max_entry(&c, |idx| c.get(idx) + c.get(&[idx[0], idx[2], idx[1]])),
    ));

    let w = weyl_components(kt);
    checks.push(IdentityCheck::new("weyl-trace", weyl_trace_residual(kt, &w)?));

    let closed = bach_components(kt);
    let [b00, b_ab, b0a, b0_top] = closed.max_abs_diff(&bach_from_tables(kt)?);
    checks.push(IdentityCheck::new("bach-tables-b00", b00));
    checks.push(IdentityCheck::new("bach-tables-b-ab", b_ab));
    checks.push(IdentityCheck::new("bach-tables-b0a", b0a));
    checks.push(IdentityCheck::new("bach-tables-b0-top", b0_top));
    if n == 2 {
        checks.push(IdentityCheck::new(
            "bach-b00-surface",
            (closed.b00.re - bach_b00_surface(kt)?).abs(),
        ));
    }
    Ok(checks)
}

/// Largest residual of each identity over `points`, evaluated in parallel.
pub fn identity_suite(
    chart: &KahlerChart,
    points: &[Vec<Complex64>],
    order: usize,
) -> Result<Vec<IdentityCheck>, FeffermanError> {
    let per_point: Vec<Vec<IdentityCheck>> = points
        .par_iter()
        .map(|p| identity_checks(&k_tensor(chart, p, order)?))
        .collect::<Result<_, _>>()?;
    let mut iter = per_point.into_iter();
    let Some(mut worst) = iter.next() else {
        return Ok(Vec::new());
    };
    for checks in iter {
        for (w, c) in worst.iter_mut().zip(checks) {
            debug_assert_eq!(w.name, c.name);
            w.residual = w.residual.max(c.residual);
        }
    }
    Ok(worst)
}

/// All frame tables at one point, for JSON export.
#[derive(Clone, Debug, Serialize)]
pub struct FeffermanTensors {
    pub n: usize,
    pub scalar_curvature: f64,
    /// `K_{α β̄}` as `k[α][β]`.
    pub k: Vec<Vec<Complex64>>,
    pub lambda: f64,
    pub metric: Table,
    pub metric_inverse: Table,
    pub christoffel: Table,
    pub schouten: Table,
    pub schouten_upper: Table,
    pub schouten_derivatives: Table,
    pub cotton: Table,
    pub weyl: WeylComponents,
    pub bach: BachComponents,
}

impl FeffermanTensors {
    pub fn new(kt: &KTensor) -> FeffermanTensors {
        FeffermanTensors {
            n: kt.n,
            scalar_curvature: kt.scalar(),
            k: (0..kt.n).map(|a| (0..kt.n).map(|b| kt.k[(a, b)]).collect()).collect(),
            lambda: kt.lambda,
            metric: fefferman_metric(kt),
            metric_inverse: fefferman_metric_inverse(kt),
            christoffel: christoffel_table(kt),
            schouten: schouten(kt),
            schouten_upper: schouten_upper(kt),
            schouten_derivatives: schouten_derivatives(kt),
            cotton: cotton(kt),
            weyl: weyl_components(kt),
            bach: bach_components(kt),
        }
    }
}

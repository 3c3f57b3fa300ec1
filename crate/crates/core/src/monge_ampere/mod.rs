//! The disk-bundle potential `u = (G H)^{-1/(m+1)} φ(X)`, `X = |ξ| H^{1/2}`,
//! and checks that it solves Fefferman's equation `J(u) = 1` and that
//! `-log u` is Kähler–Einstein.
//!
//! `J(u) = (-1)^m det [[u, u_k̄], [u_j, u_{j k̄}]]` with `m` the total complex
//! dimension (base plus fiber).

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::charts::{real_base, ChartError, KahlerChart};
use crate::curvature::linalg::{det as jet_det, min_hermitian_eigenvalue, values};
use crate::curvature::{ddbar, frame_at, CurvatureError, Geometry};
use crate::jets::{complex_partial, CJet, Jet, JetError, Wirtinger};
use crate::ke_ode::{KeError, RadialSolution};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MaError {
    #[error(transparent)]
    Chart(#[from] ChartError),
    #[error(transparent)]
    Curvature(#[from] CurvatureError),
    #[error(transparent)]
    Ke(#[from] KeError),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("u = {0} is not positive")]
    NonPositive(f64),
    #[error("bordered determinant {bordered} and u^(m+1) det(-log u) {log_form} disagree")]
    FormsDisagree { bordered: f64, log_form: f64 },
    #[error("Ricci eigenvalues vary by {spread:e} over the sample grid (worst at {worst:?})")]
    EigenvalueSpread { spread: f64, worst: Vec<Complex64> },
    #[error("chart has dimension {got}, the solution needs {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("X = {0} is outside the allowed range")]
    XOutOfRange(f64),
}

/// Holomorphic first derivatives, Levi matrix and value of a real jet.
fn complex_derivatives(u: &Jet) -> Result<(f64, Vec<Complex64>, DMatrix<Complex64>), MaError> {
    let m = u.nvars() / 2;
    let cu = CJet::real(u.clone());
    let d: Vec<CJet> = (0..m).map(|j| complex_partial(&cu, Wirtinger::Z(j))).collect::<Result<_, _>>()?;
    let grad: Vec<Complex64> = d.iter().map(CJet::value).collect();
    let mut levi = DMatrix::zeros(m, m);
    for (j, dj) in d.iter().enumerate() {
        for k in 0..m {
            levi[(j, k)] = complex_partial(dj, Wirtinger::ZBar(k))?.value();
        }
    }
    Ok((u.value(), grad, levi))
}

/// The `(m+1) × (m+1)` bordered matrix `[[u, u_k̄], [u_j, u_{j k̄}]]`.
pub fn bordered_matrix(u: &Jet) -> Result<DMatrix<Complex64>, MaError> {
    let (v, grad, levi) = complex_derivatives(u)?;
    let m = grad.len();
    let mut b = DMatrix::zeros(m + 1, m + 1);
    b[(0, 0)] = Complex64::new(v, 0.0);
    for j in 0..m {
        b[(0, j + 1)] = grad[j].conj();
        b[(j + 1, 0)] = grad[j];
        for k in 0..m {
            b[(j + 1, k + 1)] = levi[(j, k)];
        }
    }
    Ok(b)
}

/// Both forms of `J(u)`: the bordered determinant and `u^{m+1} det((-log u)_{j k̄})`.
pub fn j_forms(u: &Jet) -> Result<(f64, f64), MaError> {
    let v = u.value();
    if !(v > 0.0) {
        return Err(MaError::NonPositive(v));
    }
    let (_, grad, levi) = complex_derivatives(u)?;
    let m = grad.len();
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    let bordered = sign * bordered_matrix(u)?.determinant().re;
    let log_hessian = DMatrix::from_fn(m, m, |j, k| -levi[(j, k)] / v + grad[j] * grad[k].conj() / (v * v));
    let log_form = v.powi(m as i32 + 1) * log_hessian.determinant().re;
    Ok((bordered, log_form))
}

/// `J(u)` at the jet's base point; cross-checked against the logarithmic form.
pub fn j_operator(u: &Jet) -> Result<f64, MaError> {
    let (bordered, log_form) = j_forms(u)?;
    // Hadamard's bound is the natural size of the determinant.
    let b = bordered_matrix(u)?;
    let hadamard: f64 = b.row_iter().map(|r| r.norm()).product();
    if (bordered - log_form).abs() > 1e-10 * bordered.abs().max(log_form.abs()).max(hadamard) {
        return Err(MaError::FormsDisagree { bordered, log_form });
    }
    Ok(bordered)
}

/// A point `(z, ξ)` of the disk bundle, with `X = |ξ| H(z)^{1/2}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiskBundlePoint {
    pub z: Vec<Complex64>,
    pub xi: Complex64,
    pub x: f64,
}

impl DiskBundlePoint {
    pub fn new(chart: &KahlerChart, z: Vec<Complex64>, xi: Complex64) -> Result<DiskBundlePoint, MaError> {
        let h = chart.bundle_metric_value(&z)?;
        let x = xi.norm() * h.sqrt();
        Ok(DiskBundlePoint { z, xi, x })
    }

    /// The point over `z` with the given `X` and fiber phase.
    pub fn with_radius(chart: &KahlerChart, z: Vec<Complex64>, x: f64, phase: f64) -> Result<DiskBundlePoint, MaError> {
        let h = chart.bundle_metric_value(&z)?;
        let xi = Complex64::from_polar(x / h.sqrt(), phase);
        Ok(DiskBundlePoint { z, xi, x })
    }

    /// All `m` complex coordinates, fiber last.
    pub fn coords(&self) -> Vec<Complex64> {
        let mut w = self.z.clone();
        w.push(self.xi);
        w
    }
}

/// `u` on the disk bundle of a chart with constant Ricci eigenvalues.
#[derive(Clone, Debug)]
pub struct PotentialU {
    chart: KahlerChart,
    sol: RadialSolution,
}

/// Largest allowed spread of the Ricci eigenvalues over the sample grid.
pub const EIGENVALUE_SPREAD_TOL: f64 = 1e-6;
const SPREAD_SAMPLES: usize = 8;

pub fn assemble_u(chart: &KahlerChart, sol: &RadialSolution) -> Result<PotentialU, MaError> {
    let n = sol.m() - 1;
    if chart.dim() != n {
        return Err(MaError::DimensionMismatch { expected: n, got: chart.dim() });
    }
    if !chart.has_bundle_metric() {
        return Err(ChartError::UnsupportedForBundle(chart.label().to_string()).into());
    }
    let want = &sol.poly.eigenvalues;
    let mut spread = 0.0f64;
    let mut worst = Vec::new();
    for p in chart.sample_points(SPREAD_SAMPLES) {
        let eigs = frame_at(chart, &p, 4)?.eigenvalues;
        let d = eigs.iter().zip(want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if d > spread || worst.is_empty() {
            spread = spread.max(d);
            worst = p;
        }
    }
    if spread >= EIGENVALUE_SPREAD_TOL {
        return Err(MaError::EigenvalueSpread { spread, worst });
    }
    Ok(PotentialU { chart: chart.clone(), sol: sol.clone() })
}

/// Residuals of the determinant identity at one point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DetIdentityResidual {
    /// Direct `det((-log u)_{i j̄})` against `P(Y) Y' H G / (2^{m+1} X)`.
    pub det: f64,
    /// Entrywise block formulas against direct jets.
    pub blocks: f64,
}

/// One row of a residual report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KeRow {
    pub point: DiskBundlePoint,
    pub j: f64,
    pub j_err: f64,
    pub ke_err: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KeReport {
    pub rows: Vec<KeRow>,
    pub max_j_err: f64,
    pub max_ke_err: f64,
}

impl PotentialU {
    pub fn chart(&self) -> &KahlerChart {
        &self.chart
    }

    pub fn solution(&self) -> &RadialSolution {
        &self.sol
    }

    pub fn m(&self) -> usize {
        self.sol.m()
    }

    /// `Y = 1/Z(X) = 2/(m+1) - X φ'/φ`.
    pub fn y_value(&self, x: f64) -> f64 {
        1.0 / self.sol.z(x)
    }

    /// `Y'/X`, through `dZ/dt` so it is defined on the fiber axis.
    pub fn y_slope_over_x(&self, x: f64) -> Result<f64, MaError> {
        let z = self.sol.z_jet_in_square(x * x, 1)?;
        Ok(-2.0 * z.coeffs()[1] / (z.value() * z.value()))
    }

    fn check_x(&self, p: &DiskBundlePoint) -> Result<(), MaError> {
        if !(p.x >= 0.0 && p.x < 1.0) {
            return Err(MaError::XOutOfRange(p.x));
        }
        Ok(())
    }

    pub fn u(&self, p: &DiskBundlePoint) -> Result<f64, MaError> {
        Ok(self.u_jet(p, 0)?.value())
    }

    /// Jet of `u` in all `m` complex variables (fiber last).
    pub fn u_jet(&self, p: &DiskBundlePoint, order: usize) -> Result<Jet, MaError> {
        self.check_x(p)?;
        let m = self.m();
        let base = real_base(&p.coords());
        let log_h_base = self.chart.log_bundle_metric_jet(&p.z, order + 2)?;
        let g_det = jet_det(&ddbar(&log_h_base)?).re.truncate(order);
        let log_h = log_h_base.truncate(order).embed(&base)?;
        let log_g = g_det.ln()?.embed(&base)?;
        let vars = Jet::variables(&base, order)?;
        let (xr, xi) = (&vars[2 * m - 2], &vars[2 * m - 1]);
        let t = (xr * xr + xi * xi) * &log_h.exp();
        let phi = self.sol.phi_jet_in_square(p.x * p.x, order)?;
        let phi_t = t.compose_series(phi.coeffs(), p.x * p.x)?;
        let prefactor = ((log_g + &log_h) * (-1.0 / (m + 1) as f64)).exp();
        Ok(prefactor * &phi_t)
    }

    pub fn j_value(&self, p: &DiskBundlePoint) -> Result<f64, MaError> {
        j_operator(&self.u_jet(p, 2)?)
    }

    /// Largest entry of `Ric(g̃) + (m+1) g̃` for `g̃ = i∂∂̄(-log u)`.
    pub fn ke_residual_at(&self, p: &DiskBundlePoint) -> Result<f64, MaError> {
        let m = self.m();
        let geo = Geometry::from_potential(-self.u_jet(p, 4)?.ln()?)?;
        let ric = values(geo.ricci());
        let g = values(geo.metric());
        Ok((ric + g * Complex64::new((m + 1) as f64, 0.0)).iter().map(|c| c.norm()).fold(0.0, f64::max))
    }

    /// Checks `det((-log u)_{i j̄}) = P(Y) Y' H G / (2^{m+1} X)` and the
    /// block formulas for `(-log u)_{i j̄}` at an interior point off the fiber axis.
    pub fn det_identity_check(&self, p: &DiskBundlePoint) -> Result<DetIdentityResidual, MaError> {
        if !(p.x > 0.0 && p.x < 1.0) {
            return Err(MaError::XOutOfRange(p.x));
        }
        let m = self.m();
        let n = m - 1;
        let direct = ddbar(&-self.u_jet(p, 2)?.ln()?)?;
        let direct = values(&direct);
        let det_direct = direct.determinant().re;

        let frame = frame_at(&self.chart, &p.z, 4)?;
        let h = self.chart.bundle_metric_value(&p.z)?;
        let g_det = frame.g.determinant().re;
        let y = self.y_value(p.x);
        let slope = self.y_slope_over_x(p.x)?;
        let closed = self.sol.poly.p.eval(y) * slope * h * g_det / 2f64.powi(m as i32 + 1);
        let det = (det_direct - closed).abs() / (1.0 + closed.abs());

        // X_α = X ∂_α log H / 2 and X_m = ξ̄ H^{1/2} / (2|ξ|).
        let log_h = CJet::real(self.chart.log_bundle_metric_jet(&p.z, 1)?);
        let mut dx = Vec::with_capacity(m);
        for a in 0..n {
            dx.push(complex_partial(&log_h, Wirtinger::Z(a))?.value() * (0.5 * p.x));
        }
        dx.push(p.xi.conj() * h.sqrt() / (2.0 * p.xi.norm()));
        let mut blocks = 0.0f64;
        for i in 0..m {
            for j in 0..m {
                let mut want = dx[i] * dx[j].conj() * slope;
                if i < n && j < n {
                    want += -frame.ricci[(i, j)] / (m + 1) as f64 + frame.g[(i, j)] * (y / 2.0);
                }
                blocks = blocks.max((direct[(i, j)] - want).norm() / (1.0 + want.norm()));
            }
        }
        Ok(DetIdentityResidual { det, blocks })
    }

    /// Smallest eigenvalue of `g̃|base - ((1 - λ_max)/(m+1)) g`, which should be nonnegative.
    pub fn metric_lower_bound(&self, p: &DiskBundlePoint) -> Result<f64, MaError> {
        let m = self.m();
        let n = m - 1;
        let gt = values(&ddbar(&-self.u_jet(p, 2)?.ln()?)?);
        let g = frame_at(&self.chart, &p.z, 4)?.g;
        let c = (1.0 - self.sol.poly.max_eigenvalue()) / (m + 1) as f64;
        let diff = DMatrix::from_fn(n, n, |a, b| gt[(a, b)] - g[(a, b)] * c);
        Ok(min_hermitian_eigenvalue(&diff))
    }

    /// Default grid: 5 base points, 5 fiber radii `X`, 4 fiber phases.
    pub fn default_grid(&self) -> Result<Vec<DiskBundlePoint>, MaError> {
        let radii = [0.0, 0.3, 0.55, 0.75, 0.95];
        let phases = [0.0, 0.5 * std::f64::consts::PI, 2.0, 4.5];
        let mut grid = Vec::with_capacity(100);
        for z in self.chart.sample_points(5) {
            for &x in &radii {
                for &ph in &phases {
                    grid.push(DiskBundlePoint::with_radius(&self.chart, z.clone(), x, ph)?);
                }
            }
        }
        Ok(grid)
    }

    /// `|J(u) - 1|` and the Kähler–Einstein residual over a grid, in parallel.
    pub fn ke_residual(&self, grid: &[DiskBundlePoint]) -> Result<KeReport, MaError> {
        let rows: Vec<KeRow> = grid
            .par_iter()
            .map(|p| {
                let j = self.j_value(p)?;
                Ok(KeRow { point: p.clone(), j, j_err: (j - 1.0).abs(), ke_err: self.ke_residual_at(p)? })
            })
            .collect::<Result<_, MaError>>()?;
        let max_j_err = rows.iter().map(|r| r.j_err).fold(0.0, f64::max);
        let max_ke_err = rows.iter().map(|r| r.ke_err).fold(0.0, f64::max);
        Ok(KeReport { rows, max_j_err, max_ke_err })
    }
}

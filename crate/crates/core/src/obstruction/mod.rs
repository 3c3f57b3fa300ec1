//! Obstruction function of the circle bundle over a constant scalar
//! curvature Kähler surface, and the equivalent criterion `LC = 0`.
//!
//! Normalization: `O = 8 (Δ²Λ + R^{a b̄} ∇_a ∇_b̄ Λ)`. Since
//! `Λ = 13 R²/288 - C/8` on surfaces and `R` is constant, `O = -LC` exactly.
//! Only the vanishing of `O` is meaningful; its factor relative to the CR
//! obstruction is not computed.

mod roots;

pub use roots::brent;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::charts::{ChartError, KahlerChart};
use crate::curvature::{self, CurvatureError, Geometry, Slot, Tensor};
use crate::jets::CJet;

/// Potential jet order needed for `Δ²Λ`.
pub const MIN_ORDER: usize = 8;

pub const DEFAULT_ORDER: usize = 10;

/// Default threshold on `max |O|` for the flat verdict.
pub const FLAT_TOLERANCE: f64 = 1e-7;

/// Absolute tolerance in `|z|²` for located roots.
pub const ROOT_TOLERANCE: f64 = 1e-10;

/// `|LC|` at or below this is treated as zero when scanning for sign changes.
pub const NOISE_FLOOR: f64 = 1e-8;

/// Stated in every report so the constant factor is never implicit.
pub const NORMALIZATION: &str = "O = 8*(lap^2 Lambda + Ric^{ab} D_a D_b Lambda) = -LC";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ObstructionError {
    #[error(transparent)]
    Curvature(#[from] CurvatureError),
    #[error(transparent)]
    Chart(#[from] ChartError),
    #[error("the obstruction formula needs a surface (n = 2), got n = {0}")]
    Unsupported(usize),
    #[error("jet order {have} is too low; {needed} needed")]
    DerivativeShortfall { needed: usize, have: usize },
    #[error("invalid ray: {0}")]
    InvalidRay(String),
}

/// Every quantity of the obstruction pipeline at one point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointValues {
    pub point: Vec<Complex64>,
    /// `|z|²`.
    pub norm_sq: f64,
    pub scalar: f64,
    pub central: f64,
    pub lambda: f64,
    pub lap_lambda: f64,
    pub bilap_lambda: f64,
    pub lc: f64,
    pub obstruction: f64,
}

impl PointValues {
    pub const COLUMNS: [&'static str; 12] = [
        "x1", "y1", "x2", "y2", "abs_z_sq", "R", "C", "Lambda", "lap_Lambda", "bilap_Lambda", "LC", "O",
    ];

    /// The CSV row, in the order of [`PointValues::COLUMNS`].
    pub fn row(&self) -> Vec<f64> {
        let mut row: Vec<f64> = self.point.iter().flat_map(|z| [z.re, z.im]).collect();
        row.extend([
            self.norm_sq,
            self.scalar,
            self.central,
            self.lambda,
            self.lap_lambda,
            self.bilap_lambda,
            self.lc,
            self.obstruction,
        ]);
        row
    }
}

fn surface_geometry(chart: &KahlerChart, p: &[Complex64], order: usize) -> Result<Geometry, ObstructionError> {
    if chart.dim() != 2 {
        return Err(ObstructionError::Unsupported(chart.dim()));
    }
    if order < MIN_ORDER {
        return Err(ObstructionError::DerivativeShortfall {
            needed: MIN_ORDER,
            have: order,
        });
    }
    let geo = Geometry::from_potential(chart.potential_jet(p, order)?)?;
    curvature::assert_csc(chart, &geo)?;
    Ok(geo)
}

/// Evaluates `R, C, Λ, ΔΛ, Δ²Λ, LC` and `O` at `p`.
pub fn evaluate(chart: &KahlerChart, p: &[Complex64], order: usize) -> Result<PointValues, ObstructionError> {
    let geo = surface_geometry(chart, p, order)?;
    let c = geo.central_curvature()?;
    let lam = geo.lambda();
    let lap = geo.laplacian(&lam)?;
    let bilap = geo.laplacian(&lap)?;
    let lc = geo.lichnerowicz_unchecked(&c)?.value();
    let l_lambda = bilap.value() + geo.ricci_hessian(&lam)?.value();
    Ok(PointValues {
        point: p.to_vec(),
        norm_sq: p.iter().map(|z| z.norm_sqr()).sum(),
        scalar: geo.scalar_curvature().value(),
        central: c.value(),
        lambda: lam.value(),
        lap_lambda: lap.value(),
        bilap_lambda: bilap.value(),
        lc,
        obstruction: 8.0 * l_lambda,
    })
}

pub fn obstruction_at(chart: &KahlerChart, p: &[Complex64], order: usize) -> Result<f64, ObstructionError> {
    Ok(evaluate(chart, p, order)?.obstruction)
}

/// `LC = Δ²C + R^{a b̄} ∇_a ∇_b̄ C`.
pub fn lc_at(chart: &KahlerChart, p: &[Complex64], order: usize) -> Result<f64, ObstructionError> {
    let geo = surface_geometry(chart, p, order)?;
    Ok(geo.lichnerowicz_unchecked(&geo.central_curvature()?)?.value())
}

/// Closed form of `LC` on the Burns–Simanca chart as a function of `s = |z|²`.
pub fn burns_simanca_lc(s: f64) -> f64 {
    let t = 1.0 + s;
    (-240.0 * s + 60.0) / t.powi(7) + (500.0 * s - 100.0) / t.powi(8)
}

/// Points `√s · direction` for `s` evenly spaced on `[s_min, s_max]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Ray {
    pub direction: Vec<Complex64>,
    pub s_min: f64,
    pub s_max: f64,
    pub samples: usize,
}

impl Ray {
    /// `direction` is normalized to unit length.
    pub fn new(direction: Vec<Complex64>, s_min: f64, s_max: f64, samples: usize) -> Result<Ray, ObstructionError> {
        let len = direction.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(len > 0.0) || !len.is_finite() {
            return Err(ObstructionError::InvalidRay("direction must be a nonzero finite vector".into()));
        }
        if !(s_min >= 0.0 && s_max > s_min && s_max.is_finite()) {
            return Err(ObstructionError::InvalidRay(format!(
                "need 0 <= s_min < s_max, got {s_min}..{s_max}"
            )));
        }
        if samples < 2 {
            return Err(ObstructionError::InvalidRay("at least two samples are needed".into()));
        }
        Ok(Ray {
            direction: direction.into_iter().map(|z| z / len).collect(),
            s_min,
            s_max,
            samples,
        })
    }

    /// Parses `s_min:s_max:samples`.
    pub fn parse(spec: &str, direction: Vec<Complex64>) -> Result<Ray, ObstructionError> {
        let bad = || ObstructionError::InvalidRay(format!("expected s_min:s_max:samples, got {spec:?}"));
        let parts: Vec<&str> = spec.split(':').collect();
        let [a, b, k] = parts.as_slice() else {
            return Err(bad());
        };
        let a = a.trim().parse().map_err(|_| bad())?;
        let b = b.trim().parse().map_err(|_| bad())?;
        let k = k.trim().parse().map_err(|_| bad())?;
        Ray::new(direction, a, b, k)
    }

    pub fn point(&self, s: f64) -> Vec<Complex64> {
        self.direction.iter().map(|z| z * s.sqrt()).collect()
    }

    pub fn parameters(&self) -> Vec<f64> {
        let step = (self.s_max - self.s_min) / (self.samples - 1) as f64;
        (0..self.samples).map(|k| self.s_min + step * k as f64).collect()
    }

    pub fn points(&self) -> Vec<Vec<Complex64>> {
        self.parameters().into_iter().map(|s| self.point(s)).collect()
    }
}

/// Zeros of `LC` along `ray`, bracketed by sign changes between samples and
/// refined by Brent's method. No sign change gives an empty list, as does
/// `LC` vanishing along the whole ray.
pub fn lc_roots(chart: &KahlerChart, ray: &Ray, order: usize) -> Result<Vec<f64>, ObstructionError> {
    let params = ray.parameters();
    let values: Vec<f64> = params
        .par_iter()
        .map(|&s| lc_at(chart, &ray.point(s), order))
        .collect::<Result<_, _>>()?;
    roots_from_samples(&params, &values, |s| lc_at(chart, &ray.point(s), order))
}

fn roots_from_samples(
    params: &[f64],
    values: &[f64],
    f: impl Fn(f64) -> Result<f64, ObstructionError>,
) -> Result<Vec<f64>, ObstructionError> {
    // Samples at rounding level carry no sign; brackets join the nearest
    // significant samples on either side.
    let significant: Vec<(f64, f64)> = params
        .iter()
        .zip(values)
        .filter(|(_, v)| v.abs() > NOISE_FLOOR)
        .map(|(&s, &v)| (s, v))
        .collect();
    let mut roots = Vec::new();
    for w in significant.windows(2) {
        let ((a, fa), (b, fb)) = (w[0], w[1]);
        if fa.signum() != fb.signum() {
            roots.push(brent(&f, a, b, fa, fb, ROOT_TOLERANCE)?);
        }
    }
    Ok(roots)
}

/// `max ‖∇_ā ∇_b̄ C‖` over `grid`; zero exactly when `grad^{1,0} C` is
/// holomorphic on the grid.
pub fn holomorphy_defect(chart: &KahlerChart, grid: &[Vec<Complex64>], order: usize) -> Result<f64, ObstructionError> {
    let per_point: Vec<f64> = grid
        .par_iter()
        .map(|p| {
            let geo = surface_geometry(chart, p, order)?;
            let c = Tensor::scalar(2, CJet::real(geo.central_curvature()?));
            Ok(geo.covd_chain(&c, &[Slot::Anti, Slot::Anti])?.max_abs_value())
        })
        .collect::<Result<_, ObstructionError>>()?;
    Ok(per_point.into_iter().fold(0.0, f64::max))
}

/// Obstruction values over a grid, with roots of `LC` along an optional ray.
#[derive(Clone, Debug, Serialize)]
pub struct ObstructionReport {
    pub chart: String,
    pub normalization: &'static str,
    pub order: usize,
    pub rows: Vec<PointValues>,
    pub ray: Option<Ray>,
    pub roots: Vec<f64>,
    pub tolerance: f64,
    pub max_abs_obstruction: f64,
    pub max_abs_lc: f64,
    pub holomorphy_defect: f64,
    pub flat: bool,
}

/// The JSON summary: everything in the report but the per-point rows.
#[derive(Clone, Debug, Serialize)]
pub struct ReportSummary<'a> {
    pub chart: &'a str,
    pub normalization: &'static str,
    pub order: usize,
    pub points: usize,
    pub ray: Option<&'a Ray>,
    pub roots: &'a [f64],
    pub tolerance: f64,
    pub max_abs_obstruction: f64,
    pub max_abs_lc: f64,
    pub holomorphy_defect: f64,
    pub flat: bool,
}

impl ObstructionReport {
    /// Evaluates every point of `grid`, followed by the samples of `ray`
    /// whose roots are also located.
    pub fn build(
        chart: &KahlerChart,
        grid: &[Vec<Complex64>],
        ray: Option<Ray>,
        order: usize,
        tolerance: f64,
    ) -> Result<ObstructionReport, ObstructionError> {
        let mut points = grid.to_vec();
        if let Some(ray) = &ray {
            points.extend(ray.points());
        }
        if points.is_empty() {
            return Err(ObstructionError::InvalidRay("no grid points and no ray".into()));
        }
        let rows: Vec<PointValues> = points
            .par_iter()
            .map(|p| evaluate(chart, p, order))
            .collect::<Result<_, _>>()?;
        let roots = match &ray {
            Some(ray) => {
                let lc: Vec<f64> = rows[grid.len()..].iter().map(|r| r.lc).collect();
                roots_from_samples(&ray.parameters(), &lc, |s| lc_at(chart, &ray.point(s), order))?
            }
            None => Vec::new(),
        };
        let max_abs = |f: fn(&PointValues) -> f64| rows.iter().map(|r| f(r).abs()).fold(0.0, f64::max);
        let max_abs_obstruction = max_abs(|r| r.obstruction);
        let max_abs_lc = max_abs(|r| r.lc);
        let holomorphy_defect = holomorphy_defect(chart, &points, order)?;
        Ok(ObstructionReport {
            chart: chart.label().to_string(),
            normalization: NORMALIZATION,
            order,
            rows,
            ray,
            roots,
            tolerance,
            max_abs_obstruction,
            max_abs_lc,
            holomorphy_defect,
            flat: max_abs_obstruction < tolerance,
        })
    }

    pub fn summary(&self) -> ReportSummary<'_> {
        ReportSummary {
            chart: &self.chart,
            normalization: self.normalization,
            order: self.order,
            points: self.rows.len(),
            ray: self.ray.as_ref(),
            roots: &self.roots,
            tolerance: self.tolerance,
            max_abs_obstruction: self.max_abs_obstruction,
            max_abs_lc: self.max_abs_lc,
            holomorphy_defect: self.holomorphy_defect,
            flat: self.flat,
        }
    }
}

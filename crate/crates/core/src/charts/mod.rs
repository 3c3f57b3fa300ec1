//! Local Kähler potentials and bundle metrics, served as jets.
//!
//! Every catalog chart carries a bundle metric `H` and uses `log H` as its
//! Kähler potential, so `g_{ab̄} = ∂_a ∂_b̄ log H`. Custom charts declare
//! either `H` itself or only a potential; the latter cannot feed the disk
//! bundle pipeline because `H` is then fixed only up to `|e^f|^2`.

mod config;
mod expr;

pub use config::ChartSpec;
pub use expr::Expr;

use num_complex::Complex64;
use thiserror::Error;

use crate::jets::{Jet, JetError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChartError {
    #[error("point {point:?} lies outside the domain of {label}")]
    OutOfDomain { label: String, point: Vec<Complex64> },
    #[error("chart {label} has dimension {expected}, got a point with {got} coordinates")]
    DimensionMismatch { label: String, expected: usize, got: usize },
    #[error("chart {0} declares only a potential; the bundle metric H is needed")]
    UnsupportedForBundle(String),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("expression is not real-valued (imaginary part {0:e})")]
    NotReal(f64),
    #[error("invalid chart parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Jet(#[from] JetError),
}

/// What a custom expression denotes.
#[derive(Clone, Debug, PartialEq)]
pub enum CustomKind {
    /// The bundle metric `H`; the potential is `log H`.
    BundleMetric,
    /// A Kähler potential with no bundle metric attached.
    Potential,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CatalogEntry {
    /// `|z|^2` on `C^n`.
    Flat { n: usize },
    /// `scale * log(1 + |z|^2)`, Ricci eigenvalues `(n + 1) / scale`.
    FubiniStudy { n: usize, scale: f64 },
    /// `((n + 1) / lambda) * log(1 - |z|^2)` on the unit ball, Ricci eigenvalue `lambda < 0`.
    Ball { n: usize, lambda: f64 },
    /// One-dimensional space form with Ricci eigenvalue `curvature`.
    SpaceFormDisk { curvature: f64 },
    /// Product of space-form disks, one factor per coordinate.
    ProductOfDisks { curvatures: Vec<f64> },
    /// `(z1 + z̄1)^2 / (2 (z2 + z̄2)) - log(z2 + z̄2)` on `Re z2 > 0`.
    SiegelJacobi,
    /// `|z|^2 + log |z|^2` on `C^2 \ {0}`.
    BurnsSimanca,
    Custom { n: usize, expr: Expr, source: String, kind: CustomKind },
}

#[derive(Clone, Debug)]
pub struct KahlerChart {
    entry: CatalogEntry,
    label: String,
}

fn space_form_potential(lambda: f64, s: &Jet) -> Result<Jet, JetError> {
    Ok(if lambda > 0.0 {
        (s + 1.0).ln()? * (2.0 / lambda)
    } else if lambda < 0.0 {
        (1.0 - s).ln()? * (2.0 / lambda)
    } else {
        s * 0.5
    })
}

fn norm_sqr(vars: &[Jet], coords: std::ops::Range<usize>) -> Jet {
    coords
        .map(|i| &vars[2 * i] * &vars[2 * i] + &vars[2 * i + 1] * &vars[2 * i + 1])
        .reduce(|a, b| a + b)
        .expect("at least one coordinate")
}

impl KahlerChart {
    pub fn new(entry: CatalogEntry) -> Result<KahlerChart, ChartError> {
        use CatalogEntry::*;
        let bad = |m: &str| Err(ChartError::InvalidParameter(m.to_string()));
        let label = match &entry {
            Flat { n } | FubiniStudy { n, .. } | Ball { n, .. } | Custom { n, .. }
                if *n == 0 || *n > crate::jets::MAX_VARS / 2 =>
            {
                return bad("dimension must be between 1 and 4");
            }
            Flat { n } => format!("flat({n})"),
            FubiniStudy { n, scale } => {
                if !(*scale > 0.0) {
                    return bad("Fubini-Study scale must be positive");
                }
                format!("fubini-study({n},{scale})")
            }
            Ball { n, lambda } => {
                if !(*lambda < 0.0) {
                    return bad("ball Ricci eigenvalue must be negative");
                }
                format!("ball({n},{lambda})")
            }
            SpaceFormDisk { curvature } => {
                if !curvature.is_finite() {
                    return bad("curvature must be finite");
                }
                format!("space-form-disk({curvature})")
            }
            ProductOfDisks { curvatures } => {
                if curvatures.is_empty() || curvatures.len() > 4 {
                    return bad("product of disks needs 1 to 4 factors");
                }
                if curvatures.iter().any(|c| !c.is_finite()) {
                    return bad("curvatures must be finite");
                }
                let parts: Vec<String> = curvatures.iter().map(|c| c.to_string()).collect();
                format!("product-of-disks({})", parts.join(","))
            }
            SiegelJacobi => "siegel-jacobi".to_string(),
            BurnsSimanca => "burns-simanca".to_string(),
            Custom { n, source, kind, .. } => match kind {
                CustomKind::BundleMetric => format!("custom({n}; H = {source})"),
                CustomKind::Potential => format!("custom({n}; potential = {source})"),
            },
        };
        Ok(KahlerChart { entry, label })
    }

    /// Custom chart from an expression string.
    pub fn custom(n: usize, source: &str, kind: CustomKind) -> Result<KahlerChart, ChartError> {
        let expr = Expr::parse(source, n)?;
        KahlerChart::new(CatalogEntry::Custom {
            n,
            expr,
            source: source.to_string(),
            kind,
        })
    }

    pub fn entry(&self) -> &CatalogEntry {
        &self.entry
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        use CatalogEntry::*;
        match &self.entry {
            Flat { n } | FubiniStudy { n, .. } | Ball { n, .. } | Custom { n, .. } => *n,
            SpaceFormDisk { .. } => 1,
            ProductOfDisks { curvatures } => curvatures.len(),
            SiegelJacobi | BurnsSimanca => 2,
        }
    }

    /// Whether the chart carries a bundle metric `H`.
    pub fn has_bundle_metric(&self) -> bool {
        !matches!(
            self.entry,
            CatalogEntry::Custom {
                kind: CustomKind::Potential,
                ..
            }
        )
    }

    /// Ricci eigenvalues known in closed form, when they are constant.
    pub fn constant_ricci_eigenvalues(&self) -> Option<Vec<f64>> {
        use CatalogEntry::*;
        let mut eigs = match &self.entry {
            Flat { n } => vec![0.0; *n],
            FubiniStudy { n, scale } => vec![(*n as f64 + 1.0) / scale; *n],
            Ball { n, lambda } => vec![*lambda; *n],
            SpaceFormDisk { curvature } => vec![*curvature],
            ProductOfDisks { curvatures } => curvatures.clone(),
            SiegelJacobi => vec![-3.0, 0.0],
            BurnsSimanca | Custom { .. } => return None,
        };
        eigs.sort_by(f64::total_cmp);
        Some(eigs)
    }

    /// Constant scalar curvature known from the catalog; `None` means unknown.
    pub fn known_scalar_curvature(&self) -> Option<f64> {
        match &self.entry {
            CatalogEntry::BurnsSimanca => Some(0.0),
            _ => self.constant_ricci_eigenvalues().map(|e| e.iter().sum()),
        }
    }

    pub fn contains(&self, p: &[Complex64]) -> bool {
        use CatalogEntry::*;
        if p.len() != self.dim() || p.iter().any(|z| !z.is_finite()) {
            return false;
        }
        let s: f64 = p.iter().map(|z| z.norm_sqr()).sum();
        match &self.entry {
            Flat { .. } | FubiniStudy { .. } => true,
            Ball { .. } => s < 1.0,
            SpaceFormDisk { curvature } => *curvature >= 0.0 || s < 1.0,
            ProductOfDisks { curvatures } => curvatures
                .iter()
                .zip(p)
                .all(|(c, z)| *c >= 0.0 || z.norm_sqr() < 1.0),
            SiegelJacobi => p[1].re > 0.0,
            BurnsSimanca => s > 0.0,
            Custom { .. } => self.potential_jet(p, 0).is_ok_and(|j| j.value().is_finite()),
        }
    }

    /// `count` deterministic, well-spread points inside the chart domain
    /// (Kronecker sequence; radii kept away from any boundary).
    pub fn sample_points(&self, count: usize) -> Vec<Vec<Complex64>> {
        use CatalogEntry::*;
        let n = self.dim();
        let alphas: Vec<f64> = (0..2 * n).map(|k| ((k + 2) as f64).sqrt().fract()).collect();
        let mut out = Vec::with_capacity(count);
        let mut i = 0usize;
        while out.len() < count && i < 100 * count + 100 {
            i += 1;
            let u: Vec<f64> = alphas.iter().map(|a| (0.5 + i as f64 * a).fract()).collect();
            let polar = |k: usize, rmax: f64| {
                let r = rmax * u[2 * k].sqrt();
                Complex64::from_polar(r, std::f64::consts::TAU * u[2 * k + 1])
            };
            let p: Vec<Complex64> = match &self.entry {
                Ball { .. } => (0..n).map(|k| polar(k, 0.75 / (n as f64).sqrt())).collect(),
                SpaceFormDisk { curvature } => vec![polar(0, if *curvature < 0.0 { 0.75 } else { 1.5 })],
                ProductOfDisks { curvatures } => curvatures
                    .iter()
                    .enumerate()
                    .map(|(k, c)| polar(k, if *c < 0.0 { 0.75 } else { 1.5 }))
                    .collect(),
                SiegelJacobi => vec![
                    Complex64::new(4.0 * u[0] - 2.0, 4.0 * u[1] - 2.0),
                    Complex64::new(0.5 + 1.5 * u[2], 4.0 * u[3] - 2.0),
                ],
                BurnsSimanca => {
                    let s = 0.3 + 1.7 * u[0];
                    let a = u[1];
                    vec![
                        Complex64::from_polar((s * a).sqrt(), std::f64::consts::TAU * u[2]),
                        Complex64::from_polar((s * (1.0 - a)).sqrt(), std::f64::consts::TAU * u[3]),
                    ]
                }
                Flat { .. } | FubiniStudy { .. } => (0..n).map(|k| polar(k, 1.5)).collect(),
                Custom { .. } => (0..n)
                    .map(|k| Complex64::new(u[2 * k] - 0.5, u[2 * k + 1] - 0.5))
                    .collect(),
            };
            if self.contains(&p) {
                out.push(p);
            }
        }
        out
    }

    fn check_point(&self, p: &[Complex64]) -> Result<(), ChartError> {
        if p.len() != self.dim() {
            return Err(ChartError::DimensionMismatch {
                label: self.label.clone(),
                expected: self.dim(),
                got: p.len(),
            });
        }
        Ok(())
    }

    fn out_of_domain(&self, p: &[Complex64]) -> ChartError {
        ChartError::OutOfDomain {
            label: self.label.clone(),
            point: p.to_vec(),
        }
    }

    /// Jet of the Kähler potential about `p`; for catalog charts this is `log H`.
    pub fn potential_jet(&self, p: &[Complex64], order: usize) -> Result<Jet, ChartError> {
        use CatalogEntry::*;
        self.check_point(p)?;
        if let Custom { expr, kind, .. } = &self.entry {
            let t = Jet::constant(0.0, &real_base(p), order)?;
            let v = expr.eval_real(&t).map_err(|e| match e {
                ChartError::Jet(JetError::Domain { .. } | JetError::SingularDivision(_)) => {
                    self.out_of_domain(p)
                }
                other => other,
            })?;
            return match kind {
                CustomKind::Potential => Ok(v),
                CustomKind::BundleMetric => v.ln().map_err(|_| self.out_of_domain(p)),
            };
        }
        if !self.contains(p) {
            return Err(self.out_of_domain(p));
        }
        let vars = Jet::variables(&real_base(p), order)?;
        let n = self.dim();
        let jet = match &self.entry {
            Flat { .. } => norm_sqr(&vars, 0..n),
            FubiniStudy { scale, .. } => (norm_sqr(&vars, 0..n) + 1.0).ln()? * *scale,
            Ball { lambda, .. } => {
                (1.0 - norm_sqr(&vars, 0..n)).ln()? * ((n as f64 + 1.0) / lambda)
            }
            SpaceFormDisk { curvature } => space_form_potential(*curvature, &norm_sqr(&vars, 0..1))?,
            ProductOfDisks { curvatures } => {
                let mut acc = vars[0].zero_like();
                for (i, c) in curvatures.iter().enumerate() {
                    acc += &space_form_potential(*c, &norm_sqr(&vars, i..i + 1))?;
                }
                acc
            }
            SiegelJacobi => {
                // x1 = Re z1, x2 = Re z2: (2 x1)^2 / (4 x2) - log(2 x2)
                let (x1, x2) = (&vars[0], &vars[2]);
                (x1 * x1).checked_div(x2)? - (x2 * 2.0).ln()?
            }
            BurnsSimanca => {
                let s = norm_sqr(&vars, 0..2);
                &s + &s.ln()?
            }
            Custom { .. } => unreachable!("handled above"),
        };
        Ok(jet)
    }

    /// Jet of `log H`; only charts carrying a bundle metric provide it.
    pub fn log_bundle_metric_jet(&self, p: &[Complex64], order: usize) -> Result<Jet, ChartError> {
        if !self.has_bundle_metric() {
            return Err(ChartError::UnsupportedForBundle(self.label.clone()));
        }
        self.potential_jet(p, order)
    }

    /// `H(p) > 0`.
    pub fn bundle_metric_value(&self, p: &[Complex64]) -> Result<f64, ChartError> {
        Ok(self.log_bundle_metric_jet(p, 0)?.value().exp())
    }
}

/// `(Re z1, Im z1, Re z2, ...)`.
pub fn real_base(p: &[Complex64]) -> Vec<f64> {
    p.iter().flat_map(|z| [z.re, z.im]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn siegel_jacobi_constant_term() {
        let ch = KahlerChart::new(CatalogEntry::SiegelJacobi).unwrap();
        let j = ch.potential_jet(&[c(0.0, 0.0), c(1.0, 0.0)], 2).unwrap();
        assert!((j.value() + 2f64.ln()).abs() < 1e-15);
        assert!(ch.potential_jet(&[c(0.0, 0.0), c(-1.0, 0.0)], 2).is_err());
    }

    #[test]
    fn bundle_metric_values() {
        let ball = KahlerChart::new(CatalogEntry::Ball { n: 1, lambda: -2.0 }).unwrap();
        assert_eq!(ball.bundle_metric_value(&[c(0.0, 0.0)]).unwrap(), 1.0);
        let fs = KahlerChart::new(CatalogEntry::FubiniStudy { n: 1, scale: 1.0 }).unwrap();
        assert_eq!(fs.bundle_metric_value(&[c(0.0, 0.0)]).unwrap(), 1.0);
        let flat = KahlerChart::new(CatalogEntry::Flat { n: 1 }).unwrap();
        let h = flat.bundle_metric_value(&[c(0.6, 0.8)]).unwrap();
        assert!((h - std::f64::consts::E).abs() < 1e-15);
        let pot = KahlerChart::custom(1, "z1*conj(z1)", CustomKind::Potential).unwrap();
        assert!(matches!(
            pot.bundle_metric_value(&[c(0.1, 0.0)]),
            Err(ChartError::UnsupportedForBundle(_))
        ));
    }

    #[test]
    fn custom_matches_catalog() {
        let custom =
            KahlerChart::custom(2, "exp(z1*conj(z1) + z2*conj(z2))", CustomKind::BundleMetric).unwrap();
        let flat = KahlerChart::new(CatalogEntry::Flat { n: 2 }).unwrap();
        let p = [c(0.3, -0.1), c(0.2, 0.4)];
        let a = custom.potential_jet(&p, 5).unwrap();
        let b = flat.potential_jet(&p, 5).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-13);
    }
}

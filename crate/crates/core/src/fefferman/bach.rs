use num_complex::Complex64;
use serde::Serialize;

use super::index::FIndex;
use super::ktensor::KTensor;
use super::tables::{christoffel_table, cotton_jets, fefferman_metric_inverse, schouten_upper, weyl_components};
use super::FeffermanError;

/// The Bach components that reduce to base curvature.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BachComponents {
    pub b00: Complex64,
    /// `B_{α β̄}` as `b_ab[α][β]`.
    pub b_ab: Vec<Vec<Complex64>>,
    pub b0a: Vec<Complex64>,
    pub b0_top: Complex64,
}

impl BachComponents {
    pub fn max_abs_diff(&self, other: &BachComponents) -> [f64; 4] {
        let b_ab = self
            .b_ab
            .iter()
            .flatten()
            .zip(other.b_ab.iter().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        let b0a = self
            .b0a
            .iter()
            .zip(&other.b0a)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        [(self.b00 - other.b00).norm(), b_ab, b0a, (self.b0_top - other.b0_top).norm()]
    }
}

/// Closed-form Bach components in terms of `Λ`, `K` and the Ricci tensor.
pub fn bach_components(kt: &KTensor) -> BachComponents {
    let n = kt.n;
    let nf = n as f64;
    let r = kt.scalar();
    let b00 = 4.0 / nf * kt.laplacian_lambda + 8.0 * kt.k_cubed_trace - 4.0 / (nf * (nf + 1.0)) * kt.lambda * r;
    let rsq = kt.ricci_square();
    let np2 = (nf + 2.0).powi(2);
    let gcoef = (nf - 1.0) / (4.0 * (nf + 1.0).powi(2) * np2) * r * r - (nf - 1.0) / nf * kt.lambda;
    let b_ab = (0..n)
        .map(|a| {
            (0..n)
                .map(|b| {
                    kt.frame.ricci[(a, b)] * (-(nf - 1.0) / ((nf + 1.0) * np2) * r)
                        + rsq[(a, b)] * ((nf - 1.0) / np2)
                        + kt.frame.g[(a, b)] * gcoef
                })
                .collect()
        })
        .collect();
    let b0a = kt
        .grad_lambda
        .iter()
        .map(|d| Complex64::new(0.0, (2.0 * nf - 2.0) / nf) * d)
        .collect();
    BachComponents {
        b00: Complex64::new(b00, 0.0),
        b_ab,
        b0a,
        b0_top: Complex64::new(0.0, 0.0),
    }
}

/// `B_00 = 2ΔΛ + (4/3) R Λ - R³/54`, the surface specialization where
/// `tr K³` is eliminated through `tr K = R/6`.
pub fn bach_b00_surface(kt: &KTensor) -> Result<f64, FeffermanError> {
    if kt.n != 2 {
        return Err(FeffermanError::SurfaceOnly(kt.n));
    }
    let r = kt.scalar();
    Ok(2.0 * kt.laplacian_lambda + 4.0 / 3.0 * r * kt.lambda - r.powi(3) / 54.0)
}

/// `B_{ij} = 𝗀^{kl} C_{ijk,l} - P^{kl} W_{kijl}` assembled from the frame
/// tables, differentiating the Cotton jets directly.
pub fn bach_from_tables(kt: &KTensor) -> Result<BachComponents, FeffermanError> {
    let n = kt.n;
    let all = FIndex::all(n);
    let gamma = christoffel_table(kt);
    let cj = cotton_jets(kt);
    let c = cj.values();
    let xc = cj.frame_derivatives()?;
    let g_inv = fefferman_metric_inverse(kt);
    let p_up = schouten_upper(kt);
    let w = weyl_components(kt);

    let component = |i: FIndex, j: FIndex| -> Result<Complex64, FeffermanError> {
        let mut div = Complex64::new(0.0, 0.0);
        let mut pw = Complex64::new(0.0, 0.0);
        for &k in &all {
            for &l in &all {
                let gkl = g_inv.get(&[k, l]);
                if gkl.norm() != 0.0 {
                    let mut d = xc.get(&[i, j, k, l]);
                    for &p in &all {
                        d -= gamma.get(&[l, i, p]) * c.get(&[p, j, k])
                            + gamma.get(&[l, j, p]) * c.get(&[i, p, k])
                            + gamma.get(&[l, k, p]) * c.get(&[i, j, p]);
                    }
                    div += gkl * d;
                }
                let pkl = p_up.get(&[k, l]);
                if pkl.norm() != 0.0 {
                    let wv = w.get([k, i, j, l]).ok_or_else(|| FeffermanError::MissingComponent {
                        tensor: "Weyl",
                        indices: [k, i, j, l].iter().map(|x| x.label(n)).collect(),
                    })?;
                    pw += pkl * wv;
                }
            }
        }
        Ok(div - pw)
    };

    let b_ab = (0..n)
        .map(|a| (0..n).map(|b| component(FIndex::Hol(a), FIndex::AntiHol(b))).collect())
        .collect::<Result<_, _>>()?;
    let b0a = (0..n)
        .map(|a| component(FIndex::Zero, FIndex::Hol(a)))
        .collect::<Result<_, _>>()?;
    Ok(BachComponents {
        b00: component(FIndex::Zero, FIndex::Zero)?,
        b_ab,
        b0a,
        b0_top: component(FIndex::Zero, FIndex::Top)?,
    })
}

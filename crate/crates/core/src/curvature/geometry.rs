use num_complex::Complex64;

use super::linalg::{self, JetMatrix};
use super::{CurvatureError, CurvatureFrame};
use crate::jets::{complex_partial, CJet, Jet, Wirtinger};

/// Kähler geometry of a potential, kept as jets about the base point.
///
/// Matrices use `m[a][b] = T_{a b̄}`; the inverse metric is stored as
/// `ginv[a][b] = g^{a b̄}`. Christoffel symbols are `gamma[c][a][b] = Γ^c_{ab}`.
/// Jet orders drop with each derivative: the metric carries `order - 2`,
/// Christoffels `order - 3`, Ricci and curvature scalars `order - 4`.
#[derive(Clone, Debug)]
pub struct Geometry {
    n: usize,
    order: usize,
    potential: Jet,
    g: JetMatrix,
    det_g: Jet,
    ginv: JetMatrix,
    dg: Vec<JetMatrix>,
    gamma: Vec<JetMatrix>,
    gamma_bar: Vec<JetMatrix>,
    ricci: JetMatrix,
}

fn insufficient(needed: usize, have: usize) -> CurvatureError {
    CurvatureError::InsufficientOrder { needed, have }
}

fn partial(f: &CJet, dir: Wirtinger) -> Result<CJet, CurvatureError> {
    complex_partial(f, dir).map_err(|_| insufficient(f.order() + 1, f.order()))
}

/// `∂_a ∂_b̄ f` for a real jet `f`.
pub fn ddbar(f: &Jet) -> Result<JetMatrix, CurvatureError> {
    let n = f.nvars() / 2;
    let cf = CJet::real(f.clone());
    let dbar: Vec<CJet> = (0..n)
        .map(|b| partial(&cf, Wirtinger::ZBar(b)))
        .collect::<Result<_, _>>()?;
    (0..n)
        .map(|a| (0..n).map(|b| partial(&dbar[b], Wirtinger::Z(a))).collect())
        .collect()
}

impl Geometry {
    pub fn from_potential(potential: Jet) -> Result<Geometry, CurvatureError> {
        if !potential.nvars().is_multiple_of(2) {
            return Err(CurvatureError::OddVariableCount(potential.nvars()));
        }
        let order = potential.order();
        if order < 4 {
            return Err(insufficient(4, order));
        }
        let n = potential.nvars() / 2;
        let g = ddbar(&potential)?;
        let g0 = linalg::values(&g);
        let min_eig = linalg::min_hermitian_eigenvalue(&g0);
        if !(min_eig > 0.0) {
            return Err(CurvatureError::DegenerateMetric(min_eig));
        }
        let det_g = linalg::det(&g).re;
        let cof = linalg::cofactors(&g);
        // g^{a b̄} = (G^{-1})[b][a] = cof[a][b] / det G
        let ginv: JetMatrix = cof
            .iter()
            .map(|row| {
                row.iter()
                    .map(|c| {
                        Ok(CJet::new(c.re.checked_div(&det_g)?, c.im.checked_div(&det_g)?))
                    })
                    .collect::<Result<Vec<_>, crate::jets::JetError>>()
            })
            .collect::<Result<_, _>>()?;
        let dg: Vec<JetMatrix> = (0..n)
            .map(|a| {
                g.iter()
                    .map(|row| row.iter().map(|x| partial(x, Wirtinger::Z(a))).collect())
                    .collect::<Result<_, _>>()
            })
            .collect::<Result<_, _>>()?;
        // Γ^c_{ab} = g^{c ν̄} ∂_a g_{b ν̄}
        let gamma: Vec<JetMatrix> = (0..n)
            .map(|c| {
                (0..n)
                    .map(|a| {
                        (0..n)
                            .map(|b| {
                                (1..n).fold(&ginv[c][0] * &dg[a][b][0], |acc, nu| {
                                    acc + &ginv[c][nu] * &dg[a][b][nu]
                                })
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let gamma_bar = gamma.iter().map(|m| linalg::map(m, CJet::conj)).collect();
        let logdet = det_g.ln()?;
        let ricci = linalg::map(&ddbar(&logdet)?, |c| -c);
        Ok(Geometry {
            n,
            order,
            potential,
            g,
            det_g,
            ginv,
            dg,
            gamma,
            gamma_bar,
            ricci,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Order of the potential jet the geometry was built from.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn potential(&self) -> &Jet {
        &self.potential
    }

    pub fn metric(&self) -> &JetMatrix {
        &self.g
    }

    pub fn det_metric(&self) -> &Jet {
        &self.det_g
    }

    pub fn inverse_metric(&self) -> &JetMatrix {
        &self.ginv
    }

    /// `dg[a][b][c] = ∂_a g_{b c̄}`.
    pub fn metric_derivative(&self) -> &[JetMatrix] {
        &self.dg
    }

    pub fn christoffel(&self) -> &[JetMatrix] {
        &self.gamma
    }

    pub fn christoffel_conj(&self) -> &[JetMatrix] {
        &self.gamma_bar
    }

    pub fn ricci(&self) -> &JetMatrix {
        &self.ricci
    }

    /// `R_a^b = R_{a γ̄} g^{b γ̄}`, i.e. the matrix `Ric · G^{-1}`.
    pub fn ricci_endo(&self) -> JetMatrix {
        self.mixed(&self.ricci)
    }

    /// Lowers the second slot against the inverse metric: `T_a^b = T_{a γ̄} g^{b γ̄}`.
    pub fn mixed(&self, t: &[Vec<CJet>]) -> JetMatrix {
        linalg::matmul(t, &linalg::transpose(&self.ginv))
    }

    /// `T^{a b̄} = g^{a μ̄} g^{ν b̄} T_{ν μ̄}`.
    pub fn raise(&self, t: &[Vec<CJet>]) -> JetMatrix {
        let n = self.n;
        (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| {
                        let mut acc: Option<CJet> = None;
                        for mu in 0..n {
                            for nu in 0..n {
                                let term = &(&self.ginv[a][mu] * &self.ginv[nu][b]) * &t[nu][mu];
                                acc = Some(match acc {
                                    Some(x) => x + term,
                                    None => term,
                                });
                            }
                        }
                        acc.expect("n >= 1")
                    })
                    .collect()
            })
            .collect()
    }

    /// `sum_{a b} x[a][b] * y[a][b]`.
    pub fn pair(x: &[Vec<CJet>], y: &[Vec<CJet>]) -> CJet {
        let n = x.len();
        let mut acc = &x[0][0] * &y[0][0];
        for a in 0..n {
            for b in 0..n {
                if a + b > 0 {
                    acc = acc + &x[a][b] * &y[a][b];
                }
            }
        }
        acc
    }

    pub fn scalar_curvature(&self) -> Jet {
        Geometry::pair(&self.ginv, &self.ricci).re
    }

    /// `C = det(Ric) / det(g)`.
    pub fn central_curvature(&self) -> Result<Jet, CurvatureError> {
        let det_r = linalg::det(&self.ricci).re;
        Ok(det_r.checked_div(&self.det_g)?)
    }

    /// Trace-modified Ricci tensor `(Ric - R g / (2(n+1))) / (n+2)`.
    pub fn k_tensor(&self) -> JetMatrix {
        let n = self.n as f64;
        let r = self.scalar_curvature() * (1.0 / (2.0 * (n + 1.0)));
        (0..self.n)
            .map(|a| {
                (0..self.n)
                    .map(|b| (&self.ricci[a][b] - &(&self.g[a][b] * &r)).scale(Complex64::new(1.0 / (n + 2.0), 0.0)))
                    .collect()
            })
            .collect()
    }

    /// `Λ = K_{a b̄} K^{a b̄}`.
    pub fn lambda(&self) -> Jet {
        let km = self.mixed(&self.k_tensor());
        linalg::trace(&linalg::matmul(&km, &km)).re
    }

    /// `Δf = g^{a b̄} ∂_a ∂_b̄ f`.
    pub fn laplacian(&self, f: &Jet) -> Result<Jet, CurvatureError> {
        Ok(Geometry::pair(&self.ginv, &ddbar(f)?).re)
    }

    /// `R^{a b̄} ∂_a ∂_b̄ f`.
    pub fn ricci_hessian(&self, f: &Jet) -> Result<Jet, CurvatureError> {
        Ok(Geometry::pair(&self.raise(&self.ricci), &ddbar(f)?).re)
    }

    /// `Δ²f + R^{a b̄} ∂_a ∂_b̄ f`, without checking constant scalar curvature.
    pub fn lichnerowicz_unchecked(&self, f: &Jet) -> Result<Jet, CurvatureError> {
        let d2 = self.laplacian(&self.laplacian(f)?)?;
        Ok(d2 + self.ricci_hessian(f)?)
    }

    /// Largest `|∂_a R|` at the base point.
    pub fn scalar_gradient_norm(&self) -> Result<f64, CurvatureError> {
        let r = CJet::real(self.scalar_curvature());
        let mut worst = 0.0f64;
        for a in 0..self.n {
            worst = worst.max(partial(&r, Wirtinger::Z(a))?.value().norm());
        }
        Ok(worst)
    }

    /// `R_{μ ν̄ α β̄}` as `riem[μ][ν][α][β]`, at order `order - 4`.
    pub fn riemann(&self) -> Result<Vec<Vec<JetMatrix>>, CurvatureError> {
        let n = self.n;
        // ∂_ν̄ g_{γ β̄} = conj(∂_ν g_{β γ̄})
        let dbar_g = |nu: usize, gamma: usize, beta: usize| self.dg[nu][beta][gamma].conj();
        let mut out = Vec::with_capacity(n);
        for mu in 0..n {
            let mut row = Vec::with_capacity(n);
            for nu in 0..n {
                let mut block = Vec::with_capacity(n);
                for alpha in 0..n {
                    let mut line = Vec::with_capacity(n);
                    for beta in 0..n {
                        let mut acc = partial(&self.dg[mu][alpha][beta], Wirtinger::ZBar(nu))?;
                        for gamma in 0..n {
                            for delta in 0..n {
                                let t = &(&self.ginv[gamma][delta] * &dbar_g(nu, gamma, beta))
                                    * &self.dg[mu][alpha][delta];
                                acc = acc - t;
                            }
                        }
                        line.push(acc);
                    }
                    block.push(line);
                }
                row.push(block);
            }
            out.push(row);
        }
        Ok(out)
    }

    /// Point values of everything a frame reports.
    pub fn frame(&self) -> Result<CurvatureFrame, CurvatureError> {
        let n = self.n;
        let g = linalg::values(&self.g);
        let g_inv = linalg::values(&self.ginv);
        let ricci = linalg::values(&self.ricci);
        let ricci_endo = linalg::values(&self.ricci_endo());
        let eigenvalues = linalg::pencil_eigenvalues(&ricci, &g)?;
        let scalar = self.scalar_curvature().value();
        let central = self.central_curvature()?.value();
        let central_via_endo = ricci_endo.determinant().re;
        let christoffel = (0..n)
            .flat_map(|c| (0..n).flat_map(move |a| (0..n).map(move |b| (c, a, b))))
            .map(|(c, a, b)| self.gamma[c][a][b].value())
            .collect();
        let riem = self
            .riemann()?
            .iter()
            .flat_map(|r| r.iter().flat_map(|b| b.iter().flat_map(|l| l.iter().map(CJet::value))))
            .collect();
        Ok(CurvatureFrame {
            n,
            g,
            g_inv,
            ricci,
            ricci_endo,
            eigenvalues,
            scalar,
            central,
            central_via_endo,
            christoffel,
            riem,
        })
    }
}

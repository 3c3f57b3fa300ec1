//! The radial ODE behind Kähler–Einstein potentials on disk bundles over
//! Kähler–Einstein bases with constant Ricci eigenvalues.
//!
//! For eigenvalues `λ_i` and `m = n + 1`, the polynomials
//! `P(y) = Π (y - 2λ_i/(m+1))` and `Q` with `Q' = (m+1) y P` give the
//! reversed forms `P̂(x) = x^{m-1} P(1/x)`, `Q̂(x) = x^{m+1} Q(1/x)`, and `Z`
//! solves `r Z' P̂(Z) + Q̂(Z) = 0` with `Z(1) = 0`, regular at `r = 0`.

pub mod cheb;
pub mod dopri;
pub mod poly;
mod singular;
pub mod taylor;

pub use poly::Poly;
pub use singular::{SingularProblem, SingularSolution, CUTOFF};

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::jets::{Jet, JetError};

use dopri::{integrate, integrate_until, Tolerance};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KeError {
    #[error("eigenvalue list is empty")]
    EmptyEigenvalues,
    #[error("m = {m} does not match {n_eigs} eigenvalues (m must be their count plus one)")]
    DimensionMismatch { m: usize, n_eigs: usize },
    #[error("largest eigenvalue {max_eigenvalue} is not below 1; no solution exists")]
    Infeasible { max_eigenvalue: f64 },
    #[error("reduced equation needs a negative eigenvalue, got {0}")]
    ReducedOutOfRange(f64),
    #[error("integration failed after r = {last_valid_r}: {reason}")]
    IntegrationFailed { last_valid_r: f64, reason: String },
    #[error("root argument of phi is not positive at r = {r}")]
    NonPositiveRoot { r: f64 },
    #[error("origin is not a regular singular point: {0}")]
    NotRegular(String),
    #[error("{what} residual {value:e} exceeds tolerance")]
    Residual { what: &'static str, value: f64 },
    #[error(transparent)]
    Jet(#[from] JetError),
}

/// Invariants are audited to this tolerance on the residual grid.
pub const RESIDUAL_TOL: f64 = 1e-8;
/// Points in the audit grid.
pub const GRID_POINTS: usize = 512;

/// `n` Chebyshev–Lobatto points of `[0, 1]`, ascending.
pub fn chebyshev_grid(n: usize) -> Vec<f64> {
    let mut g = cheb::lobatto_nodes(0.0, 1.0, n - 1);
    g.reverse();
    g
}

/// How the additive constant of `Q` is fixed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum QNormalization {
    /// `Q(y) = 0` at the given point.
    VanishAt(f64),
    /// Constant term zero.
    ZeroConstant,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PolyBundle {
    pub m: usize,
    pub eigenvalues: Vec<f64>,
    pub p: Poly,
    pub q: Poly,
    pub p_hat: Poly,
    pub q_hat: Poly,
}

impl PolyBundle {
    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `(m + 1) / 2`, the value of `Z` at the origin.
    pub fn z_center(&self) -> f64 {
        (self.m + 1) as f64 / 2.0
    }
}

/// `P`, `Q` and their reversals; `None` normalizes `Q(2/(m+1)) = 0`.
pub fn build_polys(eigs: &[f64], m: usize, normalize: Option<QNormalization>) -> Result<PolyBundle, KeError> {
    if eigs.is_empty() {
        return Err(KeError::EmptyEigenvalues);
    }
    if m != eigs.len() + 1 {
        return Err(KeError::DimensionMismatch { m, n_eigs: eigs.len() });
    }
    let mut eigenvalues = eigs.to_vec();
    eigenvalues.sort_by(f64::total_cmp);
    let mp1 = (m + 1) as f64;
    let roots: Vec<f64> = eigenvalues.iter().map(|l| 2.0 * l / mp1).collect();
    let p = Poly::from_roots(&roots);
    let dq = Poly(vec![0.0, mp1]).mul(&p);
    let raw = dq.antiderivative(0.0);
    let q = match normalize.unwrap_or(QNormalization::VanishAt(2.0 / mp1)) {
        QNormalization::VanishAt(y) => raw.add(&Poly::constant(-raw.eval(y))),
        QNormalization::ZeroConstant => raw,
    };
    Ok(PolyBundle {
        m,
        p_hat: p.reversed(m - 1),
        q_hat: q.reversed(m + 1),
        eigenvalues,
        p,
        q,
    })
}

/// Maximum residuals observed on the audit grid.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Residuals {
    pub ode: f64,
    pub phi: f64,
}

fn audit(sol: &SingularSolution, ode: impl Fn(f64) -> f64, phi: impl Fn(f64) -> f64) -> Result<Residuals, KeError> {
    let grid = chebyshev_grid(GRID_POINTS);
    sol.check_root_positive(&grid[..grid.len() - 1])?;
    let mut res = Residuals::default();
    for &r in &grid {
        res.ode = res.ode.max(ode(r).abs());
        res.phi = res.phi.max(phi(r).abs());
    }
    if !(res.ode < RESIDUAL_TOL) {
        return Err(KeError::Residual { what: "ODE", value: res.ode });
    }
    if !(res.phi < RESIDUAL_TOL) {
        return Err(KeError::Residual { what: "phi", value: res.phi });
    }
    Ok(res)
}

/// The solution `Z` and the derived `φ` on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct RadialSolution {
    pub poly: PolyBundle,
    pub z0: f64,
    /// `Z''(0)`.
    pub z2: f64,
    pub residuals: Residuals,
    sol: SingularSolution,
}

impl RadialSolution {
    pub fn z(&self, r: f64) -> f64 {
        self.sol.value(r)
    }

    pub fn dz(&self, r: f64) -> f64 {
        self.sol.derivative(r)
    }

    pub fn d2z(&self, r: f64) -> f64 {
        self.sol.second_derivative(r)
    }

    pub fn phi(&self, r: f64) -> f64 {
        self.sol.phi(r)
    }

    pub fn dphi(&self, r: f64) -> f64 {
        self.sol.phi_derivative(r)
    }

    pub fn m(&self) -> usize {
        self.poly.m
    }

    pub fn raw(&self) -> &SingularSolution {
        &self.sol
    }

    /// Taylor coefficients of `Z` in `t = r²` at the origin and their estimated radius.
    fn origin_series(&self, order: usize) -> (Vec<f64>, f64) {
        let num = self.poly.q_hat.scale(-1.0);
        let c = taylor::expand_square_at_origin(&num, &self.poly.p_hat, self.poly.z_center(), self.sol.w(0.0), order);
        let rho = taylor::radius_estimate(&c);
        (c, rho)
    }

    /// `Z` as a one-variable jet in `t = r²` about `t0 ∈ [0, 1]`.
    pub fn z_jet_in_square(&self, t0: f64, order: usize) -> Result<Jet, KeError> {
        let num = self.poly.q_hat.scale(-1.0);
        let den = &self.poly.p_hat;
        let coeffs = if t0 < SERIES_SWITCH {
            let (at0, rho) = self.origin_series(order + ORIGIN_EXTRA);
            if t0 < rho * ORIGIN_REACH {
                let mut c = taylor::shift(&at0, t0);
                c.truncate(order + 1);
                c
            } else {
                // Near the origin the solver's value is too coarse for the
                // direct recurrence, which divides by t0; continue the series instead.
                let ta = rho * ORIGIN_REACH;
                let ya = at0.iter().rev().fold(0.0, |acc, &a| acc * ta + a);
                let y = taylor::continue_square(&num, den, ta, ya, t0, CONTINUATION_ORDER)?;
                taylor::expand_square(&num, den, t0, y, order)
            }
        } else {
            taylor::expand_square(&num, den, t0, self.z(t0.sqrt()), order)
        };
        Ok(Jet::from_coeffs(&[t0], order, coeffs)?)
    }

    /// `φ` as a one-variable jet in `t = r²` about `t0 ∈ [0, 1)`.
    pub fn phi_jet_in_square(&self, t0: f64, order: usize) -> Result<Jet, KeError> {
        let e = 1.0 / (self.poly.m + 1) as f64;
        let k = order + ORIGIN_EXTRA;
        if t0 < SERIES_SWITCH && t0 < self.origin_series(k + 1).1 * ORIGIN_REACH {
            // At the origin t / (-N(Z)) is the reciprocal of (-N(Z)) / t, a shifted series.
            let z = self.z_jet_in_square(0.0, k + 1)?;
            let neg_n = poly_of_jet(&self.poly.q_hat, &z);
            let quotient = Jet::from_coeffs(&[0.0], k, neg_n.coeffs()[1..].to_vec())?;
            let phi = quotient.recip()?.powf(e)? * &z.truncate(k) * 2.0;
            let mut c = taylor::shift(phi.coeffs(), t0);
            c.truncate(order + 1);
            return Ok(Jet::from_coeffs(&[t0], order, c)?);
        }
        let z = self.z_jet_in_square(t0, order)?;
        let t = Jet::variable(0, &[t0], order)?;
        let neg_n = poly_of_jet(&self.poly.q_hat, &z);
        Ok(t.try_div(&neg_n)?.powf(e)? * &z * 2.0)
    }
}

/// Below this `t0` the square-variable series start from the origin series.
const SERIES_SWITCH: f64 = 0.04;
const ORIGIN_EXTRA: usize = 30;
/// Fraction of the origin series' radius within which it is re-centred directly.
const ORIGIN_REACH: f64 = 0.25;
const CONTINUATION_ORDER: usize = 24;

fn poly_of_jet(p: &Poly, x: &Jet) -> Jet {
    p.0.iter().rev().fold(x.zero_like(), |acc, &c| acc * x + c)
}

pub fn solve_radial(poly: &PolyBundle) -> Result<RadialSolution, KeError> {
    let max = poly.max_eigenvalue();
    if max >= 1.0 {
        return Err(KeError::Infeasible { max_eigenvalue: max });
    }
    let problem = SingularProblem::new(poly.q_hat.scale(-1.0), poly.p_hat.clone(), poly.z_center(), poly.m)?;
    let sol = problem.solve()?;
    let mp1 = (poly.m + 1) as f64;
    let residuals = audit(
        &sol,
        |r| r * sol.derivative(r) * poly.p_hat.eval(sol.value(r)) + poly.q_hat.eval(sol.value(r)),
        |r| {
            let z = sol.value(r);
            mp1 * r * z * sol.phi_derivative(r) + (mp1 - 2.0 * z) * sol.phi(r)
        },
    )?;
    Ok(RadialSolution {
        poly: poly.clone(),
        z0: sol.value(0.0),
        z2: sol.second_derivative(0.0),
        residuals,
        sol,
    })
}

/// Solution `ξ` of `r ξ' = -c ξ^{m+1} + a ξ - 1`, `ξ(1) = 0`.
#[derive(Clone, Debug)]
pub struct ReducedSolution {
    pub lambda: f64,
    pub m: usize,
    pub a: f64,
    pub c: f64,
    pub alpha: f64,
    pub residuals: Residuals,
    sol: SingularSolution,
}

impl ReducedSolution {
    pub fn xi(&self, r: f64) -> f64 {
        self.sol.value(r)
    }

    pub fn dxi(&self, r: f64) -> f64 {
        self.sol.derivative(r)
    }

    pub fn phi(&self, r: f64) -> f64 {
        self.sol.phi(r)
    }

    pub fn dphi(&self, r: f64) -> f64 {
        self.sol.phi_derivative(r)
    }

    /// `μ = 2λ/(m+1)`, linking `ξ = Z / (1 - μ Z)`.
    pub fn mu(&self) -> f64 {
        2.0 * self.lambda / (self.m + 1) as f64
    }
}

pub fn solve_reduced(lambda: f64, m: usize) -> Result<ReducedSolution, KeError> {
    if !(lambda < 0.0) {
        return Err(KeError::ReducedOutOfRange(lambda));
    }
    if m < 2 {
        return Err(KeError::DimensionMismatch { m, n_eigs: m.saturating_sub(1) });
    }
    let mf = m as f64;
    let mp1 = mf + 1.0;
    let a = -2.0 * lambda / mf;
    let c = -(2.0 / mp1).powi(m as i32 + 1) * (1.0 - lambda).powi(m as i32) * (1.0 + lambda / mf);
    let alpha = 2.0 * (1.0 - lambda) / mp1;
    let mut num = vec![0.0; m + 2];
    num[0] = -1.0;
    num[1] = a;
    num[m + 1] = -c;
    let xi0 = (mp1 / 2.0) / (1.0 - lambda);
    let problem = SingularProblem::new(Poly(num), Poly::constant(1.0), xi0, m)?;
    let sol = problem.solve()?;
    let residuals = audit(
        &sol,
        |r| {
            let x = sol.value(r);
            r * sol.derivative(r) - (-c * x.powi(m as i32 + 1) + a * x - 1.0)
        },
        |r| r * sol.value(r) * sol.phi_derivative(r) + (1.0 - alpha * sol.value(r)) * sol.phi(r),
    )?;
    Ok(ReducedSolution { lambda, m, a, c, alpha, residuals, sol })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Witness {
    /// The largest eigenvalue is 1, so the root `2λ/(m+1)` of `P` coincides
    /// with `y(0) = 2/(m+1)`.
    DegenerateRoot { y0: f64, root: f64 },
    /// `y = 2/(m+1) - r φ'/φ` reaches `2λ_max/(m+1)` at `r_star`.
    Crossing { r_star: f64, y_star: f64 },
    /// No crossing inside the unit interval could be exhibited.
    NotFound { reason: String },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub max_eigenvalue: f64,
    pub witness: Option<Witness>,
}

/// Solutions exist iff every eigenvalue is below 1; otherwise the report
/// carries a witness of the contradiction.
pub fn ke_feasibility(eigs: &[f64], m: usize) -> FeasibilityReport {
    let max_eigenvalue = eigs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let witness = if eigs.is_empty() {
        Some(Witness::NotFound { reason: KeError::EmptyEigenvalues.to_string() })
    } else if max_eigenvalue < 1.0 - 1e-12 {
        None
    } else if max_eigenvalue <= 1.0 + 1e-12 {
        let mp1 = (m + 1) as f64;
        Some(Witness::DegenerateRoot { y0: 2.0 / mp1, root: 2.0 * max_eigenvalue / mp1 })
    } else {
        Some(crossing_witness(eigs, m).unwrap_or_else(|e| Witness::NotFound { reason: e.to_string() }))
    };
    FeasibilityReport { feasible: witness.is_none(), max_eigenvalue, witness }
}

/// Integrates the branch regular at the origin, normalized by `|φ(0)| = 1`,
/// outward until `Z` reaches the pole `1/μ_max` of `1/P̂`.
fn crossing_witness(eigs: &[f64], m: usize) -> Result<Witness, KeError> {
    let poly = build_polys(eigs, m, None)?;
    let mp1 = (m + 1) as f64;
    let y_star = 2.0 * poly.max_eigenvalue() / mp1;
    let z_pole = 1.0 / y_star;
    let zc = poly.z_center();
    let problem = SingularProblem::new(poly.q_hat.scale(-1.0), poly.p_hat.clone(), zc, m)?;
    let p_center = poly.p_hat.eval(zc);
    let w0 = -mp1.powf(mp1) / (2.0 * p_center.abs());
    let tol = Tolerance::default();
    let halfway = 0.5 * (zc - z_pole);
    let (r_s, w_s, stopped) = integrate_until(
        |r, w, d| d[0] = problem.w_slope(r, w[0]),
        0.0,
        &[w0],
        1.0,
        tol,
        |r, w| zc - (zc + r * r * w[0]) >= halfway,
    )?;
    if !stopped {
        return Ok(Witness::NotFound { reason: "Z stays away from the pole on [0, 1]".into() });
    }
    let z_s = zc + r_s * r_s * w_s[0];
    let sign = problem.num.eval(z_s).signum();
    // dr/dZ = r D(Z) / N(Z) stays finite through the pole of 1/D.
    let out = integrate(
        |z, r, d| d[0] = r[0] * problem.den.eval(z) / problem.num.eval(z),
        z_s,
        &[r_s],
        &[z_pole],
        tol,
        |z, r| {
            if problem.num.eval(z).signum() != sign {
                Some("Z reached a root of the numerator first".into())
            } else if r[0] > 1.0 {
                Some("crossing lies beyond r = 1".into())
            } else {
                None
            }
        },
    );
    match out {
        Ok(v) => {
            let r_star = v[0][0];
            if r_star > 0.0 && r_star < 1.0 {
                Ok(Witness::Crossing { r_star, y_star })
            } else {
                Ok(Witness::NotFound { reason: format!("crossing radius {r_star} is outside (0, 1)") })
            }
        }
        Err(e) => Ok(Witness::NotFound { reason: e.to_string() }),
    }
}

/// Least-squares fit of `φ^{m+1}` by a polynomial of degree `m + 1` in `r²`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RationalityReport {
    /// Whether all eigenvalues coincide, the setting the probe is meant for.
    pub single_eigenvalue: bool,
    pub degree: usize,
    /// Coefficients in ascending powers of `r²`.
    pub coeffs: Vec<f64>,
    pub max_residual: f64,
}

/// Least-squares polynomial fit; returns ascending coefficients and the
/// largest absolute residual at the samples.
pub fn fit_polynomial(xs: &[f64], ys: &[f64], degree: usize) -> (Vec<f64>, f64) {
    let a = DMatrix::from_fn(xs.len(), degree + 1, |i, k| xs[i].powi(k as i32));
    let b = DVector::from_column_slice(ys);
    let svd = a.clone().svd(true, true);
    let coeffs = svd
        .solve(&b, 1e-14)
        .map(|c| c.iter().copied().collect::<Vec<f64>>())
        .unwrap_or_else(|_| vec![0.0; degree + 1]);
    let residual = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| (Poly(coeffs.clone()).eval(x) - y).abs())
        .fold(0.0, f64::max);
    (coeffs, residual)
}

pub fn rationality_probe(sol: &RadialSolution) -> RationalityReport {
    let eigs = &sol.poly.eigenvalues;
    let single_eigenvalue = eigs.iter().all(|l| (l - eigs[0]).abs() <= 1e-12 * (1.0 + eigs[0].abs()));
    let m = sol.m();
    let grid = chebyshev_grid(64);
    let ts: Vec<f64> = grid.iter().map(|r| r * r).collect();
    let vals: Vec<f64> = grid.iter().map(|&r| sol.phi(r).powi(m as i32 + 1)).collect();
    let (coeffs, max_residual) = fit_polynomial(&ts, &vals, m + 1);
    RationalityReport { single_eigenvalue, degree: m + 1, coeffs, max_residual }
}

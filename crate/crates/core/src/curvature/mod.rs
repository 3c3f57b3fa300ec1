//! Kähler curvature at a point: metric, Ricci endomorphism, scalar and
//! central curvature, Christoffel symbols, covariant derivatives, the
//! Laplacian and the Lichnerowicz operator.

mod geometry;
pub mod linalg;
mod tensor;

pub use geometry::{ddbar, Geometry};
pub use tensor::{Slot, Tensor};

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::charts::{ChartError, Expr, KahlerChart};
use crate::jets::{CJet, Jet, JetError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurvatureError {
    #[error(transparent)]
    Chart(#[from] ChartError),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("metric is not positive definite (smallest eigenvalue {0:e})")]
    DegenerateMetric(f64),
    #[error("Ricci eigenvalue has imaginary part {0:e}")]
    NonRealEigenvalue(f64),
    #[error("eigen-solver failure: {0}")]
    EigenSolver(String),
    #[error("jet order {have} is too low; {needed} needed")]
    InsufficientOrder { needed: usize, have: usize },
    #[error("potential jet has an odd number ({0}) of real variables")]
    OddVariableCount(usize),
    #[error("scalar curvature is not constant: max |∇R| = {max_grad:e}")]
    NotConstantScalar { max_grad: f64 },
}

/// Everything computable about the curvature at one point.
///
/// Matrix layout is `m[(a, b)] = T_{a b̄}`; `g_inv[(a, b)] = g^{a b̄}`;
/// `christoffel[(c * n + a) * n + b] = Γ^c_{ab}`;
/// `riem[((μ * n + ν) * n + α) * n + β] = R_{μ ν̄ α β̄}`.
#[derive(Clone, Debug)]
pub struct CurvatureFrame {
    pub n: usize,
    pub g: DMatrix<Complex64>,
    pub g_inv: DMatrix<Complex64>,
    pub ricci: DMatrix<Complex64>,
    pub ricci_endo: DMatrix<Complex64>,
    pub eigenvalues: Vec<f64>,
    pub scalar: f64,
    /// `det(Ric) / det(g)`.
    pub central: f64,
    /// `det(Ric · g^{-1})`, kept for cross-checking.
    pub central_via_endo: f64,
    pub christoffel: Vec<Complex64>,
    pub riem: Vec<Complex64>,
}

impl CurvatureFrame {
    pub fn gamma(&self, c: usize, a: usize, b: usize) -> Complex64 {
        self.christoffel[(c * self.n + a) * self.n + b]
    }

    pub fn riemann(&self, mu: usize, nu: usize, alpha: usize, beta: usize) -> Complex64 {
        let n = self.n;
        self.riem[((mu * n + nu) * n + alpha) * n + beta]
    }
}

/// Curvature frame of `chart` at `p` from a potential jet of `order`.
pub fn frame_at(chart: &KahlerChart, p: &[Complex64], order: usize) -> Result<CurvatureFrame, CurvatureError> {
    Geometry::from_potential(chart.potential_jet(p, order)?)?.frame()
}

/// Scalar functions the covariant-derivative machinery knows how to produce.
#[derive(Clone, Debug, PartialEq)]
pub enum ScalarField {
    Constant(f64),
    /// The chart's Kähler potential.
    Potential,
    ScalarCurvature,
    /// Central curvature `C`.
    Central,
    /// Squared norm `Λ` of the trace-modified Ricci tensor.
    Lambda,
    /// A real expression in `z1..zn`.
    Expression(Expr),
}

impl ScalarField {
    /// Potential derivatives consumed before any covariant derivative is taken.
    pub fn intrinsic_order(&self) -> usize {
        match self {
            ScalarField::ScalarCurvature | ScalarField::Central | ScalarField::Lambda => 4,
            _ => 0,
        }
    }

    pub fn jet(&self, geo: &Geometry) -> Result<Jet, CurvatureError> {
        let zero = geo.potential().zero_like();
        Ok(match self {
            ScalarField::Constant(c) => zero.constant_like(*c),
            ScalarField::Potential => geo.potential().clone(),
            ScalarField::ScalarCurvature => geo.scalar_curvature(),
            ScalarField::Central => geo.central_curvature()?,
            ScalarField::Lambda => geo.lambda(),
            ScalarField::Expression(e) => e.eval_real(&zero)?,
        })
    }
}

/// All covariant derivatives of a scalar up to a fixed count, for every
/// sequence of slot types.
#[derive(Clone, Debug)]
pub struct CovariantStack {
    /// `levels[k]` holds the `2^k` tensors of rank `k`, keyed by slot sequence.
    pub levels: Vec<Vec<Tensor>>,
}

impl CovariantStack {
    pub fn get(&self, slots: &[Slot]) -> Option<&Tensor> {
        self.levels.get(slots.len())?.iter().find(|t| t.slots == slots)
    }
}

fn geometry(chart: &KahlerChart, p: &[Complex64], order: usize) -> Result<Geometry, CurvatureError> {
    Geometry::from_potential(chart.potential_jet(p, order)?)
}

/// `∇…∇Φ` up to `upto` derivatives, using a potential jet of `order`.
pub fn covariant_derivs(
    field: &ScalarField,
    chart: &KahlerChart,
    p: &[Complex64],
    upto: usize,
    order: usize,
) -> Result<CovariantStack, CurvatureError> {
    let needed = field.intrinsic_order().max(3) + upto;
    if order < needed.max(4) {
        return Err(CurvatureError::InsufficientOrder { needed, have: order });
    }
    let geo = geometry(chart, p, order)?;
    let n = geo.n();
    let mut levels = vec![vec![Tensor::scalar(n, CJet::real(field.jet(&geo)?))]];
    for k in 0..upto {
        let mut next = Vec::with_capacity(levels[k].len() * 2);
        for t in &levels[k] {
            next.push(geo.covd(t, Slot::Hol)?);
            next.push(geo.covd(t, Slot::Anti)?);
        }
        levels.push(next);
    }
    Ok(CovariantStack { levels })
}

/// Complex Laplacian `g^{a b̄} ∇_a ∇_b̄ Φ` at `p`.
pub fn laplacian(field: &ScalarField, chart: &KahlerChart, p: &[Complex64], order: usize) -> Result<f64, CurvatureError> {
    let geo = geometry(chart, p, order)?;
    Ok(geo.laplacian(&field.jet(&geo)?)?.value())
}

/// Tolerance on `|∇R|` for the numeric constant-scalar-curvature check.
pub const CSC_TOLERANCE: f64 = 1e-8;

/// Confirms constant scalar curvature from catalog metadata or, failing
/// that, from `|∇R|` at the point.
pub fn assert_csc(chart: &KahlerChart, geo: &Geometry) -> Result<(), CurvatureError> {
    if chart.known_scalar_curvature().is_some() {
        return Ok(());
    }
    let max_grad = geo.scalar_gradient_norm()?;
    let scale = 1.0 + geo.scalar_curvature().value().abs();
    if max_grad < CSC_TOLERANCE * scale {
        Ok(())
    } else {
        Err(CurvatureError::NotConstantScalar { max_grad })
    }
}

/// `LΦ = Δ²Φ + R^{a b̄} ∇_a ∇_b̄ Φ`, valid on constant scalar curvature charts.
pub fn lichnerowicz(field: &ScalarField, chart: &KahlerChart, p: &[Complex64], order: usize) -> Result<f64, CurvatureError> {
    let geo = geometry(chart, p, order)?;
    assert_csc(chart, &geo)?;
    Ok(geo.lichnerowicz_unchecked(&field.jet(&geo)?)?.value())
}

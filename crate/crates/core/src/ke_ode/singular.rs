//! The radial problem `r Y' = N(Y) / D(Y)`, `Y(1) = 0`, with a regular
//! singular point at `r = 0` where `Y = y0`, `N(y0) = 0` and
//! `N'(y0) = 2 D(y0)`.
//!
//! Near the origin the solution is tracked through `Y = y0 + r² W`, which
//! satisfies the nonsingular equation `W' = r W² h(Y) / D(Y)` with
//! `N = (Y - y0) g` and `g - 2D = (Y - y0) h`.

use super::cheb::{lobatto_nodes, Cheb};
use super::dopri::{integrate, Tolerance};
use super::poly::Poly;
use super::KeError;

/// Radius below which the regularized variable is used.
pub const CUTOFF: f64 = 0.1;
const BREAKS: [f64; 5] = [CUTOFF, 0.25, 0.5, 0.75, 1.0];
const START_NODES: usize = 24;
const MAX_NODES: usize = 192;
const TAIL_TOL: f64 = 1e-13;

#[derive(Clone, Debug)]
pub struct SingularProblem {
    pub num: Poly,
    pub den: Poly,
    pub y0: f64,
    pub m: usize,
    g: Poly,
    h: Poly,
}

impl SingularProblem {
    pub fn new(num: Poly, den: Poly, y0: f64, m: usize) -> Result<SingularProblem, KeError> {
        let scale = 1.0 + num.0.iter().map(|c| c.abs() * y0.abs().max(1.0).powi(num.0.len() as i32)).sum::<f64>();
        let (g, rem) = num.deflate(y0);
        if rem.abs() > 1e-10 * scale {
            return Err(KeError::NotRegular(format!("N(y0) = {rem:e} is not zero")));
        }
        let d0 = den.eval(y0);
        if d0.abs() < 1e-12 {
            return Err(KeError::NotRegular("D vanishes at y0".into()));
        }
        let (h, rem2) = g.add(&den.scale(-2.0)).deflate(y0);
        if rem2.abs() > 1e-9 * scale {
            return Err(KeError::NotRegular(format!("N'(y0) - 2 D(y0) = {rem2:e} is not zero")));
        }
        Ok(SingularProblem { num, den, y0, m, g, h })
    }

    /// `N(y) / (r D(y))`.
    pub fn slope(&self, r: f64, y: f64) -> f64 {
        self.num.eval(y) / (r * self.den.eval(y))
    }

    /// `r W² h(Y) / D(Y)` with `Y = y0 + r² W`.
    pub fn w_slope(&self, r: f64, w: f64) -> f64 {
        let y = self.y0 + r * r * w;
        r * w * w * self.h.eval(y) / self.den.eval(y)
    }

    /// `N(y) / (y - y0)`.
    pub fn g(&self) -> &Poly {
        &self.g
    }

    /// Solves inward from `r = 1`.
    pub fn solve(&self) -> Result<SingularSolution, KeError> {
        let mut n = START_NODES;
        loop {
            let sol = self.solve_with_nodes(n)?;
            if sol.max_tail() < TAIL_TOL * (1.0 + self.y0.abs()) || n >= MAX_NODES {
                return Ok(sol);
            }
            n *= 2;
        }
    }

    fn solve_with_nodes(&self, n: usize) -> Result<SingularSolution, KeError> {
        let tol = Tolerance::default();
        let pieces: Vec<Vec<f64>> = BREAKS.windows(2).rev().map(|w| lobatto_nodes(w[0], w[1], n)).collect();
        let targets: Vec<f64> = pieces.iter().flatten().copied().collect();
        let y0 = self.y0;
        let den = &self.den;
        let ys = integrate(
            |r, y, d| d[0] = self.slope(r, y[0]),
            1.0,
            &[0.0],
            &targets,
            tol,
            |r, y| {
                if r < 1.0 && !(y[0] > 0.0 && y[0] < y0) {
                    Some(format!("Y = {} left (0, {y0})", y[0]))
                } else if den.eval(y[0]) <= 0.0 {
                    Some(format!("D(Y) <= 0 at Y = {}", y[0]))
                } else {
                    None
                }
            },
        )?;
        let mut y_pieces = Vec::new();
        let mut offset = 0;
        for (w, nodes) in BREAKS.windows(2).rev().zip(&pieces) {
            let vals: Vec<f64> = ys[offset..offset + nodes.len()].iter().map(|v| v[0]).collect();
            offset += nodes.len();
            let dvals: Vec<f64> = nodes.iter().zip(&vals).map(|(&r, &y)| self.slope(r, y)).collect();
            let dy = Cheb::from_lobatto_values(w[0], w[1], &dvals);
            y_pieces.push(Piece {
                y: Cheb::from_lobatto_values(w[0], w[1], &vals),
                d2y: dy.derivative(),
                dy,
            });
        }
        y_pieces.reverse();

        let y_eps = ys.last().expect("targets are nonempty")[0];
        let w_eps = (y_eps - y0) / (CUTOFF * CUTOFF);
        let w_nodes = lobatto_nodes(0.0, CUTOFF, n);
        let ws = integrate(|r, w, d| d[0] = self.w_slope(r, w[0]), CUTOFF, &[w_eps], &w_nodes, tol, |r, w| {
            let y = y0 + r * r * w[0];
            (den.eval(y) <= 0.0).then(|| format!("D(Y) <= 0 at Y = {y}"))
        })?;
        let wv: Vec<f64> = ws.iter().map(|v| v[0]).collect();
        let dwv: Vec<f64> = w_nodes.iter().zip(&wv).map(|(&r, &w)| self.w_slope(r, w)).collect();
        let dw = Cheb::from_lobatto_values(0.0, CUTOFF, &dwv);
        let w_piece = Piece {
            y: Cheb::from_lobatto_values(0.0, CUTOFF, &wv),
            d2y: dw.derivative(),
            dy: dw,
        };
        Ok(SingularSolution {
            problem: self.clone(),
            nodes_per_piece: n,
            w_piece,
            y_pieces,
        })
    }
}

#[derive(Clone, Debug)]
struct Piece {
    y: Cheb,
    dy: Cheb,
    d2y: Cheb,
}

impl Piece {
    fn tail(&self) -> f64 {
        self.y.tail()
    }
}

/// Piecewise Chebyshev representation of the solution on `[-1, 1]`,
/// extended evenly. Outside `[-1, 1]` every evaluator returns NaN.
#[derive(Clone, Debug)]
pub struct SingularSolution {
    pub problem: SingularProblem,
    pub nodes_per_piece: usize,
    w_piece: Piece,
    y_pieces: Vec<Piece>,
}

impl SingularSolution {
    fn piece(&self, r: f64) -> &Piece {
        self.y_pieces
            .iter()
            .find(|p| r <= p.y.b)
            .unwrap_or_else(|| self.y_pieces.last().expect("pieces are nonempty"))
    }

    /// Largest trailing Chebyshev coefficient over all pieces.
    pub fn max_tail(&self) -> f64 {
        self.y_pieces.iter().map(Piece::tail).fold(self.w_piece.tail() * CUTOFF * CUTOFF, f64::max)
    }

    /// `W = (Y - y0) / r²`, valid on `[0, CUTOFF]`.
    pub fn w(&self, r: f64) -> f64 {
        self.w_piece.y.eval(r.abs())
    }

    /// `(Y, Y', Y'')` at `r`.
    pub fn eval3(&self, r: f64) -> [f64; 3] {
        let s = r.abs();
        if s > 1.0 {
            return [f64::NAN; 3];
        }
        let sign = if r < 0.0 { -1.0 } else { 1.0 };
        let [y, dy, d2y] = if s < CUTOFF {
            let p = &self.w_piece;
            let (w, dw, d2w) = (p.y.eval(s), p.dy.eval(s), p.d2y.eval(s));
            [
                self.problem.y0 + s * s * w,
                2.0 * s * w + s * s * dw,
                2.0 * w + 4.0 * s * dw + s * s * d2w,
            ]
        } else {
            let p = self.piece(s);
            [p.y.eval(s), p.dy.eval(s), p.d2y.eval(s)]
        };
        [y, sign * dy, d2y]
    }

    pub fn value(&self, r: f64) -> f64 {
        self.eval3(r)[0]
    }

    pub fn derivative(&self, r: f64) -> f64 {
        self.eval3(r)[1]
    }

    pub fn second_derivative(&self, r: f64) -> f64 {
        self.eval3(r)[2]
    }

    /// The quantity raised to `1/(m+1)` in `φ`: `r² / (-N(Y))`, or
    /// `1 / (-W g(Y))` near the origin.
    pub fn root_argument(&self, r: f64) -> f64 {
        let s = r.abs();
        let y = self.value(s);
        if s < CUTOFF {
            1.0 / (-self.w(s) * self.problem.g.eval(y))
        } else {
            s * s / (-self.problem.num.eval(y))
        }
    }

    /// `φ = 2 (r² / (-N(Y)))^{1/(m+1)} Y` on the positive real root branch.
    pub fn phi(&self, r: f64) -> f64 {
        let e = 1.0 / (self.problem.m + 1) as f64;
        2.0 * self.root_argument(r).powf(e) * self.value(r)
    }

    /// `φ'`, written so that it stays finite where `Y = 0`.
    pub fn phi_derivative(&self, r: f64) -> f64 {
        let s = r.abs();
        let sign = if r < 0.0 { -1.0 } else { 1.0 };
        let e = 1.0 / (self.problem.m + 1) as f64;
        let [y, dy, _] = self.eval3(s);
        let pre = 2.0 * self.root_argument(s).powf(e);
        let log_arg_deriv = if s < CUTOFF {
            let p = &self.w_piece;
            let (w, dw) = (p.y.eval(s), p.dy.eval(s));
            let g = &self.problem.g;
            -(dw / w + g.derivative().eval(y) * dy / g.eval(y))
        } else {
            let num = &self.problem.num;
            2.0 / s - num.derivative().eval(y) * dy / num.eval(y)
        };
        sign * pre * (dy + y * e * log_arg_deriv)
    }

    /// First grid point where the root argument is not positive.
    pub fn check_root_positive(&self, grid: &[f64]) -> Result<(), KeError> {
        for &r in grid {
            let a = self.root_argument(r);
            if !(a > 0.0 && a.is_finite()) {
                return Err(KeError::NonPositiveRoot { r });
            }
        }
        Ok(())
    }
}

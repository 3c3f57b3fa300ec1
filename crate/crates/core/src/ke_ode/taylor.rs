//! Power-series continuation of `r Y' = N(Y) / D(Y)` away from the origin.
//! Independent of the Chebyshev solver; used to cross-check it.

use super::poly::Poly;
use super::KeError;

fn series_mul(a: &[f64], b: &[f64], len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    for (i, x) in a.iter().enumerate().take(len) {
        for (j, y) in b.iter().enumerate().take(len - i) {
            out[i + j] += x * y;
        }
    }
    out
}

fn series_div(a: &[f64], b: &[f64], len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    for k in 0..len {
        let mut acc = a.get(k).copied().unwrap_or(0.0);
        for j in 1..=k.min(b.len() - 1) {
            acc -= b[j] * out[k - j];
        }
        out[k] = acc / b[0];
    }
    out
}

fn series_poly(p: &Poly, y: &[f64], len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    for &c in p.0.iter().rev() {
        out = series_mul(&out, y, len);
        out[0] += c;
    }
    out
}

/// Taylor coefficients of the solution through `(r0, y_r0)`, in powers of `r - r0`.
pub fn expand(num: &Poly, den: &Poly, r0: f64, y_r0: f64, order: usize) -> Vec<f64> {
    let mut y = vec![y_r0];
    for k in 0..order {
        let len = k + 1;
        let f = series_div(&series_poly(num, &y, len), &series_poly(den, &y, len), len);
        y.push((f[k] - k as f64 * y[k]) / (r0 * (k + 1) as f64));
    }
    y
}

/// Root-test estimate of the radius of convergence from the upper half of the coefficients.
pub fn radius_estimate(coeffs: &[f64]) -> f64 {
    let n = coeffs.len();
    coeffs
        .iter()
        .enumerate()
        .skip(n / 2)
        .filter(|(_, c)| **c != 0.0)
        .map(|(k, c)| c.abs().powf(-1.0 / k as f64))
        .fold(f64::INFINITY, f64::min)
}

/// Continues the solution from `(r_from, y_from)` to `r_to` by re-expanding
/// every `step`; each step must stay within a third of the estimated radius.
/// Returns `(Y, Y')` at `r_to`.
pub fn continue_to(
    num: &Poly,
    den: &Poly,
    r_from: f64,
    y_from: f64,
    r_to: f64,
    order: usize,
    step: f64,
) -> Result<(f64, f64), KeError> {
    let mut r = r_from;
    let mut y = y_from;
    let dir = (r_to - r_from).signum();
    loop {
        let c = expand(num, den, r, y, order);
        let remaining = (r_to - r).abs();
        let h = remaining.min(step);
        let radius = radius_estimate(&c);
        if h > radius / 3.0 {
            return Err(KeError::IntegrationFailed {
                last_valid_r: r,
                reason: format!("series step {h} exceeds a third of the radius {radius}"),
            });
        }
        let dh = dir * h;
        let value = c.iter().rev().fold(0.0, |acc, &a| acc * dh + a);
        let slope = c.iter().enumerate().skip(1).rev().fold(0.0, |acc, (k, &a)| acc * dh + k as f64 * a);
        r += dh;
        y = value;
        if remaining <= step {
            return Ok((y, slope));
        }
    }
}

/// Taylor coefficients of `Y` in powers of `t - t0`, where `t = r²` turns
/// the equation into `2 t dY/dt = N(Y) / D(Y)`. Needs `t0 > 0`.
pub fn expand_square(num: &Poly, den: &Poly, t0: f64, y_t0: f64, order: usize) -> Vec<f64> {
    let mut y = vec![y_t0];
    for k in 0..order {
        let len = k + 1;
        let f = series_div(&series_poly(num, &y, len), &series_poly(den, &y, len), len);
        y.push((f[k] - 2.0 * k as f64 * y[k]) / (2.0 * t0 * (k + 1) as f64));
    }
    y
}

/// Taylor coefficients of `Y` in powers of `t` at the regular singular point,
/// where `Y(0) = y0` and the free coefficient `dY/dt(0) = w0` selects the solution.
/// Relies on `N'(y0) = 2 D(y0)`.
pub fn expand_square_at_origin(num: &Poly, den: &Poly, y0: f64, w0: f64, order: usize) -> Vec<f64> {
    let mut y = vec![y0, w0];
    for k in 2..=order {
        // With y_k = 0 the k-th coefficient of N/D is everything except 2 y_k.
        y.push(0.0);
        let len = k + 1;
        let f = series_div(&series_poly(num, &y, len), &series_poly(den, &y, len), len);
        y[k] = f[k] / (2.0 * (k - 1) as f64);
    }
    y.truncate(order + 1);
    y
}

/// Re-centres `sum c_k s^k` at `s0`: coefficients of the same function in `s - s0`.
pub fn shift(c: &[f64], s0: f64) -> Vec<f64> {
    let mut b = c.to_vec();
    // Repeated synthetic division by (s - s0).
    let n = b.len();
    for i in 0..n {
        for k in (i..n - 1).rev() {
            b[k] += s0 * b[k + 1];
        }
    }
    b
}

/// Value at `t_to` of the solution of `2 t dY/dt = N(Y) / D(Y)` through
/// `(t_from, y_from)`, re-expanding in steps of a quarter of the estimated
/// radius. Both ends must be positive.
pub fn continue_square(num: &Poly, den: &Poly, t_from: f64, y_from: f64, t_to: f64, order: usize) -> Result<f64, KeError> {
    const MAX_STEPS: usize = 10_000;
    let (mut t, mut y) = (t_from, y_from);
    for _ in 0..MAX_STEPS {
        let remaining = t_to - t;
        if remaining == 0.0 {
            return Ok(y);
        }
        let c = expand_square(num, den, t, y, order);
        let h = remaining.abs().min(radius_estimate(&c) / 4.0).copysign(remaining);
        if !(h.abs() > 0.0) || !y.is_finite() {
            break;
        }
        y = c.iter().rev().fold(0.0, |acc, &a| acc * h + a);
        t = if h == remaining { t_to } else { t + h };
    }
    Err(KeError::IntegrationFailed {
        last_valid_r: t.max(0.0).sqrt(),
        reason: format!("series continuation in r² stalled at {t}"),
    })
}

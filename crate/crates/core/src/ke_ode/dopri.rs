//! Adaptive Dormand–Prince 5(4) integration that lands exactly on requested
//! output points.

use super::KeError;

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { rtol: 1e-12, atol: 1e-12 }
    }
}

/// What to do after an accepted step.
pub enum Control {
    Continue,
    /// Stop successfully at the current point.
    Stop,
    /// Abort; the message is reported with the last accepted `t`.
    Fail(String),
}

/// Integrates `y' = f(t, y)` from `(t0, y0)` through `targets` (monotone in the
/// direction of travel) and returns the state at each target.
///
/// `guard(t, y)` is checked after every accepted step; returning an error
/// message stops the integration and reports the last accepted `t`.
pub fn integrate<F, G>(
    f: F,
    t0: f64,
    y0: &[f64],
    targets: &[f64],
    tol: Tolerance,
    mut guard: G,
) -> Result<Vec<Vec<f64>>, KeError>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    G: FnMut(f64, &[f64]) -> Option<String>,
{
    let (out, _) = drive(f, t0, y0, targets, tol, |t, y| match guard(t, y) {
        Some(reason) => Control::Fail(reason),
        None => Control::Continue,
    })?;
    Ok(out)
}

/// Integrates toward `t_end` until `stop(t, y)` holds; returns the final point
/// and whether the stop condition fired.
pub fn integrate_until<F, S>(
    f: F,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    tol: Tolerance,
    mut stop: S,
) -> Result<(f64, Vec<f64>, bool), KeError>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    S: FnMut(f64, &[f64]) -> bool,
{
    let (out, last) = drive(f, t0, y0, &[t_end], tol, |t, y| {
        if stop(t, y) {
            Control::Stop
        } else {
            Control::Continue
        }
    })?;
    match last {
        Some((t, y)) => Ok((t, y, true)),
        None => Ok((t_end, out.into_iter().next().unwrap_or_else(|| y0.to_vec()), false)),
    }
}

type Stopped = Option<(f64, Vec<f64>)>;

fn drive<F, G>(
    mut f: F,
    t0: f64,
    y0: &[f64],
    targets: &[f64],
    tol: Tolerance,
    mut on_step: G,
) -> Result<(Vec<Vec<f64>>, Stopped), KeError>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    G: FnMut(f64, &[f64]) -> Control,
{
    let dim = y0.len();
    let Some(&t_end) = targets.last() else {
        return Ok((Vec::new(), None));
    };
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let span = (t_end - t0).abs();
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k = vec![vec![0.0; dim]; 7];
    let mut tmp = vec![0.0; dim];
    let mut out = Vec::with_capacity(targets.len());
    let mut next = 0;
    let mut h = (1e-3 * span).max(1e-12) * dir;
    let fail = |t: f64, reason: String| KeError::IntegrationFailed { last_valid_r: t, reason };

    while next < targets.len() && (targets[next] - t) * dir <= 0.0 {
        out.push(y.clone());
        next += 1;
    }
    f(t, &y, &mut k[0]);
    let mut steps = 0usize;
    while next < targets.len() {
        steps += 1;
        if steps > 2_000_000 {
            return Err(fail(t, "step budget exhausted".into()));
        }
        let target = targets[next];
        let planned = h;
        let mut hit = false;
        if (t + h - target) * dir >= 0.0 {
            h = target - t;
            hit = true;
        }
        for s in 1..7 {
            for i in 0..dim {
                let mut acc = y[i];
                for j in 0..s {
                    acc += h * A[s][j] * k[j][i];
                }
                tmp[i] = acc;
            }
            f(t + C[s] * h, &tmp, &mut k[s]);
        }
        // The last row of A is the fifth-order weights, so tmp is the new state.
        let mut err = 0.0f64;
        for i in 0..dim {
            let mut e = 0.0;
            for s in 0..7 {
                e += E[s] * k[s][i];
            }
            let sc = tol.atol + tol.rtol * y[i].abs().max(tmp[i].abs());
            err = err.max((h * e / sc).abs());
        }
        if !err.is_finite() || tmp.iter().any(|v| !v.is_finite()) {
            h *= 0.25;
            if h.abs() < 1e-14 * (1.0 + t.abs()) {
                return Err(fail(t, "non-finite state".into()));
            }
            continue;
        }
        if err <= 1.0 {
            t = if hit { target } else { t + h };
            y.copy_from_slice(&tmp);
            let last = k[6].clone();
            k[0] = last;
            match on_step(t, &y) {
                Control::Continue => {}
                Control::Stop => return Ok((out, Some((t, y)))),
                Control::Fail(reason) => return Err(fail(t, reason)),
            }
            if hit {
                out.push(y.clone());
                next += 1;
                while next < targets.len() && (targets[next] - t) * dir <= 0.0 {
                    out.push(y.clone());
                    next += 1;
                }
            }
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        let new_h = h * factor;
        if new_h.abs() < 1e-15 * (1.0 + t.abs()) {
            return Err(fail(t, "step size underflow".into()));
        }
        // A step truncated to land on a target should not shrink the next one.
        h = if hit && err <= 1.0 && planned.abs() > new_h.abs() { planned } else { new_h };
    }
    Ok((out, None))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_and_oscillator() {
        let targets = [0.5, 1.0, 2.0];
        let out = integrate(|_, y, d| d[0] = -y[0], 0.0, &[1.0], &targets, Tolerance::default(), |_, _| None).unwrap();
        for (t, y) in targets.iter().zip(&out) {
            assert!((y[0] - (-t).exp()).abs() < 1e-11);
        }
        let back = integrate(
            |_, y, d| {
                d[0] = y[1];
                d[1] = -y[0];
            },
            3.0,
            &[3.0f64.sin(), 3.0f64.cos()],
            &[1.0],
            Tolerance::default(),
            |_, _| None,
        )
        .unwrap();
        assert!((back[0][0] - 1.0f64.sin()).abs() < 1e-11);
    }

    #[test]
    fn guard_reports_last_point() {
        let err = integrate(|_, _, d| d[0] = 1.0, 0.0, &[0.0], &[2.0], Tolerance::default(), |_, y| {
            (y[0] > 1.0).then(|| "too big".to_string())
        })
        .unwrap_err();
        match err {
            KeError::IntegrationFailed { last_valid_r, .. } => assert!(last_valid_r > 1.0 && last_valid_r <= 2.0),
            e => panic!("{e}"),
        }
        let (t, y, stopped) =
            integrate_until(|_, _, d| d[0] = 1.0, 0.0, &[0.0], 5.0, Tolerance::default(), |_, y| y[0] > 1.0).unwrap();
        assert!(stopped && t > 1.0 && (y[0] - t).abs() < 1e-12);
    }
}

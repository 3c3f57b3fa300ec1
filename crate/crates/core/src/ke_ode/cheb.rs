use std::f64::consts::PI;

/// Chebyshev series on `[a, b]`.
#[derive(Clone, Debug)]
pub struct Cheb {
    pub a: f64,
    pub b: f64,
    pub coeffs: Vec<f64>,
}

/// The `n + 1` Chebyshev–Lobatto nodes of `[a, b]`, from `b` down to `a`.
pub fn lobatto_nodes(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..=n)
        .map(|j| {
            if j == 0 {
                b
            } else if j == n {
                a
            } else {
                0.5 * (a + b) + 0.5 * (b - a) * (PI * j as f64 / n as f64).cos()
            }
        })
        .collect()
}

impl Cheb {
    /// Interpolant through values at `lobatto_nodes(a, b, n)`.
    pub fn from_lobatto_values(a: f64, b: f64, values: &[f64]) -> Cheb {
        let n = values.len() - 1;
        let coeffs = (0..=n)
            .map(|k| {
                let mut s = 0.0;
                for (j, v) in values.iter().enumerate() {
                    let w = if j == 0 || j == n { 0.5 } else { 1.0 };
                    s += w * v * (PI * (j * k) as f64 / n as f64).cos();
                }
                let c = 2.0 * s / n as f64;
                if k == 0 || k == n {
                    0.5 * c
                } else {
                    c
                }
            })
            .collect();
        Cheb { a, b, coeffs }
    }

    fn to_unit(&self, x: f64) -> f64 {
        (2.0 * x - self.a - self.b) / (self.b - self.a)
    }

    /// Clenshaw evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        let t = self.to_unit(x);
        let (mut b1, mut b2) = (0.0, 0.0);
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = 2.0 * t * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        t * b1 - b2 + self.coeffs[0]
    }

    pub fn derivative(&self) -> Cheb {
        let n = self.coeffs.len();
        if n <= 1 {
            return Cheb {
                a: self.a,
                b: self.b,
                coeffs: vec![0.0],
            };
        }
        let mut d = vec![0.0; n];
        for k in (1..n).rev() {
            let next = if k + 1 < n { d[k + 1] } else { 0.0 };
            d[k - 1] = next + 2.0 * k as f64 * self.coeffs[k];
        }
        d[0] *= 0.5;
        d.truncate(n - 1);
        let s = 2.0 / (self.b - self.a);
        Cheb {
            a: self.a,
            b: self.b,
            coeffs: d.into_iter().map(|c| c * s).collect(),
        }
    }

    /// Magnitude of the last few coefficients, a proxy for truncation error.
    pub fn tail(&self) -> f64 {
        let n = self.coeffs.len();
        self.coeffs[n.saturating_sub(3)..].iter().map(|c| c.abs()).fold(0.0, f64::max)
    }
}

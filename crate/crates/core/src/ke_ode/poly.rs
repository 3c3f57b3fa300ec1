use serde::Serialize;

/// Dense real polynomial, coefficients in ascending powers.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Poly(pub Vec<f64>);

impl Poly {
    pub fn constant(c: f64) -> Poly {
        Poly(vec![c])
    }

    pub fn degree(&self) -> usize {
        self.0.iter().rposition(|&c| c != 0.0).unwrap_or(0)
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.0.get(k).copied().unwrap_or(0.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Poly {
        if self.0.len() <= 1 {
            return Poly::constant(0.0);
        }
        Poly(self.0.iter().enumerate().skip(1).map(|(k, &c)| k as f64 * c).collect())
    }

    /// Antiderivative with constant term `c0`.
    pub fn antiderivative(&self, c0: f64) -> Poly {
        let mut out = vec![c0];
        out.extend(self.0.iter().enumerate().map(|(k, &c)| c / (k + 1) as f64));
        Poly(out)
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = vec![0.0; self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly(out)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.0.len().max(other.0.len());
        Poly((0..n).map(|k| self.coeff(k) + other.coeff(k)).collect())
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly(self.0.iter().map(|c| c * s).collect())
    }

    /// `x^deg p(1/x)`, i.e. coefficients reversed after padding to `deg`.
    pub fn reversed(&self, deg: usize) -> Poly {
        Poly((0..=deg).map(|k| self.coeff(deg - k)).collect())
    }

    /// Synthetic division by `(x - root)`: quotient and remainder.
    pub fn deflate(&self, root: f64) -> (Poly, f64) {
        let n = self.0.len();
        if n <= 1 {
            return (Poly::constant(0.0), self.coeff(0));
        }
        let mut q = vec![0.0; n - 1];
        let mut carry = self.0[n - 1];
        for k in (0..n - 1).rev() {
            q[k] = carry;
            carry = self.0[k] + carry * root;
        }
        (Poly(q), carry)
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[f64]) -> Poly {
        roots
            .iter()
            .fold(Poly::constant(1.0), |acc, &r| acc.mul(&Poly(vec![-r, 1.0])))
    }
}

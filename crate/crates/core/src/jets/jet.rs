use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::sync::Arc;

use super::basis::{basis_for, Basis};
use super::JetError;

/// Truncated Taylor expansion of a real function about `base`.
///
/// Coefficients are Taylor coefficients (not derivatives) in graded-lex
/// monomial order. The strict `try_*` methods demand equal orders; the
/// operator impls truncate to the lower order and panic only when variable
/// counts or base points disagree.
#[derive(Clone, Debug)]
pub struct Jet {
    basis: Arc<Basis>,
    base: Arc<[f64]>,
    order: usize,
    coeffs: Vec<f64>,
}

fn same_base(a: &Arc<[f64]>, b: &Arc<[f64]>) -> bool {
    Arc::ptr_eq(a, b) || a[..] == b[..]
}

impl Jet {
    fn with_coeffs(&self, order: usize, coeffs: Vec<f64>) -> Jet {
        Jet {
            basis: Arc::clone(&self.basis),
            base: Arc::clone(&self.base),
            order,
            coeffs,
        }
    }

    fn zeros(base: Arc<[f64]>, order: usize) -> Result<Jet, JetError> {
        let basis = basis_for(base.len(), order)?;
        let coeffs = vec![0.0; basis.len(order)];
        Ok(Jet {
            basis,
            base,
            order,
            coeffs,
        })
    }

    pub fn constant(value: f64, base: &[f64], order: usize) -> Result<Jet, JetError> {
        let mut j = Jet::zeros(base.into(), order)?;
        j.coeffs[0] = value;
        Ok(j)
    }

    /// The coordinate function `x_var`, whose value at the base is `base[var]`.
    pub fn variable(var: usize, base: &[f64], order: usize) -> Result<Jet, JetError> {
        Jet::constant(0.0, base, order)?.variable_like(var)
    }

    /// All coordinate functions about one shared base point.
    pub fn variables(base: &[f64], order: usize) -> Result<Vec<Jet>, JetError> {
        let zero = Jet::constant(0.0, base, order)?;
        (0..base.len()).map(|v| zero.variable_like(v)).collect()
    }

    pub fn from_coeffs(base: &[f64], order: usize, coeffs: Vec<f64>) -> Result<Jet, JetError> {
        let mut j = Jet::zeros(base.into(), order)?;
        if coeffs.len() != j.coeffs.len() {
            return Err(JetError::BadLength {
                got: coeffs.len(),
                expected: j.coeffs.len(),
            });
        }
        j.coeffs = coeffs;
        Ok(j)
    }

    pub fn constant_like(&self, value: f64) -> Jet {
        let mut coeffs = vec![0.0; self.coeffs.len()];
        coeffs[0] = value;
        self.with_coeffs(self.order, coeffs)
    }

    pub fn zero_like(&self) -> Jet {
        self.constant_like(0.0)
    }

    pub fn variable_like(&self, var: usize) -> Result<Jet, JetError> {
        if var >= self.nvars() {
            return Err(JetError::BadVariable(var));
        }
        let mut j = self.constant_like(self.base[var]);
        if self.order >= 1 {
            j.coeffs[1 + var] = 1.0;
        }
        Ok(j)
    }

    pub fn nvars(&self) -> usize {
        self.base.len()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Value at the base point.
    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Exponent vectors in coefficient order.
    pub fn monomials(&self) -> impl Iterator<Item = &[u8]> + '_ {
        let n = self.nvars();
        self.basis.exps[..self.coeffs.len()].iter().map(move |e| &e[..n])
    }

    /// Taylor coefficient of the monomial with exponents `exps`, zero beyond the order.
    pub fn coeff(&self, exps: &[u8]) -> f64 {
        match self.basis.index_of(exps) {
            Some(i) if i < self.coeffs.len() => self.coeffs[i],
            _ => 0.0,
        }
    }

    /// Mixed partial derivative with multi-index `exps` at the base point.
    pub fn derivative(&self, exps: &[u8]) -> f64 {
        let fact: f64 = exps
            .iter()
            .map(|&k| (1..=u32::from(k)).map(f64::from).product::<f64>())
            .product();
        self.coeff(exps) * fact
    }

    /// Evaluates the truncated polynomial at `point`.
    pub fn evaluate(&self, point: &[f64]) -> f64 {
        let d: Vec<f64> = point.iter().zip(self.base.iter()).map(|(p, b)| p - b).collect();
        self.monomials()
            .zip(&self.coeffs)
            .map(|(e, c)| {
                c * e
                    .iter()
                    .zip(&d)
                    .map(|(&k, x)| x.powi(i32::from(k)))
                    .product::<f64>()
            })
            .sum()
    }

    /// The same function viewed in more variables: `base` must extend the
    /// current base point, and the result is constant in the new variables.
    pub fn embed(&self, base: &[f64]) -> Result<Jet, JetError> {
        let n = self.nvars();
        if base.len() < n {
            return Err(JetError::VariableMismatch(base.len(), n));
        }
        if base[..n] != self.base[..] {
            return Err(JetError::BaseMismatch);
        }
        let mut out = Jet::zeros(base.into(), self.order)?;
        let mut padded = vec![0u8; base.len()];
        for (e, &c) in self.monomials().zip(&self.coeffs) {
            padded[..n].copy_from_slice(e);
            let i = out.basis.index_of(&padded).expect("monomial within order");
            out.coeffs[i] = c;
        }
        Ok(out)
    }

    pub fn truncate(&self, order: usize) -> Jet {
        let order = order.min(self.order);
        self.with_coeffs(order, self.coeffs[..self.basis.len(order)].to_vec())
    }

    pub fn max_abs_diff(&self, other: &Jet) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.abs()).fold(0.0, f64::max)
    }

    fn compatible(&self, other: &Jet) -> Result<(), JetError> {
        if self.nvars() != other.nvars() {
            return Err(JetError::VariableMismatch(self.nvars(), other.nvars()));
        }
        if !same_base(&self.base, &other.base) {
            return Err(JetError::BaseMismatch);
        }
        Ok(())
    }

    fn strict(&self, other: &Jet) -> Result<(), JetError> {
        self.compatible(other)?;
        if self.order != other.order {
            return Err(JetError::OrderMismatch(self.order, other.order));
        }
        Ok(())
    }

    /// Shared basis with the larger table, so both operands index into it.
    fn wider_basis(&self, other: &Jet) -> Arc<Basis> {
        if self.basis.max_order >= other.basis.max_order {
            Arc::clone(&self.basis)
        } else {
            Arc::clone(&other.basis)
        }
    }

    pub fn try_add(&self, other: &Jet) -> Result<Jet, JetError> {
        self.strict(other)?;
        Ok(self.zip_with(other, self.order, |a, b| a + b))
    }

    pub fn try_sub(&self, other: &Jet) -> Result<Jet, JetError> {
        self.strict(other)?;
        Ok(self.zip_with(other, self.order, |a, b| a - b))
    }

    pub fn try_mul(&self, other: &Jet) -> Result<Jet, JetError> {
        self.strict(other)?;
        Ok(self.mul_at(other, self.order))
    }

    pub fn try_div(&self, other: &Jet) -> Result<Jet, JetError> {
        self.strict(other)?;
        self.div_at(other, self.order)
    }

    fn zip_with(&self, other: &Jet, order: usize, f: impl Fn(f64, f64) -> f64) -> Jet {
        let n = self.basis.len(order);
        let coeffs = self.coeffs[..n]
            .iter()
            .zip(&other.coeffs[..n])
            .map(|(&a, &b)| f(a, b))
            .collect();
        let mut j = self.with_coeffs(order, coeffs);
        j.basis = self.wider_basis(other);
        j
    }

    fn mul_at(&self, other: &Jet, order: usize) -> Jet {
        let basis = self.wider_basis(other);
        let mut out = vec![0.0; basis.len(order)];
        let (a, b) = (&self.coeffs, &other.coeffs);
        for &(i, j, k) in &basis.products[..basis.products_upto[order]] {
            out[k as usize] += a[i as usize] * b[j as usize];
        }
        let mut r = self.with_coeffs(order, out);
        r.basis = basis;
        r
    }

    fn div_at(&self, other: &Jet, order: usize) -> Result<Jet, JetError> {
        let b = &other.coeffs;
        let b0 = b[0];
        if b0 == 0.0 || !b0.is_finite() {
            return Err(JetError::SingularDivision(b0));
        }
        let basis = self.wider_basis(other);
        let n = basis.len(order);
        let mut c = vec![0.0; n];
        for k in 0..n {
            let mut acc = self.coeffs[k];
            for &(i, j, _) in &basis.products[basis.out_start[k]..basis.out_start[k + 1]] {
                if i as usize != k {
                    acc -= c[i as usize] * b[j as usize];
                }
            }
            c[k] = acc / b0;
        }
        let mut r = self.with_coeffs(order, c);
        r.basis = basis;
        Ok(r)
    }

    /// `self / other` truncated to the lower of the two orders.
    pub fn checked_div(&self, other: &Jet) -> Result<Jet, JetError> {
        self.compatible(other)?;
        self.div_at(other, self.order.min(other.order))
    }

    pub fn recip(&self) -> Result<Jet, JetError> {
        self.constant_like(1.0).div_at(self, self.order)
    }

    /// Partial derivative in variable `var`; the result is one order lower.
    pub fn partial(&self, var: usize) -> Result<Jet, JetError> {
        if var >= self.nvars() {
            return Err(JetError::BadVariable(var));
        }
        if self.order == 0 {
            return Err(JetError::OrderUnderflow);
        }
        let order = self.order - 1;
        let raise = &self.basis.raise[var];
        let coeffs = (0..self.basis.len(order))
            .map(|i| {
                let up = raise[i] as usize;
                f64::from(self.basis.exps[up][var]) * self.coeffs[up]
            })
            .collect();
        Ok(self.with_coeffs(order, coeffs))
    }

    /// Composes a univariate Taylor series `sum_k a_k (t - center)^k` with `self`.
    ///
    /// The constant term of `self` has to sit at `center`; missing coefficients
    /// past `series.len()` are treated as zero.
    pub fn compose_series(&self, series: &[f64], center: f64) -> Result<Jet, JetError> {
        let tol = 1e-9 * center.abs().max(1.0);
        if (self.value() - center).abs() > tol {
            return Err(JetError::BaseMismatch);
        }
        let mut h = self.clone();
        h.coeffs[0] = 0.0;
        let top = series.len().min(self.order + 1);
        if top == 0 {
            return Ok(self.zero_like());
        }
        let mut acc = self.constant_like(series[top - 1]);
        for &a in series[..top - 1].iter().rev() {
            acc = acc.mul_at(&h, self.order);
            acc.coeffs[0] += a;
        }
        Ok(acc)
    }

    /// Composes a one-variable jet `outer` with `self`, at the lower of the two orders.
    pub fn compose(&self, outer: &Jet) -> Result<Jet, JetError> {
        if outer.nvars() != 1 {
            return Err(JetError::VariableMismatch(outer.nvars(), 1));
        }
        let inner = self.truncate(self.order.min(outer.order));
        inner.compose_series(&outer.coeffs, outer.base[0])
    }

    pub fn exp(&self) -> Jet {
        let c = self.value();
        let mut series = Vec::with_capacity(self.order + 1);
        let mut t = c.exp();
        for k in 0..=self.order {
            series.push(t);
            t /= (k + 1) as f64;
        }
        self.compose_series(&series, c).expect("center matches value")
    }

    pub fn ln(&self) -> Result<Jet, JetError> {
        let c = self.value();
        if !(c > 0.0) {
            return Err(JetError::Domain { func: "ln", value: c });
        }
        let mut series = vec![c.ln()];
        let mut p = 1.0;
        for k in 1..=self.order {
            p /= c;
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            series.push(sign * p / k as f64);
        }
        self.compose_series(&series, c)
    }

    /// Real power about a positive value.
    pub fn powf(&self, p: f64) -> Result<Jet, JetError> {
        let c = self.value();
        if !(c > 0.0) {
            return Err(JetError::Domain { func: "powf", value: c });
        }
        let mut series = Vec::with_capacity(self.order + 1);
        // c^p * binom(p, k) / c^k
        let mut t = c.powf(p);
        for k in 0..=self.order {
            series.push(t);
            t *= (p - k as f64) / ((k + 1) as f64 * c);
        }
        self.compose_series(&series, c)
    }

    /// Integer power; negative exponents need a nonzero value.
    pub fn powi(&self, k: i32) -> Result<Jet, JetError> {
        let mut base = if k < 0 { self.recip()? } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut acc = self.constant_like(1.0);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_at(&base, self.order);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_at(&base, self.order);
            }
        }
        Ok(acc)
    }

    pub fn sqrt(&self) -> Result<Jet, JetError> {
        let c = self.value();
        if !(c > 0.0) {
            return Err(JetError::Domain { func: "sqrt", value: c });
        }
        self.powf(0.5)
    }

    pub fn scale(&self, s: f64) -> Jet {
        self.with_coeffs(self.order, self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn sum<'a>(mut terms: impl Iterator<Item = &'a Jet>) -> Option<Jet> {
        let first = terms.next()?.clone();
        Some(terms.fold(first, |acc, t| &acc + t))
    }
}

fn lower(a: &Jet, b: &Jet) -> usize {
    if let Err(e) = a.compatible(b) {
        panic!("incompatible jets: {e}");
    }
    a.order.min(b.order)
}

impl Add<&Jet> for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        let o = lower(self, rhs);
        self.zip_with(rhs, o, |a, b| a + b)
    }
}

impl Sub<&Jet> for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        let o = lower(self, rhs);
        self.zip_with(rhs, o, |a, b| a - b)
    }
}

impl Mul<&Jet> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        let o = lower(self, rhs);
        self.mul_at(rhs, o)
    }
}

impl Div<&Jet> for &Jet {
    type Output = Jet;
    /// Panics when the divisor vanishes at the base; use [`Jet::checked_div`] otherwise.
    fn div(self, rhs: &Jet) -> Jet {
        let o = lower(self, rhs);
        self.div_at(rhs, o).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(mut self) -> Jet {
        self.coeffs.iter_mut().for_each(|c| *c = -*c);
        self
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: &Jet) -> Jet {
                (&self).$m(rhs)
            }
        }
        impl $tr<Jet> for &Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Add<f64> for &Jet {
    type Output = Jet;
    fn add(self, rhs: f64) -> Jet {
        let mut j = self.clone();
        j.coeffs[0] += rhs;
        j
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.coeffs[0] += rhs;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: f64) -> Jet {
        self.coeffs[0] -= rhs;
        self
    }
}

impl Sub<f64> for &Jet {
    type Output = Jet;
    fn sub(self, rhs: f64) -> Jet {
        self.clone() - rhs
    }
}

impl Sub<Jet> for f64 {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        -rhs + self
    }
}

impl Sub<&Jet> for f64 {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        -rhs + self
    }
}

impl Add<Jet> for f64 {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        rhs + self
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(mut self, rhs: f64) -> Jet {
        self *= rhs;
        self
    }
}

impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        rhs * self
    }
}

impl Mul<&Jet> for f64 {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        rhs.scale(self)
    }
}

impl Div<f64> for &Jet {
    type Output = Jet;
    fn div(self, rhs: f64) -> Jet {
        self.scale(1.0 / rhs)
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, rhs: f64) -> Jet {
        self * (1.0 / rhs)
    }
}

impl MulAssign<f64> for Jet {
    fn mul_assign(&mut self, rhs: f64) {
        self.coeffs.iter_mut().for_each(|c| *c *= rhs);
    }
}

impl AddAssign<&Jet> for Jet {
    fn add_assign(&mut self, rhs: &Jet) {
        let o = lower(self, rhs);
        if o < self.order {
            *self = self.truncate(o);
        }
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
    }
}

impl SubAssign<&Jet> for Jet {
    fn sub_assign(&mut self, rhs: &Jet) {
        let o = lower(self, rhs);
        if o < self.order {
            *self = self.truncate(o);
        }
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a -= b;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn product_of_variables() {
        let v = Jet::variables(&[1.0, 2.0], 4).unwrap();
        let p = &v[0] * &v[1];
        // xy about (1,2): 2 + 2dx + dy + dx dy
        assert_eq!(p.coeff(&[0, 0]), 2.0);
        assert_eq!(p.coeff(&[1, 0]), 2.0);
        assert_eq!(p.coeff(&[0, 1]), 1.0);
        assert_eq!(p.coeff(&[1, 1]), 1.0);
        assert_eq!(p.coeff(&[2, 0]), 0.0);
    }

    #[test]
    fn embedding_adds_constant_directions() {
        let x = Jet::variable(0, &[0.5], 3).unwrap();
        let f = (&x * &x).exp();
        let vs = Jet::variables(&[0.5, 2.0, -1.0], 3).unwrap();
        let g = f.embed(&[0.5, 2.0, -1.0]).unwrap();
        assert!(g.max_abs_diff(&(&vs[0] * &vs[0]).exp()) < 1e-15);
        assert_eq!(g.coeff(&[1, 1, 0]), 0.0);
        assert_eq!(f.embed(&[0.4, 1.0]).unwrap_err(), JetError::BaseMismatch);
    }

    #[test]
    fn division_inverts_multiplication() {
        let v = Jet::variables(&[0.3, -0.2, 0.5], 6).unwrap();
        let a = (&v[0] * &v[1]).exp() + &v[2];
        let b = (&v[0] * &v[0] + 2.0).sqrt().unwrap() + &v[1];
        let q = a.try_div(&b).unwrap();
        let back = q.try_mul(&b).unwrap();
        assert!(back.max_abs_diff(&a) < 1e-13);
    }

    #[test]
    fn elementary_functions_against_closed_forms() {
        let x = Jet::variable(0, &[0.7], 12).unwrap();
        let l = x.ln().unwrap();
        let e = l.exp();
        assert!(e.max_abs_diff(&x) < 1e-14);
        // d^k/dx^k x^1.5 = 1.5 (0.5) ... x^(1.5-k)
        let p = x.powf(1.5).unwrap();
        let mut expect = 0.7f64.powf(1.5);
        for k in 0..=12 {
            assert!(close(p.derivative(&[k as u8]), expect, 1e-12), "k={k}");
            expect *= (1.5 - k as f64) / 0.7;
        }
        let inv = x.powi(-3).unwrap();
        assert!(close(inv.derivative(&[2]), 12.0 * 0.7f64.powi(-5), 1e-12));
    }

    #[test]
    fn partial_lowers_order() {
        let v = Jet::variables(&[0.1, 0.2], 5).unwrap();
        let f = (&v[0] * &v[0] * &v[1]).exp();
        let fx = f.partial(0).unwrap();
        assert_eq!(fx.order(), 4);
        let expect = 2.0 * 0.1 * 0.2 * (0.1f64 * 0.1 * 0.2).exp();
        assert!(close(fx.value(), expect, 1e-14));
        let fxy = fx.partial(1).unwrap();
        let fyx = f.partial(1).unwrap().partial(0).unwrap();
        assert!(fxy.max_abs_diff(&fyx) < 1e-14);
    }

    #[test]
    fn strict_ops_reject_mismatch() {
        let a = Jet::variable(0, &[0.0, 0.0], 3).unwrap();
        let b = Jet::variable(0, &[0.0, 0.0], 4).unwrap();
        let c = Jet::variable(0, &[1.0, 0.0], 3).unwrap();
        assert_eq!(a.try_add(&b).unwrap_err(), JetError::OrderMismatch(3, 4));
        assert_eq!(a.try_mul(&c).unwrap_err(), JetError::BaseMismatch);
        assert!(matches!(a.try_div(&a), Err(JetError::SingularDivision(_))));
        assert_eq!((&a + &b).order(), 3);
    }

    #[test]
    fn compose_requires_matching_center() {
        let x = Jet::variable(0, &[0.5], 6).unwrap();
        let outer = Jet::variable(0, &[0.5], 6).unwrap().exp();
        let y = x.compose(&outer).unwrap();
        assert!(y.max_abs_diff(&x.exp()) < 1e-15);
        let off = Jet::variable(0, &[0.0], 6).unwrap().exp();
        assert_eq!(x.compose(&off).unwrap_err(), JetError::BaseMismatch);
    }
}

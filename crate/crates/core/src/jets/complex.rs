use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

use super::{Jet, JetError};

/// Complex-valued jet `re + i im` over real variables.
#[derive(Clone, Debug)]
pub struct CJet {
    pub re: Jet,
    pub im: Jet,
}

/// Wirtinger direction for complex coordinate `i` (real variables `2i`, `2i + 1`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Wirtinger {
    Z(usize),
    ZBar(usize),
}

impl CJet {
    pub fn new(re: Jet, im: Jet) -> CJet {
        CJet { re, im }
    }

    pub fn real(re: Jet) -> CJet {
        let im = re.zero_like();
        CJet { re, im }
    }

    /// Complex coordinate `z_i = x_i + i y_i`.
    pub fn coordinate(template: &Jet, i: usize) -> Result<CJet, JetError> {
        Ok(CJet {
            re: template.variable_like(2 * i)?,
            im: template.variable_like(2 * i + 1)?,
        })
    }

    pub fn constant_like(template: &Jet, c: Complex64) -> CJet {
        CJet {
            re: template.constant_like(c.re),
            im: template.constant_like(c.im),
        }
    }

    pub fn order(&self) -> usize {
        self.re.order().min(self.im.order())
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }

    pub fn conj(&self) -> CJet {
        CJet {
            re: self.re.clone(),
            im: -&self.im,
        }
    }

    pub fn scale(&self, c: Complex64) -> CJet {
        CJet {
            re: &self.re * c.re - &self.im * c.im,
            im: &self.re * c.im + &self.im * c.re,
        }
    }

    pub fn add_const(&self, c: Complex64) -> CJet {
        CJet {
            re: &self.re + c.re,
            im: &self.im + c.im,
        }
    }

    /// `|self|^2` as a real jet.
    pub fn norm_sqr(&self) -> Jet {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn truncate(&self, order: usize) -> CJet {
        CJet {
            re: self.re.truncate(order),
            im: self.im.truncate(order),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.re.max_abs().max(self.im.max_abs())
    }

    pub fn max_abs_diff(&self, other: &CJet) -> f64 {
        self.re.max_abs_diff(&other.re).max(self.im.max_abs_diff(&other.im))
    }

    pub fn checked_div(&self, other: &CJet) -> Result<CJet, JetError> {
        let den = other.norm_sqr();
        let num = self * &other.conj();
        Ok(CJet {
            re: num.re.checked_div(&den)?,
            im: num.im.checked_div(&den)?,
        })
    }

    /// Composes a complex Taylor series `sum_k a_k (w - center)^k` with `self`.
    fn compose_series(&self, series: &[Complex64], center: Complex64) -> CJet {
        let mut h = self.add_const(-center);
        h.re = &h.re - h.re.value();
        h.im = &h.im - h.im.value();
        let top = series.len().min(self.order() + 1);
        let mut acc = CJet::constant_like(&self.re, series[top - 1]);
        for &a in series[..top - 1].iter().rev() {
            acc = (&acc * &h).add_const(a);
        }
        acc
    }

    pub fn exp(&self) -> CJet {
        let c = self.value();
        let mut t = c.exp();
        let series: Vec<Complex64> = (0..=self.order())
            .map(|k| {
                let s = t;
                t /= (k + 1) as f64;
                s
            })
            .collect();
        self.compose_series(&series, c)
    }

    /// Principal logarithm about the base value.
    pub fn ln(&self) -> Result<CJet, JetError> {
        let c = self.value();
        if c.norm() == 0.0 || !c.is_finite() {
            return Err(JetError::Domain { func: "log", value: c.norm() });
        }
        let inv = c.inv();
        let mut p = Complex64::new(1.0, 0.0);
        let mut series = vec![c.ln()];
        for k in 1..=self.order() {
            p *= inv;
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            series.push(p * (sign / k as f64));
        }
        Ok(self.compose_series(&series, c))
    }

    /// Principal branch of `self^p` for real `p`.
    pub fn powf(&self, p: f64) -> Result<CJet, JetError> {
        let c = self.value();
        if c.norm() == 0.0 || !c.is_finite() {
            return Err(JetError::Domain { func: "pow", value: c.norm() });
        }
        let inv = c.inv();
        let mut t = c.powf(p);
        let series: Vec<Complex64> = (0..=self.order())
            .map(|k| {
                let s = t;
                t *= inv * ((p - k as f64) / (k + 1) as f64);
                s
            })
            .collect();
        Ok(self.compose_series(&series, c))
    }

    /// Integer power by repeated squaring.
    pub fn powi(&self, k: i32) -> Result<CJet, JetError> {
        let one = CJet::constant_like(&self.re, Complex64::new(1.0, 0.0));
        let mut base = if k < 0 { one.checked_div(self)? } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut acc = one;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        Ok(acc)
    }

    /// Complex power `self^other` on the principal branch.
    pub fn pow(&self, other: &CJet) -> Result<CJet, JetError> {
        Ok((&self.ln()? * other).exp())
    }
}

/// Wirtinger derivative of a complex jet.
///
/// `d/dz = (d/dx - i d/dy)/2` and `d/dzbar = (d/dx + i d/dy)/2`.
pub fn complex_partial(f: &CJet, dir: Wirtinger) -> Result<CJet, JetError> {
    let (i, bar) = match dir {
        Wirtinger::Z(i) => (i, false),
        Wirtinger::ZBar(i) => (i, true),
    };
    let ux = f.re.partial(2 * i)?;
    let uy = f.re.partial(2 * i + 1)?;
    let vx = f.im.partial(2 * i)?;
    let vy = f.im.partial(2 * i + 1)?;
    Ok(if bar {
        CJet {
            re: (ux - vy) * 0.5,
            im: (vx + uy) * 0.5,
        }
    } else {
        CJet {
            re: (ux + vy) * 0.5,
            im: (vx - uy) * 0.5,
        }
    })
}

impl Add<&CJet> for &CJet {
    type Output = CJet;
    fn add(self, rhs: &CJet) -> CJet {
        CJet {
            re: &self.re + &rhs.re,
            im: &self.im + &rhs.im,
        }
    }
}

impl Sub<&CJet> for &CJet {
    type Output = CJet;
    fn sub(self, rhs: &CJet) -> CJet {
        CJet {
            re: &self.re - &rhs.re,
            im: &self.im - &rhs.im,
        }
    }
}

impl Mul<&CJet> for &CJet {
    type Output = CJet;
    fn mul(self, rhs: &CJet) -> CJet {
        CJet {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }
}

impl Div<&CJet> for &CJet {
    type Output = CJet;
    fn div(self, rhs: &CJet) -> CJet {
        self.checked_div(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Neg for &CJet {
    type Output = CJet;
    fn neg(self) -> CJet {
        CJet {
            re: -&self.re,
            im: -&self.im,
        }
    }
}

impl Mul<&Jet> for &CJet {
    type Output = CJet;
    fn mul(self, rhs: &Jet) -> CJet {
        CJet {
            re: &self.re * rhs,
            im: &self.im * rhs,
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<CJet> for CJet {
            type Output = CJet;
            fn $m(self, rhs: CJet) -> CJet {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&CJet> for CJet {
            type Output = CJet;
            fn $m(self, rhs: &CJet) -> CJet {
                (&self).$m(rhs)
            }
        }
        impl $tr<CJet> for &CJet {
            type Output = CJet;
            fn $m(self, rhs: CJet) -> CJet {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for CJet {
    type Output = CJet;
    fn neg(self) -> CJet {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wirtinger_of_monomials() {
        let t = Jet::constant(0.0, &[0.3, -0.4], 5).unwrap();
        let z = CJet::coordinate(&t, 0).unwrap();
        let zz = &z * &z;
        let dz = complex_partial(&zz, Wirtinger::Z(0)).unwrap();
        let dzb = complex_partial(&zz, Wirtinger::ZBar(0)).unwrap();
        let expect = z.value() * 2.0;
        assert!((dz.value() - expect).norm() < 1e-15);
        assert!(dzb.max_abs() < 1e-15);
        // d/dz dbar/dz |z|^2 = 1
        let n = CJet::real(z.norm_sqr());
        let ddb = complex_partial(&complex_partial(&n, Wirtinger::ZBar(0)).unwrap(), Wirtinger::Z(0))
            .unwrap();
        assert!((ddb.value() - 1.0).norm() < 1e-15);
    }

    #[test]
    fn complex_log_exp_round_trip() {
        let t = Jet::constant(0.0, &[-0.5, 0.8], 8).unwrap();
        let z = CJet::coordinate(&t, 0).unwrap();
        let w = (&z * &z).add_const(Complex64::new(1.0, 0.2));
        let back = w.ln().unwrap().exp();
        assert!(back.max_abs_diff(&w) < 1e-11 * w.max_abs().max(1.0));
        let sq = w.powf(0.5).unwrap();
        assert!((&sq * &sq).max_abs_diff(&w) < 1e-11 * w.max_abs().max(1.0));
        // holomorphic result: dbar vanishes identically
        let l = w.ln().unwrap();
        assert!(complex_partial(&l, Wirtinger::ZBar(0)).unwrap().max_abs() < 1e-11 * l.max_abs());
    }
}

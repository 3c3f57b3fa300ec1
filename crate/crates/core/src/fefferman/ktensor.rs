use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{FeffermanError, IdentityCheck, MIN_ORDER};
use crate::curvature::linalg::{self, JetMatrix};
use crate::curvature::{CurvatureFrame, Geometry, Slot, Tensor};
use crate::jets::{complex_partial, CJet, Wirtinger};

/// Trace-modified Ricci tensor `K = (Ric - R g / (2(n+1))) / (n+2)` at a
/// point, with `Λ = K_{a b̄} K^{a b̄}` and the derivatives the frame tables use.
///
/// Matrices follow the curvature layout `m[(a, b)] = T_{a b̄}`.
#[derive(Clone, Debug)]
pub struct KTensor {
    pub n: usize,
    pub frame: CurvatureFrame,
    pub k: DMatrix<Complex64>,
    /// `K_a^b`.
    pub k_mixed: DMatrix<Complex64>,
    /// `K^{a b̄}`.
    pub k_upper: DMatrix<Complex64>,
    /// `K_a^m K_{m b̄}`.
    pub k_square: DMatrix<Complex64>,
    pub lambda: f64,
    /// `K_a^b K_b^c K_c^a`.
    pub k_cubed_trace: f64,
    /// `∇_a Λ`; the antiholomorphic gradient is its conjugate.
    pub grad_lambda: Vec<Complex64>,
    /// `∇_a ∇_b̄ Λ`.
    pub hess_lambda: DMatrix<Complex64>,
    pub laplacian_lambda: f64,
    pub(super) jets: KJets,
    dk: Tensor,
    dk_bar: Tensor,
    ddk: Tensor,
    partial_k: Vec<DMatrix<Complex64>>,
    partial_k_bar: Vec<DMatrix<Complex64>>,
}

/// Jet-valued pieces the Cotton table is built from, kept so its frame
/// derivatives can be taken exactly.
#[derive(Clone, Debug)]
pub(super) struct KJets {
    pub g: JetMatrix,
    pub k_square: JetMatrix,
    pub lambda: CJet,
    pub grad_lambda: Vec<CJet>,
    pub dk: Tensor,
}

fn raise(g_inv: &DMatrix<Complex64>, t: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    g_inv * t.transpose() * g_inv
}

impl KTensor {
    /// Builds the K data without checking constant scalar curvature.
    pub fn from_geometry(geo: &Geometry) -> Result<KTensor, FeffermanError> {
        if geo.order() < MIN_ORDER {
            return Err(FeffermanError::DerivativeShortfall {
                needed: MIN_ORDER,
                have: geo.order(),
            });
        }
        let n = geo.n();
        let frame = geo.frame()?;
        let kj = geo.k_tensor();
        let kt = Tensor::from_matrix([Slot::Hol, Slot::Anti], &kj);
        let dk = geo.covd(&kt, Slot::Hol)?;
        let dk_bar = geo.covd(&kt, Slot::Anti)?;
        let ddk = geo.covd(&dk, Slot::Anti)?;

        let lam = CJet::real(geo.lambda());
        let grad: Vec<CJet> = (0..n)
            .map(|a| complex_partial(&lam, Wirtinger::Z(a)))
            .collect::<Result<_, _>>()?;
        let mut hess_lambda = DMatrix::zeros(n, n);
        let mut partial_k = vec![DMatrix::zeros(n, n); n];
        let mut partial_k_bar = vec![DMatrix::zeros(n, n); n];
        for a in 0..n {
            for b in 0..n {
                hess_lambda[(a, b)] = complex_partial(&grad[a], Wirtinger::ZBar(b))?.value();
                for c in 0..n {
                    partial_k[c][(a, b)] = complex_partial(&kj[a][b], Wirtinger::Z(c))?.value();
                    partial_k_bar[c][(a, b)] = complex_partial(&kj[a][b], Wirtinger::ZBar(c))?.value();
                }
            }
        }
        let laplacian_lambda = geo.laplacian(&lam.re)?.value();

        let k = linalg::values(&kj);
        let k_mixed = &k * frame.g_inv.transpose();
        let k_upper = raise(&frame.g_inv, &k);
        let k_square = &k_mixed * &k;
        let k_cubed_trace = (&k_mixed * &k_mixed * &k_mixed).trace().re;
        let jets = KJets {
            g: geo.metric().clone(),
            k_square: linalg::matmul(&geo.mixed(&kj), &kj),
            lambda: lam.clone(),
            grad_lambda: grad.clone(),
            dk: dk.clone(),
        };
        Ok(KTensor {
            n,
            k,
            k_mixed,
            k_upper,
            k_square,
            lambda: lam.value().re,
            k_cubed_trace,
            grad_lambda: grad.iter().map(CJet::value).collect(),
            hess_lambda,
            laplacian_lambda,
            frame,
            jets,
            dk,
            dk_bar,
            ddk,
            partial_k,
            partial_k_bar,
        })
    }

    pub fn scalar(&self) -> f64 {
        self.frame.scalar
    }

    /// `∇_c K_{a b̄}`.
    pub fn dk(&self, a: usize, b: usize, c: usize) -> Complex64 {
        self.dk.value(&[a, b, c])
    }

    /// `∇_c̄ K_{a b̄}`.
    pub fn dk_bar(&self, a: usize, b: usize, c: usize) -> Complex64 {
        self.dk_bar.value(&[a, b, c])
    }

    /// `∇_d̄ ∇_c K_{a b̄}`.
    pub fn ddk(&self, a: usize, b: usize, c: usize, d: usize) -> Complex64 {
        self.ddk.value(&[a, b, c, d])
    }

    /// Coordinate derivative `∂_c K_{a b̄}`.
    pub fn partial_k(&self, a: usize, b: usize, c: usize) -> Complex64 {
        self.partial_k[c][(a, b)]
    }

    /// Coordinate derivative `∂_c̄ K_{a b̄}`.
    pub fn partial_k_bar(&self, a: usize, b: usize, c: usize) -> Complex64 {
        self.partial_k_bar[c][(a, b)]
    }

    /// `R^{a b̄}`.
    pub fn ricci_upper(&self) -> DMatrix<Complex64> {
        raise(&self.frame.g_inv, &self.frame.ricci)
    }

    /// `R_a^m R_{m b̄}`.
    pub fn ricci_square(&self) -> DMatrix<Complex64> {
        &self.frame.ricci_endo * &self.frame.ricci
    }

    /// `K_{a b̄} - (Λ/n) g_{a b̄}` with `K_a^m K_{m b̄}` in place of `K`; the
    /// combination that recurs through the Schouten, Cotton and Weyl tables.
    pub fn k_square_traceless(&self) -> DMatrix<Complex64> {
        &self.k_square - &self.frame.g * Complex64::new(self.lambda / self.n as f64, 0.0)
    }

    /// Residuals of the K identities valid under constant scalar curvature.
    pub fn lemma_checks(&self) -> Vec<IdentityCheck> {
        let n = self.n;
        let nf = n as f64;
        let r = self.scalar();
        let gi = &self.frame.g_inv;
        let c = |x: f64| Complex64::new(x, 0.0);
        let half = c(0.5);
        let mut checks = Vec::new();

        let trace = (self.k_mixed.trace() - c(r / (2.0 * (nf + 1.0)))).norm();
        checks.push(IdentityCheck::new("k-trace", trace));

        let expected = self.ricci_square() * c(1.0 / (nf + 2.0).powi(2))
            - &self.frame.ricci * c(r / ((nf + 1.0) * (nf + 2.0).powi(2)))
            + &self.frame.g * c(r * r / (4.0 * (nf + 1.0).powi(2) * (nf + 2.0).powi(2)));
        checks.push(IdentityCheck::new("k-square", max_diff(&self.k_square, &expected)));

        let mut sym = 0.0f64;
        let mut sym_bar = 0.0f64;
        let mut contract_mixed = 0.0f64;
        let mut contract_upper = 0.0f64;
        for a in 0..n {
            for b in 0..n {
                for d in 0..n {
                    sym = sym.max((self.dk(b, d, a) - self.dk(a, d, b)).norm());
                    sym_bar = sym_bar.max((self.dk_bar(a, d, b) - self.dk_bar(a, b, d)).norm());
                }
            }
            let mut mixed = Complex64::new(0.0, 0.0);
            let mut upper = Complex64::new(0.0, 0.0);
            for g in 0..n {
                for b in 0..n {
                    for m in 0..n {
                        mixed += self.dk(g, m, a) * gi[(b, m)] * self.k_mixed[(b, g)];
                    }
                    upper += self.k_upper[(g, b)] * self.dk(g, b, a);
                }
            }
            contract_mixed = contract_mixed.max((mixed - half * self.grad_lambda[a]).norm());
            contract_upper = contract_upper.max((upper - half * self.grad_lambda[a]).norm());
        }
        checks.push(IdentityCheck::new("dk-symmetric", sym));
        checks.push(IdentityCheck::new("dk-bar-symmetric", sym_bar));

        let mut div = 0.0f64;
        let mut div_bar = 0.0f64;
        for b in 0..n {
            let mut s = Complex64::new(0.0, 0.0);
            let mut s_bar = Complex64::new(0.0, 0.0);
            for a in 0..n {
                for g in 0..n {
                    s += gi[(a, g)] * self.dk(b, g, a);
                    for d in 0..n {
                        // ∇^a K_a^b = g^{a d̄} g^{b γ̄} ∇_d̄ K_{a γ̄}
                        s_bar += gi[(a, d)] * gi[(b, g)] * self.dk_bar(a, g, d);
                    }
                }
            }
            div = div.max(s.norm());
            div_bar = div_bar.max(s_bar.norm());
        }
        checks.push(IdentityCheck::new("k-divergence", div));
        checks.push(IdentityCheck::new("k-divergence-bar", div_bar));
        checks.push(IdentityCheck::new("dk-contract-mixed", contract_mixed));
        checks.push(IdentityCheck::new("dk-contract-upper", contract_upper));

        let rup = self.ricci_upper();
        let rsq = self.ricci_square();
        let mut laplace = 0.0f64;
        for a in 0..n {
            for b in 0..n {
                let mut lhs = Complex64::new(0.0, 0.0);
                let mut rr = rsq[(a, b)];
                for g in 0..n {
                    for d in 0..n {
                        lhs += gi[(g, d)] * self.ddk(a, b, g, d);
                        rr += rup[(g, d)] * self.frame.riemann(a, b, g, d);
                    }
                }
                laplace = laplace.max((lhs - rr / c(nf + 2.0)).norm());
            }
        }
        checks.push(IdentityCheck::new("k-laplacian", laplace));
        checks
    }
}

pub(super) fn max_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

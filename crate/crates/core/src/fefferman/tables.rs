use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::ser::{Serialize, SerializeSeq, Serializer};

use super::index::{FIndex, Table};
use super::ktensor::KTensor;
use super::FeffermanError;
use crate::jets::{complex_partial, CJet, Wirtinger};

use FIndex::{AntiHol, Hol, Top, Zero};

const I: Complex64 = Complex64::new(0.0, 1.0);

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Fefferman metric `𝗀_{ij}`: `𝗀_{0,2n+1} = 1` and `𝗀_{α β̄} = g_{α β̄} / 2`.
pub fn fefferman_metric(kt: &KTensor) -> Table {
    let n = kt.n;
    let mut t = Table::zeros(n, 2);
    t.set(&[Zero, Top], re(1.0));
    t.set(&[Top, Zero], re(1.0));
    for a in 0..n {
        for b in 0..n {
            let v = kt.frame.g[(a, b)] * 0.5;
            t.set(&[Hol(a), AntiHol(b)], v);
            t.set(&[AntiHol(b), Hol(a)], v);
        }
    }
    t
}

/// Inverse Fefferman metric `𝗀^{ij}`: `𝗀^{0,2n+1} = 1` and `𝗀^{α β̄} = 2 g^{α β̄}`.
pub fn fefferman_metric_inverse(kt: &KTensor) -> Table {
    let n = kt.n;
    let mut t = Table::zeros(n, 2);
    t.set(&[Zero, Top], re(1.0));
    t.set(&[Top, Zero], re(1.0));
    for a in 0..n {
        for b in 0..n {
            let v = kt.frame.g_inv[(a, b)] * 2.0;
            t.set(&[Hol(a), AntiHol(b)], v);
            t.set(&[AntiHol(b), Hol(a)], v);
        }
    }
    t
}

/// Levi-Civita symbols `Γ_{ij}^k` (stored at `[i, j, k]`) defined by
/// `D_{X_i} X_j = Γ_{ij}^k X_k`, for a torsion-free base with constant `R`.
pub fn christoffel_table(kt: &KTensor) -> Table {
    let n = kt.n;
    let (g, k, km) = (&kt.frame.g, &kt.k, &kt.k_mixed);
    let mut t = Table::zeros(n, 3);
    for a in 0..n {
        for b in 0..n {
            t.set(&[Hol(a), Zero, Hol(b)], I * km[(a, b)]);
            t.set(&[AntiHol(a), Zero, AntiHol(b)], -I * km[(a, b)].conj());
        }
    }
    for c in 0..n {
        for b in 0..n {
            t.set(&[Zero, Hol(c), Hol(b)], I * km[(c, b)]);
            t.set(&[Zero, AntiHol(c), AntiHol(b)], -I * km[(c, b)].conj());
            for a in 0..n {
                let gamma = kt.frame.gamma(b, a, c);
                t.set(&[Hol(a), Hol(c), Hol(b)], gamma);
                t.set(&[AntiHol(a), AntiHol(c), AntiHol(b)], gamma.conj());
            }
        }
        for a in 0..n {
            t.set(&[AntiHol(a), Hol(c), Zero], I * 0.5 * g[(c, a)]);
            t.set(&[AntiHol(a), Hol(c), Top], I * 0.5 * k[(c, a)]);
            t.set(&[Hol(a), AntiHol(c), Zero], -I * 0.5 * g[(a, c)]);
            t.set(&[Hol(a), AntiHol(c), Top], -I * 0.5 * k[(a, c)]);
        }
        t.set(&[Top, Hol(c), Hol(c)], I);
        t.set(&[Top, AntiHol(c), AntiHol(c)], -I);
        t.set(&[Hol(c), Top, Hol(c)], I);
        t.set(&[AntiHol(c), Top, AntiHol(c)], -I);
    }
    t
}

/// Schouten tensor `P_{ij}`: `P_{00} = Λ/n`, `P_{α β̄} = K_{α β̄}/2`, `P_{2n+1,2n+1} = 1`.
pub fn schouten(kt: &KTensor) -> Table {
    let n = kt.n;
    let mut t = Table::zeros(n, 2);
    t.set(&[Zero, Zero], re(kt.lambda / n as f64));
    t.set(&[Top, Top], re(1.0));
    for a in 0..n {
        for b in 0..n {
            let v = kt.k[(a, b)] * 0.5;
            t.set(&[Hol(a), AntiHol(b)], v);
            t.set(&[AntiHol(b), Hol(a)], v);
        }
    }
    t
}

/// `P^{ij}`: `P^{00} = 1`, `P^{α β̄} = 2 K^{α β̄}`, `P^{2n+1,2n+1} = Λ/n`.
pub fn schouten_upper(kt: &KTensor) -> Table {
    let n = kt.n;
    let mut t = Table::zeros(n, 2);
    t.set(&[Zero, Zero], re(1.0));
    t.set(&[Top, Top], re(kt.lambda / n as f64));
    for a in 0..n {
        for b in 0..n {
            let v = kt.k_upper[(a, b)] * 2.0;
            t.set(&[Hol(a), AntiHol(b)], v);
            t.set(&[AntiHol(b), Hol(a)], v);
        }
    }
    t
}

/// Raises both slots of a rank-2 table with the inverse Fefferman metric.
pub fn raise_pair(t: &Table, g_inv: &Table) -> Table {
    let n = t.n();
    let all = FIndex::all(n);
    let mut out = Table::zeros(n, 2);
    for &i in &all {
        for &j in &all {
            let mut acc = Complex64::new(0.0, 0.0);
            for &k in &all {
                for &l in &all {
                    acc += g_inv.get(&[i, k]) * t.get(&[k, l]) * g_inv.get(&[l, j]);
                }
            }
            out.set(&[i, j], acc);
        }
    }
    out
}

/// Covariant derivatives `P_{ij,k}` (stored at `[i, j, k]`) from the closed
/// formulas in base curvature.
pub fn schouten_derivatives(kt: &KTensor) -> Table {
    let n = kt.n;
    let nf = n as f64;
    let e = kt.k_square_traceless();
    let mut t = Table::zeros(n, 3);
    for c in 0..n {
        t.set(&[Zero, Zero, Hol(c)], kt.grad_lambda[c] / nf);
        t.set(&[Zero, Zero, AntiHol(c)], kt.grad_lambda[c].conj() / nf);
    }
    for a in 0..n {
        for b in 0..n {
            let v = I * 0.5 * e[(a, b)];
            t.set(&[Zero, Hol(a), AntiHol(b)], v);
            t.set(&[Hol(a), Zero, AntiHol(b)], v);
            let w = -I * 0.5 * e[(b, a)];
            t.set(&[Zero, AntiHol(a), Hol(b)], w);
            t.set(&[AntiHol(a), Zero, Hol(b)], w);
            for c in 0..n {
                let hol = kt.dk(a, b, c) * 0.5;
                let anti = kt.dk_bar(a, b, c) * 0.5;
                t.set(&[Hol(a), AntiHol(b), Hol(c)], hol);
                t.set(&[AntiHol(b), Hol(a), Hol(c)], hol);
                t.set(&[Hol(a), AntiHol(b), AntiHol(c)], anti);
                t.set(&[AntiHol(b), Hol(a), AntiHol(c)], anti);
            }
        }
    }
    t
}

/// `T_{ij,k} = X_k T_{ij} - Γ_{ki}^l T_{lj} - Γ_{kj}^l T_{il}` for a rank-2
/// table `t` whose frame derivatives `X_k T_{ij}` are stored in `xt[i, j, k]`.
pub fn covariant_derivative(gamma: &Table, t: &Table, xt: &Table) -> Table {
    let n = t.n();
    let all = FIndex::all(n);
    let mut out = Table::zeros(n, 3);
    for &i in &all {
        for &j in &all {
            for &k in &all {
                let mut v = xt.get(&[i, j, k]);
                for &l in &all {
                    v -= gamma.get(&[k, i, l]) * t.get(&[l, j]) + gamma.get(&[k, j, l]) * t.get(&[i, l]);
                }
                out.set(&[i, j, k], v);
            }
        }
    }
    out
}

/// `P_{ij,k}` by differentiating the Schouten table against the Christoffel table.
pub fn schouten_derivatives_direct(kt: &KTensor) -> Table {
    let n = kt.n;
    let nf = n as f64;
    // Base functions are S¹-invariant, so X_0 and X_{2n+1} annihilate them
    // and X_c, X_c̄ act as coordinate derivatives.
    let mut xp = Table::zeros(n, 3);
    for c in 0..n {
        xp.set(&[Zero, Zero, Hol(c)], kt.grad_lambda[c] / nf);
        xp.set(&[Zero, Zero, AntiHol(c)], kt.grad_lambda[c].conj() / nf);
        for a in 0..n {
            for b in 0..n {
                let hol = kt.partial_k(a, b, c) * 0.5;
                let anti = kt.partial_k_bar(a, b, c) * 0.5;
                xp.set(&[Hol(a), AntiHol(b), Hol(c)], hol);
                xp.set(&[AntiHol(b), Hol(a), Hol(c)], hol);
                xp.set(&[Hol(a), AntiHol(b), AntiHol(c)], anti);
                xp.set(&[AntiHol(b), Hol(a), AntiHol(c)], anti);
            }
        }
    }
    covariant_derivative(&christoffel_table(kt), &schouten(kt), &xp)
}

/// `C_{ijk} = P_{ij,k} - P_{ik,j}`.
pub fn cotton_from_schouten(derivs: &Table) -> Table {
    let n = derivs.n();
    let all = FIndex::all(n);
    let mut out = Table::zeros(n, 3);
    for &i in &all {
        for &j in &all {
            for &k in &all {
                out.set(&[i, j, k], derivs.get(&[i, j, k]) - derivs.get(&[i, k, j]));
            }
        }
    }
    out
}

/// Dense jet-valued rank-3 table, used where frame derivatives of the
/// components are needed.
pub(super) struct JetTable {
    n: usize,
    data: Vec<CJet>,
}

impl JetTable {
    fn zeros(n: usize, zero: CJet) -> JetTable {
        JetTable {
            n,
            data: vec![zero; (2 * n + 2).pow(3)],
        }
    }

    fn offset(&self, idx: [FIndex; 3]) -> usize {
        idx.iter().fold(0, |acc, i| acc * (2 * self.n + 2) + i.position(self.n))
    }

    pub fn get(&self, idx: [FIndex; 3]) -> &CJet {
        &self.data[self.offset(idx)]
    }

    fn set(&mut self, idx: [FIndex; 3], v: CJet) {
        let o = self.offset(idx);
        self.data[o] = v;
    }

    pub fn values(&self) -> Table {
        let mut t = Table::zeros(self.n, 3);
        for idx in t.indices() {
            t.set(&idx, self.get([idx[0], idx[1], idx[2]]).value());
        }
        t
    }

    /// `X_l` applied to every component, stored at `[i, j, k, l]`.
    pub fn frame_derivatives(&self) -> Result<Table, FeffermanError> {
        let n = self.n;
        let mut t = Table::zeros(n, 4);
        for idx in Table::zeros(n, 3).indices() {
            let c = self.get([idx[0], idx[1], idx[2]]);
            for a in 0..n {
                let hol = complex_partial(c, Wirtinger::Z(a))?.value();
                let anti = complex_partial(c, Wirtinger::ZBar(a))?.value();
                t.set(&[idx[0], idx[1], idx[2], Hol(a)], hol);
                t.set(&[idx[0], idx[1], idx[2], AntiHol(a)], anti);
            }
        }
        Ok(t)
    }
}

/// Cotton components from the closed formulas, as jets about the base point.
pub(super) fn cotton_jets(kt: &KTensor) -> JetTable {
    let n = kt.n;
    let j = &kt.jets;
    let zero = CJet::constant_like(&j.lambda.re, re(0.0));
    let inv_n = re(1.0 / n as f64);
    let lam_n = j.lambda.re.scale(1.0 / n as f64);
    let e = |a: usize, b: usize| &j.k_square[a][b] - &(&j.g[a][b] * &lam_n);
    let mut t = JetTable::zeros(n, zero);
    for c in 0..n {
        let grad = j.grad_lambda[c].scale(inv_n);
        t.set([Zero, Zero, Hol(c)], grad.clone());
        t.set([Zero, Zero, AntiHol(c)], grad.conj());
        t.set([Zero, Hol(c), Zero], -&grad);
        t.set([Zero, AntiHol(c), Zero], -&grad.conj());
    }
    for a in 0..n {
        for b in 0..n {
            let eab = e(a, b);
            let eba = e(b, a);
            t.set([Zero, Hol(a), AntiHol(b)], eab.scale(I));
            t.set([Zero, AntiHol(a), Hol(b)], eba.scale(-I));
            t.set([Hol(a), Zero, AntiHol(b)], eab.scale(I * 0.5));
            t.set([AntiHol(a), Zero, Hol(b)], eba.scale(-I * 0.5));
            t.set([Hol(a), AntiHol(b), Zero], eab.scale(-I * 0.5));
            for c in 0..n {
                t.set([Hol(a), Hol(b), AntiHol(c)], j.dk.get(&[a, c, b]).scale(re(-0.5)));
                t.set([Hol(a), AntiHol(b), Hol(c)], j.dk.get(&[a, b, c]).scale(re(0.5)));
            }
        }
    }
    // The remaining components with a barred first slot are conjugates.
    for a in 0..n {
        for second in [Hol as fn(usize) -> FIndex, AntiHol] {
            for b in 0..n {
                for k in FIndex::all(n) {
                    let idx = [AntiHol(a), second(b), k];
                    let v = t.get(idx.map(FIndex::conj)).conj();
                    t.set(idx, v);
                }
            }
        }
    }
    t
}

/// Cotton tensor `C_{ijk}` from the closed formulas; every component with
/// an index `2n+1` is zero.
pub fn cotton(kt: &KTensor) -> Table {
    cotton_jets(kt).values()
}

/// Known Weyl components `W_{ijkl}`; anything reachable through the Riemann
/// symmetries or conjugation is looked up too.
#[derive(Clone, Debug)]
pub struct WeylComponents {
    n: usize,
    entries: BTreeMap<[FIndex; 4], Complex64>,
}

impl WeylComponents {
    fn insert(&mut self, idx: [FIndex; 4], v: Complex64) {
        self.entries.insert(idx, v);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Stored entries only.
    pub fn entries(&self) -> impl Iterator<Item = (&[FIndex; 4], &Complex64)> {
        self.entries.iter()
    }

    pub fn get(&self, idx: [FIndex; 4]) -> Option<Complex64> {
        let [i, j, k, l] = idx;
        if i == j || k == l {
            return Some(Complex64::new(0.0, 0.0));
        }
        let variants = [
            ([i, j, k, l], 1.0),
            ([j, i, k, l], -1.0),
            ([i, j, l, k], -1.0),
            ([j, i, l, k], 1.0),
            ([k, l, i, j], 1.0),
            ([l, k, i, j], -1.0),
            ([k, l, j, i], -1.0),
            ([l, k, j, i], 1.0),
        ];
        for (v, s) in variants {
            if let Some(x) = self.entries.get(&v) {
                return Some(x * s);
            }
            if let Some(x) = self.entries.get(&v.map(FIndex::conj)) {
                return Some(x.conj() * s);
            }
        }
        None
    }
}

impl Serialize for WeylComponents {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(serde::Serialize)]
        struct Entry {
            indices: Vec<String>,
            re: f64,
            im: f64,
        }
        let mut seq = s.serialize_seq(Some(self.entries.len()))?;
        for (idx, v) in &self.entries {
            seq.serialize_element(&Entry {
                indices: idx.iter().map(|i| i.label(self.n)).collect(),
                re: v.re,
                im: v.im,
            })?;
        }
        seq.end()
    }
}

/// The Weyl components with closed forms in base curvature.
pub fn weyl_components(kt: &KTensor) -> WeylComponents {
    let n = kt.n;
    let (g, k) = (&kt.frame.g, &kt.k);
    let zero = Complex64::new(0.0, 0.0);
    let e = kt.k_square_traceless();
    let mut w = WeylComponents {
        n,
        entries: BTreeMap::new(),
    };
    for p in FIndex::all(n) {
        w.insert([p, Zero, Zero, Top], zero);
    }
    for a in 0..n {
        w.insert([Hol(a), Top, Zero, Top], zero);
        w.insert([Top, Hol(a), AntiHol(a), Top], zero);
        for b in 0..n {
            w.insert([Hol(a), Zero, Zero, Hol(b)], zero);
            w.insert([AntiHol(a), Zero, Zero, AntiHol(b)], zero);
            let v = e[(a, b)] * -0.5;
            w.insert([Hol(a), Zero, Zero, AntiHol(b)], v);
            w.insert([AntiHol(b), Zero, Zero, Hol(a)], v);
            w.insert([Hol(a), Top, Zero, AntiHol(b)], zero);
            w.insert([Top, Hol(a), AntiHol(b), Top], zero);
            w.insert([Top, AntiHol(b), Hol(a), Top], zero);
            for c in 0..n {
                for d in 0..n {
                    w.insert([Hol(a), Hol(b), Zero, AntiHol(d)], zero);
                    w.insert([Hol(a), Zero, Hol(c), AntiHol(d)], -I * 0.5 * kt.dk(c, d, a));
                    w.insert([Hol(a), Hol(b), AntiHol(c), AntiHol(d)], zero);
                    let v = kt.frame.riemann(a, b, c, d)
                        + k[(a, b)] * g[(c, d)]
                        + k[(c, d)] * g[(a, b)]
                        + k[(c, b)] * g[(a, d)]
                        + k[(a, d)] * g[(c, b)];
                    w.insert([Hol(a), AntiHol(b), Hol(c), AntiHol(d)], v * 0.5);
                }
            }
        }
    }
    w
}

/// `𝗀^{il} W_{i j k l}` for the `(j, k)` pairs whose terms are all known:
/// `(β̄, γ)` and `(0, β̄)`. Returns the largest modulus.
pub fn weyl_trace_residual(kt: &KTensor, w: &WeylComponents) -> Result<f64, FeffermanError> {
    let n = kt.n;
    let g_inv = fefferman_metric_inverse(kt);
    let all = FIndex::all(n);
    let mut pairs = Vec::new();
    for b in 0..n {
        pairs.push((Zero, AntiHol(b)));
        for c in 0..n {
            pairs.push((AntiHol(b), Hol(c)));
        }
    }
    let mut worst = 0.0f64;
    for (j, k) in pairs {
        let mut acc = Complex64::new(0.0, 0.0);
        for &i in &all {
            for &l in &all {
                let gil = g_inv.get(&[i, l]);
                if gil.norm() == 0.0 {
                    continue;
                }
                let v = w.get([i, j, k, l]).ok_or(FeffermanError::MissingComponent {
                    tensor: "Weyl",
                    indices: [i, j, k, l].iter().map(|x| x.label(n)).collect(),
                })?;
                acc += gil * v;
            }
        }
        worst = worst.max(acc.norm());
    }
    Ok(worst)
}

use num_complex::Complex64;

use super::{CurvatureError, Geometry};
use crate::jets::{complex_partial, CJet, Wirtinger};

/// Type of a tensor slot: holomorphic `a` or antiholomorphic `ā`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Slot {
    Hol,
    Anti,
}

/// Covariant tensor with holomorphic and antiholomorphic slots, components
/// stored row-major (last slot fastest) as complex jets.
#[derive(Clone, Debug)]
pub struct Tensor {
    pub n: usize,
    pub slots: Vec<Slot>,
    pub comps: Vec<CJet>,
}

impl Tensor {
    pub fn scalar(n: usize, f: CJet) -> Tensor {
        Tensor {
            n,
            slots: Vec::new(),
            comps: vec![f],
        }
    }

    /// Rank-2 tensor from a matrix `m[a][b]` with the given slot types.
    pub fn from_matrix(slots: [Slot; 2], m: &[Vec<CJet>]) -> Tensor {
        Tensor {
            n: m.len(),
            slots: slots.to_vec(),
            comps: m.iter().flat_map(|r| r.iter().cloned()).collect(),
        }
    }

    pub fn rank(&self) -> usize {
        self.slots.len()
    }

    pub fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank());
        idx.iter().fold(0, |acc, &i| acc * self.n + i)
    }

    pub fn get(&self, idx: &[usize]) -> &CJet {
        &self.comps[self.offset(idx)]
    }

    pub fn value(&self, idx: &[usize]) -> Complex64 {
        self.get(idx).value()
    }

    /// Index tuples in storage order.
    pub fn indices(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        let (n, k) = (self.n, self.rank());
        (0..n.pow(k as u32)).map(move |mut flat| {
            let mut idx = vec![0; k];
            for s in (0..k).rev() {
                idx[s] = flat % n;
                flat /= n;
            }
            idx
        })
    }

    pub fn order(&self) -> usize {
        self.comps.iter().map(CJet::order).min().unwrap_or(0)
    }

    pub fn max_abs_value(&self) -> f64 {
        self.comps.iter().map(|c| c.value().norm()).fold(0.0, f64::max)
    }
}

impl Geometry {
    /// Covariant derivative in direction `dir`; the new slot is appended last.
    ///
    /// Kähler Christoffels never mix types, so a holomorphic direction corrects
    /// only holomorphic slots (by `Γ`) and an antiholomorphic one only
    /// antiholomorphic slots (by `conj Γ`).
    pub fn covd(&self, t: &Tensor, dir: Slot) -> Result<Tensor, CurvatureError> {
        let n = self.n();
        let gamma = match dir {
            Slot::Hol => self.christoffel(),
            Slot::Anti => self.christoffel_conj(),
        };
        let mut comps = Vec::with_capacity(t.comps.len() * n);
        for idx in t.indices() {
            let base = t.get(&idx);
            for j in 0..n {
                let w = match dir {
                    Slot::Hol => Wirtinger::Z(j),
                    Slot::Anti => Wirtinger::ZBar(j),
                };
                let mut c = complex_partial(base, w).map_err(|_| CurvatureError::InsufficientOrder {
                    needed: base.order() + 1,
                    have: base.order(),
                })?;
                for (s, &slot) in t.slots.iter().enumerate() {
                    if slot != dir {
                        continue;
                    }
                    let mut moved = idx.clone();
                    for g in 0..n {
                        moved[s] = g;
                        c = c - &gamma[g][j][idx[s]] * t.get(&moved);
                    }
                }
                comps.push(c);
            }
        }
        let mut slots = t.slots.clone();
        slots.push(dir);
        Ok(Tensor {
            n,
            slots,
            comps,
        })
    }

    /// Successive covariant derivatives along `dirs`.
    pub fn covd_chain(&self, t: &Tensor, dirs: &[Slot]) -> Result<Tensor, CurvatureError> {
        dirs.iter().try_fold(t.clone(), |acc, &d| self.covd(&acc, d))
    }
}

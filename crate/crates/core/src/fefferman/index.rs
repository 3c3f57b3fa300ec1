use num_complex::Complex64;
use serde::ser::{Serialize, SerializeStruct, Serializer};

/// One slot of the adapted Fefferman frame `(X_0, X_α, X_ᾱ, X_{2n+1})`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FIndex {
    Zero,
    Hol(usize),
    AntiHol(usize),
    Top,
}

impl FIndex {
    /// Complex conjugation swaps `α` and `ᾱ` and fixes `0` and `2n+1`.
    pub fn conj(self) -> FIndex {
        match self {
            FIndex::Hol(a) => FIndex::AntiHol(a),
            FIndex::AntiHol(a) => FIndex::Hol(a),
            other => other,
        }
    }

    /// All `2n + 2` indices in frame order.
    pub fn all(n: usize) -> Vec<FIndex> {
        let mut out = Vec::with_capacity(2 * n + 2);
        out.push(FIndex::Zero);
        out.extend((0..n).map(FIndex::Hol));
        out.extend((0..n).map(FIndex::AntiHol));
        out.push(FIndex::Top);
        out
    }

    pub fn position(self, n: usize) -> usize {
        match self {
            FIndex::Zero => 0,
            FIndex::Hol(a) => 1 + a,
            FIndex::AntiHol(a) => 1 + n + a,
            FIndex::Top => 2 * n + 1,
        }
    }

    pub fn from_position(pos: usize, n: usize) -> FIndex {
        match pos {
            0 => FIndex::Zero,
            p if p <= n => FIndex::Hol(p - 1),
            p if p <= 2 * n => FIndex::AntiHol(p - 1 - n),
            _ => FIndex::Top,
        }
    }

    /// `"0"`, `"1"`, `"1b"`, …, `"2n+1"` with one-based base indices.
    pub fn label(self, n: usize) -> String {
        match self {
            FIndex::Zero => "0".to_string(),
            FIndex::Hol(a) => format!("{}", a + 1),
            FIndex::AntiHol(a) => format!("{}b", a + 1),
            FIndex::Top => format!("{}", 2 * n + 1),
        }
    }
}

/// Dense table of frame components of a covariant tensor at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    n: usize,
    rank: usize,
    data: Vec<Complex64>,
}

impl Table {
    pub fn zeros(n: usize, rank: usize) -> Table {
        Table {
            n,
            rank,
            data: vec![Complex64::new(0.0, 0.0); (2 * n + 2).pow(rank as u32)],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    fn offset(&self, idx: &[FIndex]) -> usize {
        assert_eq!(idx.len(), self.rank, "index length must match the table rank");
        idx.iter().fold(0, |acc, i| acc * (2 * self.n + 2) + i.position(self.n))
    }

    pub fn get(&self, idx: &[FIndex]) -> Complex64 {
        self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[FIndex], v: Complex64) {
        let o = self.offset(idx);
        self.data[o] = v;
    }

    /// Index tuples in storage order.
    pub fn indices(&self) -> Vec<Vec<FIndex>> {
        let all = FIndex::all(self.n);
        let mut out: Vec<Vec<FIndex>> = vec![Vec::new()];
        for _ in 0..self.rank {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    all.iter().map(move |&i| {
                        let mut next = prefix.clone();
                        next.push(i);
                        next
                    })
                })
                .collect();
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Table) -> f64 {
        assert_eq!((self.n, self.rank), (other.n, other.rank));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

#[derive(serde::Serialize)]
struct Entry {
    indices: Vec<String>,
    re: f64,
    im: f64,
}

/// Serialized as `{rank, entries: [{indices, re, im}]}` listing nonzero entries only.
impl Serialize for Table {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let entries: Vec<Entry> = self
            .indices()
            .into_iter()
            .filter_map(|idx| {
                let v = self.get(&idx);
                (v.norm() != 0.0).then(|| Entry {
                    indices: idx.iter().map(|i| i.label(self.n)).collect(),
                    re: v.re,
                    im: v.im,
                })
            })
            .collect();
        let mut st = s.serialize_struct("Table", 2)?;
        st.serialize_field("rank", &self.rank)?;
        st.serialize_field("entries", &entries)?;
        st.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positions_round_trip() {
        for n in 1..4 {
            for (p, i) in FIndex::all(n).into_iter().enumerate() {
                assert_eq!(i.position(n), p);
                assert_eq!(FIndex::from_position(p, n), i);
                assert_eq!(i.conj().conj(), i);
            }
        }
    }

    #[test]
    fn table_storage() {
        let mut t = Table::zeros(2, 3);
        let idx = [FIndex::Hol(1), FIndex::Top, FIndex::AntiHol(0)];
        t.set(&idx, Complex64::new(1.0, -2.0));
        assert_eq!(t.get(&idx), Complex64::new(1.0, -2.0));
        assert_eq!(t.indices().len(), 216);
        assert_eq!(t.max_abs(), 5f64.sqrt());
    }
}

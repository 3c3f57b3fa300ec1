use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use super::{JetError, MAX_VARS};

/// Graded-lexicographic monomial basis in `nvars` variables up to `max_order`.
///
/// Every truncation to a lower order is a prefix of this layout, and so is the
/// product table, which is sorted by output index.
#[derive(Debug)]
pub(crate) struct Basis {
    pub nvars: usize,
    pub max_order: usize,
    pub exps: Vec<[u8; MAX_VARS]>,
    /// `len_upto[k]` is the number of monomials of total degree at most `k`.
    pub len_upto: Vec<usize>,
    lookup: HashMap<u64, u32>,
    /// `(i, j, out)` with `exps[i] + exps[j] == exps[out]`, grouped by `out`.
    pub products: Vec<(u32, u32, u32)>,
    /// `products_upto[k]` is the number of triples whose output has degree at most `k`.
    pub products_upto: Vec<usize>,
    /// Triples for output `k` live in `products[out_start[k]..out_start[k + 1]]`.
    pub out_start: Vec<usize>,
    /// `raise[v][i]` is the index of `exps[i] + e_v`, or `u32::MAX` past `max_order`.
    pub raise: Vec<Vec<u32>>,
}

fn pack(e: &[u8; MAX_VARS]) -> u64 {
    e.iter().fold(0u64, |acc, &x| (acc << 8) | u64::from(x))
}

fn binomial(n: usize, k: usize) -> usize {
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

impl Basis {
    fn build(nvars: usize, max_order: usize) -> Self {
        let mut exps = Vec::with_capacity(binomial(nvars + max_order, nvars));
        let mut len_upto = Vec::with_capacity(max_order + 1);
        for d in 0..=max_order {
            let mut cur = [0u8; MAX_VARS];
            push_degree(nvars, 0, d, &mut cur, &mut exps);
            len_upto.push(exps.len());
        }
        let degree: Vec<u8> = exps.iter().map(|e| e.iter().sum()).collect();
        let lookup: HashMap<u64, u32> = exps
            .iter()
            .enumerate()
            .map(|(i, e)| (pack(e), i as u32))
            .collect();

        let mut products = Vec::new();
        let mut products_upto = vec![0; max_order + 1];
        let mut out_start = Vec::with_capacity(exps.len() + 1);
        for (out, e) in exps.iter().enumerate() {
            out_start.push(products.len());
            let mut a = [0u8; MAX_VARS];
            push_divisors(nvars, 0, e, &mut a, &mut |a| {
                let mut b = [0u8; MAX_VARS];
                for v in 0..nvars {
                    b[v] = e[v] - a[v];
                }
                products.push((lookup[&pack(a)], lookup[&pack(&b)], out as u32));
            });
            products_upto[degree[out] as usize] = products.len();
        }
        out_start.push(products.len());

        let raise = (0..nvars)
            .map(|v| {
                exps.iter()
                    .map(|e| {
                        let mut f = *e;
                        f[v] += 1;
                        lookup.get(&pack(&f)).copied().unwrap_or(u32::MAX)
                    })
                    .collect()
            })
            .collect();

        Basis {
            nvars,
            max_order,
            exps,
            len_upto,
            lookup,
            products,
            products_upto,
            out_start,
            raise,
        }
    }

    pub fn index_of(&self, e: &[u8]) -> Option<usize> {
        if e.len() != self.nvars {
            return None;
        }
        let mut full = [0u8; MAX_VARS];
        full[..self.nvars].copy_from_slice(e);
        self.lookup.get(&pack(&full)).map(|&i| i as usize)
    }

    pub fn len(&self, order: usize) -> usize {
        self.len_upto[order]
    }
}

fn push_degree(
    nvars: usize,
    var: usize,
    remaining: usize,
    cur: &mut [u8; MAX_VARS],
    out: &mut Vec<[u8; MAX_VARS]>,
) {
    if var + 1 == nvars {
        cur[var] = remaining as u8;
        out.push(*cur);
        cur[var] = 0;
        return;
    }
    for k in (0..=remaining).rev() {
        cur[var] = k as u8;
        push_degree(nvars, var + 1, remaining - k, cur, out);
    }
    cur[var] = 0;
}

fn push_divisors(
    nvars: usize,
    var: usize,
    e: &[u8; MAX_VARS],
    a: &mut [u8; MAX_VARS],
    f: &mut impl FnMut(&[u8; MAX_VARS]),
) {
    if var == nvars {
        f(a);
        return;
    }
    for k in 0..=e[var] {
        a[var] = k;
        push_divisors(nvars, var + 1, e, a, f);
    }
    a[var] = 0;
}

/// Largest product table we are willing to build.
const MAX_PRODUCTS: usize = 40_000_000;

/// Whether a basis of this size is buildable: exponents fit in a byte and the
/// product table stays bounded.
pub(crate) fn order_fits(nvars: usize, order: usize) -> bool {
    if order > 250 {
        return false;
    }
    // Pairs of monomials with total degree <= order: C(order + 2n, 2n).
    let mut count = 1u128;
    for i in 0..(2 * nvars) as u128 {
        count = count * (order as u128 + 1 + i) / (i + 1);
    }
    count <= MAX_PRODUCTS as u128
}

type Cache = Mutex<HashMap<usize, Arc<Basis>>>;

fn cache() -> &'static Cache {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Shared basis able to hold jets of `order` in `nvars` variables.
pub(crate) fn basis_for(nvars: usize, order: usize) -> Result<Arc<Basis>, JetError> {
    if nvars == 0 || nvars > MAX_VARS {
        return Err(JetError::TooManyVariables(nvars));
    }
    if !order_fits(nvars, order) {
        return Err(JetError::OrderTooLarge { nvars, order });
    }
    let mut guard = cache().lock().expect("jet basis cache poisoned");
    if let Some(b) = guard.get(&nvars) {
        if b.max_order >= order {
            return Ok(Arc::clone(b));
        }
    }
    // Overshoot a little so stepwise growth does not rebuild on every request.
    let mut target = order.max(guard.get(&nvars).map_or(0, |b| b.max_order + 2));
    while target > order && !order_fits(nvars, target) {
        target -= 1;
    }
    let b = Arc::new(Basis::build(nvars, target));
    guard.insert(nvars, Arc::clone(&b));
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_match_binomials() {
        let b = Basis::build(4, 6);
        for k in 0..=6 {
            assert_eq!(b.len(k), binomial(4 + k, 4));
        }
        assert_eq!(b.products.len(), binomial(8 + 6, 8));
    }

    #[test]
    fn graded_layout_is_prefix_closed() {
        let b = Basis::build(3, 5);
        for k in 0..5 {
            assert!(b.exps[..b.len(k)].iter().all(|e| e.iter().sum::<u8>() as usize <= k));
        }
        assert_eq!(b.exps[0], [0; MAX_VARS]);
        assert_eq!(&b.exps[1][..3], &[1, 0, 0]);
    }
}

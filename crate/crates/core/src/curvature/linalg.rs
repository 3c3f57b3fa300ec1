//! Small dense matrix helpers over complex jets and complex numbers.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::CurvatureError;
use crate::jets::CJet;

pub type JetMatrix = Vec<Vec<CJet>>;

/// Permutations of `0..n` with their signs.
fn permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], sign: f64, out: &mut Vec<(Vec<usize>, f64)>) {
        let n = used.len();
        if prefix.len() == n {
            out.push((prefix.clone(), sign));
            return;
        }
        // Picking the k-th unused element costs k transpositions.
        let mut k = 0;
        for i in 0..n {
            if used[i] {
                continue;
            }
            used[i] = true;
            prefix.push(i);
            rec(prefix, used, if k % 2 == 0 { sign } else { -sign }, out);
            prefix.pop();
            used[i] = false;
            k += 1;
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], 1.0, &mut out);
    out
}

/// Determinant by full permutation expansion; division free, so singular
/// matrices are fine.
pub fn det(m: &[Vec<CJet>]) -> CJet {
    let n = m.len();
    let mut acc: Option<CJet> = None;
    for (perm, sign) in permutations(n) {
        let mut term = m[0][perm[0]].clone();
        for (row, &col) in perm.iter().enumerate().skip(1) {
            term = &term * &m[row][col];
        }
        if sign < 0.0 {
            term = -term;
        }
        acc = Some(match acc {
            Some(a) => a + term,
            None => term,
        });
    }
    acc.expect("nonempty matrix")
}

fn minor(m: &[Vec<CJet>], skip_row: usize, skip_col: usize) -> JetMatrix {
    m.iter()
        .enumerate()
        .filter(|(r, _)| *r != skip_row)
        .map(|(_, row)| {
            row.iter()
                .enumerate()
                .filter(|(c, _)| *c != skip_col)
                .map(|(_, x)| x.clone())
                .collect()
        })
        .collect()
}

/// Cofactor matrix `C[a][b] = (-1)^(a+b) det(minor(a, b))`.
pub fn cofactors(m: &[Vec<CJet>]) -> JetMatrix {
    let n = m.len();
    if n == 1 {
        return vec![vec![CJet::constant_like(&m[0][0].re, Complex64::new(1.0, 0.0))]];
    }
    (0..n)
        .map(|a| {
            (0..n)
                .map(|b| {
                    let d = det(&minor(m, a, b));
                    if (a + b) % 2 == 0 {
                        d
                    } else {
                        -d
                    }
                })
                .collect()
        })
        .collect()
}

/// `out[a][b] = sum_c x[a][c] * y[c][b]`.
pub fn matmul(x: &[Vec<CJet>], y: &[Vec<CJet>]) -> JetMatrix {
    let n = x.len();
    (0..n)
        .map(|a| {
            (0..n)
                .map(|b| {
                    (1..n).fold(&x[a][0] * &y[0][b], |acc, c| acc + &x[a][c] * &y[c][b])
                })
                .collect()
        })
        .collect()
}

pub fn transpose(x: &[Vec<CJet>]) -> JetMatrix {
    let n = x.len();
    (0..n).map(|a| (0..n).map(|b| x[b][a].clone()).collect()).collect()
}

pub fn trace(x: &[Vec<CJet>]) -> CJet {
    (1..x.len()).fold(x[0][0].clone(), |acc, i| acc + &x[i][i])
}

pub fn map(x: &[Vec<CJet>], f: impl Fn(&CJet) -> CJet) -> JetMatrix {
    x.iter().map(|row| row.iter().map(&f).collect()).collect()
}

/// Constant terms as a complex matrix.
pub fn values(x: &[Vec<CJet>]) -> DMatrix<Complex64> {
    let n = x.len();
    DMatrix::from_fn(n, n, |a, b| x[a][b].value())
}

/// Eigenvalues of `ric * g^{-1}` for Hermitian `ric` and positive `g`, ascending.
pub fn pencil_eigenvalues(
    ric: &DMatrix<Complex64>,
    g: &DMatrix<Complex64>,
) -> Result<Vec<f64>, CurvatureError> {
    let n = g.nrows();
    let scale = ric.iter().map(|c| c.norm()).fold(0.0, f64::max) / g.iter().map(|c| c.norm()).fold(f64::MIN_POSITIVE, f64::max);
    let tol = 1e-10 * (1.0 + scale);
    let mut eigs = match n {
        1 => {
            let e = ric[(0, 0)] / g[(0, 0)];
            check_real(e, tol)?;
            vec![e.re]
        }
        2 => {
            // Reduce the pencil to a Hermitian 2x2 via Cholesky, then use the
            // quadratic formula in its sum-of-squares form, which stays accurate
            // for nearly equal eigenvalues.
            let a = hermitian_reduction(ric, g)?;
            check_real(a[(0, 0)], tol)?;
            check_real(a[(1, 1)], tol)?;
            check_real(a[(0, 1)] - a[(1, 0)].conj(), tol)?;
            let (p, q) = (a[(0, 0)].re, a[(1, 1)].re);
            let off = (a[(0, 1)] + a[(1, 0)].conj()) * 0.5;
            let half = 0.5 * (p - q);
            let rad = half.hypot(off.norm());
            let mid = 0.5 * (p + q);
            vec![mid - rad, mid + rad]
        }
        _ => {
            let a = hermitian_reduction(ric, g)?;
            for i in 0..n {
                check_real(a[(i, i)], tol)?;
            }
            // Symmetrize away rounding before the Hermitian solver.
            let a = (&a + a.adjoint()) * Complex64::new(0.5, 0.0);
            a.symmetric_eigenvalues().iter().copied().collect()
        }
    };
    eigs.sort_by(f64::total_cmp);
    Ok(eigs)
}

/// `L^{-1} ric L^{-H}` where `g = L L^H`; same spectrum as `ric g^{-1}`.
fn hermitian_reduction(
    ric: &DMatrix<Complex64>,
    g: &DMatrix<Complex64>,
) -> Result<DMatrix<Complex64>, CurvatureError> {
    let chol = g
        .clone()
        .cholesky()
        .ok_or_else(|| CurvatureError::DegenerateMetric(min_hermitian_eigenvalue(g)))?;
    let linv = chol
        .l()
        .try_inverse()
        .ok_or_else(|| CurvatureError::EigenSolver("singular Cholesky factor".into()))?;
    Ok(&linv * ric * linv.adjoint())
}

fn check_real(e: Complex64, tol: f64) -> Result<(), CurvatureError> {
    if e.im.abs() > tol || !e.is_finite() {
        return Err(CurvatureError::NonRealEigenvalue(e.im));
    }
    Ok(())
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_hermitian_eigenvalue(m: &DMatrix<Complex64>) -> f64 {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutation_signs() {
        let p = permutations(3);
        assert_eq!(p.len(), 6);
        let odd = p.iter().filter(|(_, s)| *s < 0.0).count();
        assert_eq!(odd, 3);
        let swap = p.iter().find(|(v, _)| v == &vec![1, 0, 2]).unwrap();
        assert_eq!(swap.1, -1.0);
    }

    #[test]
    fn hermitian_pencil() {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let g = DMatrix::from_row_slice(3, 3, &[
            c(2.0, 0.0), c(0.3, 0.1), c(0.0, 0.0),
            c(0.3, -0.1), c(1.5, 0.0), c(0.2, 0.0),
            c(0.0, 0.0), c(0.2, 0.0), c(1.0, 0.0),
        ]);
        let ric = &g * c(-2.5, 0.0);
        let e = pencil_eigenvalues(&ric, &g).unwrap();
        assert!(e.iter().all(|x| (x + 2.5).abs() < 1e-12));
    }
}

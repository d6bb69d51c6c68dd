//! Thin wrappers over `faer` for the dense solves used throughout.

use faer::linalg::solvers::{DenseSolveCore, Solve};
use faer::{c64, Mat};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type RMat = Mat<f64>;
pub type CMat = Mat<c64>;

pub fn rmat(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> f64) -> RMat {
    Mat::from_fn(rows, cols, f)
}

pub fn cmat(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> Complex64) -> CMat {
    Mat::from_fn(rows, cols, f)
}

/// Divide each row of `a` (and of `rhs`) by its largest absolute entry.
pub fn equilibrate_rows(a: &mut RMat, rhs: &mut [Vec<f64>]) -> Vec<f64> {
    let mut scales = Vec::with_capacity(a.nrows());
    for i in 0..a.nrows() {
        let m = (0..a.ncols()).map(|j| a[(i, j)].abs()).fold(0.0, f64::max);
        let s = if m > 0.0 { 1.0 / m } else { 1.0 };
        for j in 0..a.ncols() {
            a[(i, j)] *= s;
        }
        for r in rhs.iter_mut() {
            r[i] *= s;
        }
        scales.push(s);
    }
    scales
}

/// Solve `A X = B` for several right-hand sides with one LU factorization.
pub fn solve_many(a: &RMat, rhs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let n = a.nrows();
    let b = rmat(n, rhs.len(), |i, j| rhs[j][i]);
    let x = a.partial_piv_lu().solve(&b);
    let out: Vec<Vec<f64>> = (0..rhs.len())
        .map(|j| (0..n).map(|i| x[(i, j)]).collect())
        .collect();
    if out.iter().flatten().all(|v| v.is_finite()) {
        Ok(out)
    } else {
        Err(Error::NumericRange("singular linear system".into()))
    }
}

/// Singular values in decreasing order.
pub fn singular_values(a: &RMat) -> Result<Vec<f64>> {
    let mut s = a
        .singular_values()
        .map_err(|e| Error::Eigensolver(format!("SVD failed: {e:?}")))?;
    s.sort_by(|x, y| y.total_cmp(x));
    Ok(s)
}

/// 2-norm condition number.
pub fn condition_number(a: &RMat) -> Result<f64> {
    let s = singular_values(a)?;
    let smin = *s.last().unwrap_or(&0.0);
    Ok(if smin > 0.0 { s[0] / smin } else { f64::INFINITY })
}

/// Singular triplets of a complex matrix in decreasing order: (σ, right vector).
pub fn svd_right(a: &CMat) -> Result<Vec<(f64, Vec<Complex64>)>> {
    let svd = a
        .svd()
        .map_err(|e| Error::Eigensolver(format!("SVD failed: {e:?}")))?;
    let s = svd.S().column_vector();
    let v = svd.V();
    let mut out: Vec<(f64, Vec<Complex64>)> = (0..s.nrows())
        .map(|j| (s[j].re, (0..v.nrows()).map(|i| v[(i, j)]).collect()))
        .collect();
    out.sort_by(|x, y| y.0.total_cmp(&x.0));
    Ok(out)
}

/// Eigenvalues and unit eigenvectors of a complex matrix.
pub fn eigen(a: &CMat) -> Result<Vec<(Complex64, Vec<Complex64>)>> {
    let evd = a
        .eigen()
        .map_err(|e| Error::Eigensolver(format!("dense eigensolve failed: {e:?}")))?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let out: Vec<_> = (0..s.nrows())
        .map(|j| {
            let mut v: Vec<Complex64> = (0..u.nrows()).map(|i| u[(i, j)]).collect();
            let nrm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if nrm > 0.0 {
                v.iter_mut().for_each(|z| *z /= nrm);
            }
            (s[j], v)
        })
        .collect();
    if out.iter().any(|(l, _)| !l.is_finite()) {
        return Err(Error::Eigensolver(
            "non-finite eigenvalue (matrix may contain NaN or Inf)".into(),
        ));
    }
    Ok(out)
}

pub fn eigenvalues(a: &CMat) -> Result<Vec<Complex64>> {
    a.eigenvalues()
        .map_err(|e| Error::Eigensolver(format!("dense eigensolve failed: {e:?}")))
}

pub fn inverse(a: &CMat) -> CMat {
    a.partial_piv_lu().inverse()
}

/// Largest singular value of a complex matrix.
pub fn norm2(a: &CMat) -> Result<f64> {
    let s = a
        .singular_values()
        .map_err(|e| Error::Eigensolver(format!("SVD failed: {e:?}")))?;
    Ok(s.into_iter().fold(0.0, f64::max))
}

/// Max-abs entry of a complex matrix.
pub fn max_abs(a: &CMat) -> f64 {
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max(a[(i, j)].norm());
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_and_condition() {
        let a = rmat(3, 3, |i, j| if i == j { (i + 1) as f64 } else { 0.0 });
        let x = solve_many(&a, &[vec![1.0, 2.0, 3.0]]).unwrap();
        assert!(x[0].iter().all(|v| (v - 1.0).abs() < 1e-15));
        assert!((condition_number(&a).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn eigen_of_diagonal() {
        let a = cmat(3, 3, |i, j| {
            if i == j {
                Complex64::new(i as f64, 1.0)
            } else {
                0.0.into()
            }
        });
        let mut ev: Vec<f64> = eigen(&a).unwrap().iter().map(|(l, _)| l.re).collect();
        ev.sort_by(f64::total_cmp);
        assert_eq!(ev, vec![0.0, 1.0, 2.0]);
    }
}

//! Dense real matrices and the symmetric eigensolver (Householder reduction
//! followed by implicit-shift QL on the tridiagonal form).

use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Row-major dense real matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::Shape { expected: c, found: row.len() });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { rows: r, cols: c, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Shape { expected: self.cols, found: other.rows });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] = out[(i, j)] + a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
    }

    /// `max |A - B|` entrywise.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()))
    }

    pub fn is_symmetric(&self, tol: T) -> bool {
        self.is_square() && self.max_abs_diff(&self.transpose()) <= tol
    }

    /// `max |M Mᵗ - I|`.
    pub fn orthogonality_residual(&self) -> T {
        let prod = self.matmul(&self.transpose()).expect("square product");
        prod.max_abs_diff(&Self::identity(self.rows))
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// Eigenvalues in ascending order with matching eigenvectors as columns.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricEigen<T> {
    pub values: Vec<T>,
    pub vectors: Matrix<T>,
}

/// Eigendecomposition of a symmetric tridiagonal matrix given by its
/// diagonal and its `n - 1` off-diagonal entries.
///
/// Eigenvalues come back ascending; each eigenvector column is flipped so its
/// first non-negligible component is positive.
pub fn tridiagonal_eigen<T: Real>(diag: &[T], off: &[T]) -> Result<SymmetricEigen<T>> {
    let n = diag.len();
    if n == 0 {
        return Ok(SymmetricEigen { values: Vec::new(), vectors: Matrix::zeros(0, 0) });
    }
    if off.len() + 1 != n {
        return Err(Error::Shape { expected: n - 1, found: off.len() });
    }
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(T::zero());
    let mut z = Matrix::identity(n);
    implicit_ql(&mut d, &mut e, &mut z)?;
    Ok(canonicalize(d, z))
}

/// Eigendecomposition of a dense real symmetric matrix.
pub fn symmetric_eigen<T: Real>(a: &Matrix<T>) -> Result<SymmetricEigen<T>> {
    if !a.is_square() {
        return Err(Error::Shape { expected: a.rows(), found: a.cols() });
    }
    let n = a.rows();
    if n == 0 {
        return Ok(SymmetricEigen { values: Vec::new(), vectors: Matrix::zeros(0, 0) });
    }
    let mut v = a.clone();
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    householder_tridiagonalize(&mut v, &mut d, &mut e);
    // e[i] holds the sub-diagonal entry (i, i-1); shift so e[i] pairs (i, i+1).
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = T::zero();
    implicit_ql(&mut d, &mut e, &mut v)?;
    Ok(canonicalize(d, v))
}

/// Householder reduction to tridiagonal form, accumulating the orthogonal
/// transform in `v` (which starts as a copy of the input).
fn householder_tridiagonalize<T: Real>(v: &mut Matrix<T>, d: &mut [T], e: &mut [T]) {
    let n = d.len();
    for j in 0..n {
        d[j] = v[(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = T::zero();
        let mut h = T::zero();
        for k in 0..i {
            scale = scale + d[k].abs();
        }
        if scale == T::zero() {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1, j)];
                v[(i, j)] = T::zero();
                v[(j, i)] = T::zero();
            }
        } else {
            for k in 0..i {
                d[k] = d[k] / scale;
                h = h + d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > T::zero() {
                g = -g;
            }
            e[i] = scale * g;
            h = h - f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = T::zero();
            }
            for j in 0..i {
                f = d[j];
                v[(j, i)] = f;
                g = e[j] + v[(j, j)] * f;
                for k in (j + 1)..i {
                    g = g + v[(k, j)] * d[k];
                    e[k] = e[k] + v[(k, j)] * f;
                }
                e[j] = g;
            }
            f = T::zero();
            for j in 0..i {
                e[j] = e[j] / h;
                f = f + e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] = e[j] - hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[(k, j)] = v[(k, j)] - (f * e[k] + g * d[k]);
                }
                d[j] = v[(i - 1, j)];
                v[(i, j)] = T::zero();
            }
        }
        d[i] = h;
    }

    for i in 0..n.saturating_sub(1) {
        v[(n - 1, i)] = v[(i, i)];
        v[(i, i)] = T::one();
        let h = d[i + 1];
        if h != T::zero() {
            for k in 0..=i {
                d[k] = v[(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = T::zero();
                for k in 0..=i {
                    g = g + v[(k, i + 1)] * v[(k, j)];
                }
                for k in 0..=i {
                    v[(k, j)] = v[(k, j)] - g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[(k, i + 1)] = T::zero();
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1, j)];
        v[(n - 1, j)] = T::zero();
    }
    v[(n - 1, n - 1)] = T::one();
    e[0] = T::zero();
}

/// Implicit-shift QL iteration on a symmetric tridiagonal matrix.
///
/// `d` is the diagonal, `e[i]` couples `i` and `i + 1` (last entry unused).
/// Rotations are accumulated into the columns of `z`.
fn implicit_ql<T: Real>(d: &mut [T], e: &mut [T], z: &mut Matrix<T>) -> Result<()> {
    let n = d.len();
    let max_iter = 30 * n.max(1) + 30;
    let eps = T::epsilon();
    let two = T::lit(2.0);
    let mut f = T::zero();
    let mut tst1 = T::zero();
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m == n {
            m = n - 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > max_iter {
                    return Err(Error::Numeric {
                        what: "implicit QL eigensolver".into(),
                        residual: (e[l].abs() / tst1.max(T::min_positive_value())).to_f64_lossy(),
                    });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (two * e[l]);
                let mut r = p.hypot(T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di = *di - h;
                }
                f = f + h;

                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = T::zero();
                let mut s2 = T::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        let zh = z[(k, i + 1)];
                        z[(k, i + 1)] = s * z[(k, i)] + c * zh;
                        z[(k, i)] = c * z[(k, i)] - s * zh;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] = d[l] + f;
        e[l] = T::zero();
    }
    Ok(())
}

fn canonicalize<T: Real>(values: Vec<T>, vectors: Matrix<T>) -> SymmetricEigen<T> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite eigenvalues"));
    let mut sorted = Matrix::zeros(n, n);
    let mut vals = Vec::with_capacity(n);
    for (new, &old) in order.iter().enumerate() {
        vals.push(values[old]);
        let col_max = (0..n).fold(T::zero(), |m, k| m.max(vectors[(k, old)].abs()));
        let threshold = col_max * T::lit(1e-8);
        let sign = (0..n)
            .map(|k| vectors[(k, old)])
            .find(|x| x.abs() > threshold)
            .map_or(T::one(), |x| if x < T::zero() { -T::one() } else { T::one() });
        for k in 0..n {
            sorted[(k, new)] = sign * vectors[(k, old)];
        }
    }
    SymmetricEigen { values: vals, vectors: sorted }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reconstruct(eig: &SymmetricEigen<f64>) -> Matrix<f64> {
        let n = eig.values.len();
        let mut lam = Matrix::zeros(n, n);
        for i in 0..n {
            lam[(i, i)] = eig.values[i];
        }
        eig.vectors.matmul(&lam).unwrap().matmul(&eig.vectors.transpose()).unwrap()
    }

    #[test]
    fn two_by_two_tridiagonal() {
        let eig = tridiagonal_eigen(&[1.0, 1.0], &[0.5]).unwrap();
        assert!(f64::abs(eig.values[0] - 0.5) < 1e-15);
        assert!(f64::abs(eig.values[1] - 1.5) < 1e-15);
        assert!(eig.vectors[(0, 0)] > 0.0 && eig.vectors[(0, 1)] > 0.0);
        assert!(eig.vectors.orthogonality_residual() < 1e-15);
    }

    #[test]
    fn three_chain_spectrum() {
        // ω0 on the diagonal, couplings (3, 4): eigenvalues ω0, ω0 ± 5
        let eig = tridiagonal_eigen(&[2.0, 2.0, 2.0], &[3.0, 4.0]).unwrap();
        let expect = [-3.0, 2.0, 7.0];
        for (v, x) in eig.values.iter().zip(expect) {
            assert!(f64::abs(v - x) < 1e-13, "{v} vs {x}");
        }
    }

    #[test]
    fn decoupled_is_identity() {
        let eig = tridiagonal_eigen(&[1.0; 4], &[0.0; 3]).unwrap();
        assert_eq!(eig.vectors, Matrix::identity(4));
        assert!(eig.values.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn dense_random_symmetric() {
        let n = 9;
        let mut a = Matrix::zeros(n, n);
        let mut seed = 12345u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        for i in 0..n {
            for j in 0..=i {
                let x = next();
                a[(i, j)] = x;
                a[(j, i)] = x;
            }
        }
        let eig = symmetric_eigen(&a).unwrap();
        assert!(eig.vectors.orthogonality_residual() < 1e-13);
        assert!(reconstruct(&eig).max_abs_diff(&a) < 1e-13);
        assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn dense_with_degeneracy() {
        let a = Matrix::from_rows(&[
            vec![2.0, 0.0, 0.0],
            vec![0.0, 2.0, 0.0],
            vec![0.0, 0.0, 5.0],
        ])
        .unwrap();
        let eig = symmetric_eigen(&a).unwrap();
        assert!(f64::abs(eig.values[0] - 2.0) < 1e-15);
        assert!(f64::abs(eig.values[2] - 5.0) < 1e-15);
        assert!(reconstruct(&eig).max_abs_diff(&a) < 1e-14);
    }

    #[test]
    fn shape_errors() {
        assert!(tridiagonal_eigen(&[1.0, 2.0], &[]).is_err());
        assert!(symmetric_eigen(&Matrix::<f64>::zeros(2, 3)).is_err());
        assert!(Matrix::from_rows(&[vec![1.0, 2.0], vec![1.0]]).is_err());
    }
}

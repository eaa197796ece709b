//! Small dense matrices.
//!
//! The component count of a reaction-diffusion system is small (a handful),
//! so these routines favour clarity over blocking. Large grid operators live
//! in [`crate::banded`].

use std::ops::{Index, IndexMut};

use num_complex::Complex;
use num_traits::{Float, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Field, Real};

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Field> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn diag(entries: &[T]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = e;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged matrix rows".into()));
        }
        Ok(Self {
            rows: r,
            cols: c,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        self.data.chunks(self.cols.max(1)).map(<[T]>::to_vec).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn map<U: Field>(&self, f: impl Fn(T) -> U) -> Mat<U> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|x| x * s)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-T::one()))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        Self::from_fn(self.rows, other.cols, |i, j| {
            let mut acc = T::zero();
            for k in 0..self.cols {
                acc += self[(i, k)] * other[(k, j)];
            }
            acc
        })
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = T::zero();
                for (j, &vj) in v.iter().enumerate() {
                    acc += self[(i, j)] * vj;
                }
                acc
            })
            .collect()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> T::Real {
        self.data
            .iter()
            .fold(T::Real::zero(), |m, x| m.max(x.modulus()))
    }

    pub fn lu(&self) -> Result<DenseLu<T>> {
        DenseLu::new(self)
    }

    /// Determinant by partial-pivoting elimination; zero for singular input.
    pub fn det(&self) -> T {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.clone();
        let mut det = T::one();
        for k in 0..n {
            let mut p = k;
            let mut best = a[(k, k)].modulus();
            for i in k + 1..n {
                let m = a[(i, k)].modulus();
                if m > best {
                    best = m;
                    p = i;
                }
            }
            if best == T::Real::zero() {
                return T::zero();
            }
            if p != k {
                for j in 0..n {
                    a.data.swap(k * n + j, p * n + j);
                }
                det = -det;
            }
            let pivot = a[(k, k)];
            det *= pivot;
            for i in k + 1..n {
                let f = a[(i, k)] / pivot;
                if f == T::zero() {
                    continue;
                }
                for j in k..n {
                    let akj = a[(k, j)];
                    a[(i, j)] -= f * akj;
                }
            }
        }
        det
    }
}

impl<T> Index<(usize, usize)> for Mat<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Real> Mat<T> {
    pub fn to_complex(&self) -> Mat<Complex<T>> {
        self.map(|x| Complex::new(x, T::zero()))
    }

    pub fn to_nalgebra(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)].to_f64_lossy())
    }

    /// Symmetric part `(A + Aᵀ)/2`.
    pub fn sym_part(&self) -> Self {
        let half = T::lit(0.5);
        Self::from_fn(self.rows, self.cols, |i, j| half * (self[(i, j)] + self[(j, i)]))
    }

    /// Eigenvalues of a general real square matrix (in `f64`).
    pub fn eigenvalues(&self) -> Vec<Complex<f64>> {
        if self.rows == 0 {
            return Vec::new();
        }
        self.to_nalgebra()
            .complex_eigenvalues()
            .iter()
            .map(|z| Complex::new(z.re, z.im))
            .collect()
    }

    /// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
    /// Returns eigenvalues (ascending) and eigenvectors as columns.
    pub fn symmetric_eigen(&self) -> (Vec<T>, Mat<T>) {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.sym_part();
        let mut v = Mat::identity(n);
        let eps = T::epsilon();
        for _sweep in 0..100 {
            let mut off = T::zero();
            for i in 0..n {
                for j in i + 1..n {
                    off += a[(i, j)] * a[(i, j)];
                }
            }
            let scale = a.max_abs().max(T::min_positive_value());
            if off.sqrt() <= eps * scale {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a[(p, q)];
                    if apq.abs() <= T::min_positive_value() {
                        continue;
                    }
                    let theta = (a[(q, q)] - a[(p, p)]) / (T::lit(2.0) * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                    let c = T::one() / (t * t + T::one()).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = c * akp - s * akq;
                        a[(k, q)] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = c * apk - s * aqk;
                        a[(q, k)] = s * apk + c * aqk;
                    }
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = c * vkp - s * vkq;
                        v[(k, q)] = s * vkp + c * vkq;
                    }
                }
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| a[(i, i)].partial_cmp(&a[(j, j)]).unwrap());
        let vals = order.iter().map(|&i| a[(i, i)]).collect();
        let vecs = Mat::from_fn(n, n, |r, c| v[(r, order[c])]);
        (vals, vecs)
    }

    /// Spectral norm (largest singular value).
    pub fn norm2(&self) -> T {
        let ata = self.transpose().matmul(self);
        let (vals, _) = ata.symmetric_eigen();
        vals.last().copied().unwrap_or(T::zero()).max(T::zero()).sqrt()
    }

    /// Positive-definiteness test of the symmetric part.
    pub fn sym_positive_definite(&self) -> bool {
        let (vals, _) = self.sym_part().symmetric_eigen();
        vals.iter().all(|&v| v > T::zero())
    }

    /// Minimum-norm least-squares solution via the eigen-decomposition of
    /// `AᵀA`, discarding directions with singular value below `rel_tol`
    /// times the largest.
    pub fn lstsq_min_norm(&self, b: &[T], rel_tol: T) -> Vec<T> {
        let ata = self.transpose().matmul(self);
        let atb = self.transpose().mul_vec(b);
        let (vals, vecs) = ata.symmetric_eigen();
        let top = vals.last().copied().unwrap_or(T::zero()).max(T::zero());
        let n = self.cols;
        let mut x = vec![T::zero(); n];
        for (k, &lam) in vals.iter().enumerate() {
            if lam <= rel_tol * rel_tol * top || lam <= T::zero() {
                continue;
            }
            let mut proj = T::zero();
            for i in 0..n {
                proj += vecs[(i, k)] * atb[i];
            }
            for i in 0..n {
                x[i] += vecs[(i, k)] * proj / lam;
            }
        }
        x
    }
}

/// LU factorization with partial pivoting of a small dense matrix.
#[derive(Clone, Debug)]
pub struct DenseLu<T> {
    lu: Mat<T>,
    perm: Vec<usize>,
}

impl<T: Field> DenseLu<T> {
    pub fn new(a: &Mat<T>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Dimension("LU of a non-square matrix".into()));
        }
        let n = a.rows;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.max_abs();
        let tiny = scale * T::Real::epsilon() * T::Real::lit(1e-3);
        for k in 0..n {
            let mut p = k;
            let mut best = lu[(k, k)].modulus();
            for i in k + 1..n {
                let m = lu[(i, k)].modulus();
                if m > best {
                    best = m;
                    p = i;
                }
            }
            if best <= tiny || best == T::Real::zero() {
                return Err(Error::Singular {
                    row: k,
                    pivot: best.to_f64_lossy(),
                });
            }
            if p != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                for j in k + 1..n {
                    let ukj = lu[(k, j)];
                    lu[(i, j)] -= f * ukj;
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.lu.rows;
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let l = self.lu[(i, j)];
                let xj = x[j];
                x[i] -= l * xj;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let u = self.lu[(i, j)];
                let xj = x[j];
                x[i] -= u * xj;
            }
            x[i] /= self.lu[(i, i)];
        }
        x
    }

    pub fn inverse(&self) -> Mat<T> {
        let n = self.lu.rows;
        let mut inv = Mat::zeros(n, n);
        for j in 0..n {
            let mut e = vec![T::zero(); n];
            e[j] = T::one();
            let col = self.solve(&e);
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        inv
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn det_and_solve_agree() {
        let a = Mat::from_rows(&[vec![2.0, 1.0, 0.0], vec![1.0, 3.0, 1.0], vec![0.0, 1.0, 4.0]])
            .unwrap();
        assert!((a.det() - 18.0_f64).abs() < 1e-12);
        let x = a.lu().unwrap().solve(&[1.0, 2.0, 3.0]);
        let r = a.mul_vec(&x);
        for (ri, bi) in r.iter().zip([1.0, 2.0, 3.0]) {
            assert!((ri - bi).abs() < 1e-12);
        }
    }

    #[test]
    fn complex_det() {
        let a = Mat::from_rows(&[
            vec![Complex::new(0.0, 1.0), Complex::new(1.0, 0.0)],
            vec![Complex::new(2.0, 0.0), Complex::new(0.0, -1.0)],
        ])
        .unwrap();
        // i*(-i) - 2 = -1
        let d = a.det();
        assert!((d - Complex::new(-1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn jacobi_eigen_and_norm() {
        let a = Mat::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let (vals, _) = a.symmetric_eigen();
        assert!((vals[0] - 1.0_f64).abs() < 1e-12 && (vals[1] - 3.0).abs() < 1e-12);
        let b = Mat::from_rows(&[vec![0.0, 2.0], vec![0.0, 0.0]]).unwrap();
        assert!((b.norm2() - 2.0_f64).abs() < 1e-12);
    }

    #[test]
    fn singular_lu_is_reported() {
        let a = Mat::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(matches!(a.lu(), Err(Error::Singular { .. })));
    }

    #[test]
    fn f32_works() {
        let a: Mat<f32> = Mat::from_rows(&[vec![4.0, 1.0], vec![1.0, 3.0]]).unwrap();
        assert!((a.det() - 11.0).abs() < 1e-5);
    }
}

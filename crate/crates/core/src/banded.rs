//! Banded matrices with partial-pivoting LU.
//!
//! Storage keeps `kl` extra super-diagonals per row for pivoting fill-in,
//! the layout LAPACK's `gbtrf` uses, but row-major.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::{Field, Real};

#[derive(Clone, Debug)]
pub struct Banded<T> {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<T>,
}

impl<T: Field> Banded<T> {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            width,
            data: vec![T::zero(); n * width],
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn kl(&self) -> usize {
        self.kl
    }

    #[inline]
    pub fn ku(&self) -> usize {
        self.ku
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        if j + self.kl < i || j > i + self.ku {
            return None;
        }
        Some(i * self.width + (j + self.kl - i))
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.slot(i, j).map_or(T::zero(), |s| self.data[s])
    }

    /// Panics if `(i, j)` lies outside the band.
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        let s = self
            .slot(i, j)
            .unwrap_or_else(|| panic!("entry ({i}, {j}) outside band kl={} ku={}", self.kl, self.ku));
        self.data[s] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: T) {
        let s = self
            .slot(i, j)
            .unwrap_or_else(|| panic!("entry ({i}, {j}) outside band kl={} ku={}", self.kl, self.ku));
        self.data[s] += v;
    }

    /// Zeroes row `i`.
    pub fn clear_row(&mut self, i: usize) {
        let lo = i.saturating_sub(self.kl);
        let hi = (i + self.ku).min(self.n - 1);
        for j in lo..=hi {
            self.set(i, j, T::zero());
        }
    }

    /// Adds `s` to every diagonal entry.
    pub fn shift_diagonal(&mut self, s: T) {
        for i in 0..self.n {
            self.add(i, i, s);
        }
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                let row = &self.data[i * self.width + (lo + self.kl - i)..=i * self.width + (hi + self.kl - i)];
                row.iter().zip(&x[lo..=hi]).fold(T::zero(), |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }

    pub fn map<U: Field>(&self, f: impl Fn(T) -> U) -> Banded<U> {
        Banded {
            n: self.n,
            kl: self.kl,
            ku: self.ku,
            width: self.width,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn factor(&self) -> Result<BandedLu<T>> {
        BandedLu::new(self.clone())
    }

    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        Ok(self.factor()?.solve(b))
    }
}

#[derive(Clone, Debug)]
pub struct BandedLu<T> {
    a: Banded<T>,
    piv: Vec<usize>,
    min_pivot: f64,
    max_pivot: f64,
}

impl<T: Field> BandedLu<T> {
    fn new(mut a: Banded<T>) -> Result<Self> {
        let n = a.n;
        let kl = a.kl;
        let reach = a.ku + a.kl;
        let mut piv = vec![0; n];
        let mut min_pivot = f64::INFINITY;
        let mut max_pivot = 0.0_f64;
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = a.data[k * a.width + kl].modulus();
            for i in k + 1..=last {
                let m = a.data[i * a.width + (k + kl - i)].modulus();
                if m > best {
                    best = m;
                    p = i;
                }
            }
            piv[k] = p;
            let bf = best.to_f64_lossy();
            min_pivot = min_pivot.min(bf);
            max_pivot = max_pivot.max(bf);
            if best == T::Real::zero() || !bf.is_finite() {
                return Err(Error::Singular { row: k, pivot: bf });
            }
            let jmax = (k + reach).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    let sk = k * a.width + (j + kl - k);
                    let sp = p * a.width + (j + kl - p);
                    a.data.swap(sk, sp);
                }
            }
            let pivot = a.data[k * a.width + kl];
            for i in k + 1..=last {
                let si = i * a.width + (k + kl - i);
                let f = a.data[si] / pivot;
                a.data[si] = f;
                if f == T::zero() {
                    continue;
                }
                for j in k + 1..=jmax {
                    let ukj = a.data[k * a.width + (j + kl - k)];
                    a.data[i * a.width + (j + kl - i)] -= f * ukj;
                }
            }
        }
        Ok(Self {
            a,
            piv,
            min_pivot,
            max_pivot,
        })
    }

    /// Ratio of the smallest to largest pivot modulus; a cheap conditioning
    /// indicator.
    pub fn pivot_ratio(&self) -> f64 {
        if self.max_pivot == 0.0 {
            0.0
        } else {
            self.min_pivot / self.max_pivot
        }
    }

    pub fn n(&self) -> usize {
        self.a.n
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let a = &self.a;
        let n = a.n;
        let kl = a.kl;
        let reach = a.ku + a.kl;
        assert_eq!(b.len(), n);
        let mut x = b.to_vec();
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                x.swap(k, p);
            }
            let xk = x[k];
            for i in k + 1..=(k + kl).min(n - 1) {
                let l = a.data[i * a.width + (k + kl - i)];
                x[i] -= l * xk;
            }
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in i + 1..=(i + reach).min(n - 1) {
                acc -= a.data[i * a.width + (j + kl - i)] * x[j];
            }
            x[i] = acc / a.data[i * a.width + kl];
        }
        x
    }

    /// Solves `Aᵀ x = b` (plain transpose, no conjugation).
    pub fn solve_transpose(&self, b: &[T]) -> Vec<T> {
        let a = &self.a;
        let n = a.n;
        let kl = a.kl;
        let reach = a.ku + a.kl;
        assert_eq!(b.len(), n);
        let mut z = b.to_vec();
        for i in 0..n {
            let mut acc = z[i];
            for j in i.saturating_sub(reach)..i {
                acc -= a.data[j * a.width + (i + kl - j)] * z[j];
            }
            z[i] = acc / a.data[i * a.width + kl];
        }
        for k in (0..n).rev() {
            let mut acc = z[k];
            for i in k + 1..=(k + kl).min(n - 1) {
                acc -= a.data[i * a.width + (k + kl - i)] * z[i];
            }
            z[k] = acc;
            let p = self.piv[k];
            if p != k {
                z.swap(k, p);
            }
        }
        z
    }
}

/// Solves the bordered system
///
/// ```text
/// [ A   c ] [x]   [f]
/// [ rᵀ  d ] [s] = [g]
/// ```
///
/// with `A` banded, by block elimination.
pub fn solve_bordered<T: Field>(
    lu: &BandedLu<T>,
    col: &[T],
    row: &[T],
    corner: T,
    f: &[T],
    g: T,
) -> Result<(Vec<T>, T)> {
    let y = lu.solve(f);
    let z = lu.solve(col);
    let mut ry = T::zero();
    let mut rz = T::zero();
    for i in 0..y.len() {
        ry += row[i] * y[i];
        rz += row[i] * z[i];
    }
    let schur = corner - rz;
    if schur.modulus() == T::Real::zero() {
        return Err(Error::Singular {
            row: y.len(),
            pivot: 0.0,
        });
    }
    let s = (g - ry) / schur;
    let x = y.iter().zip(&z).map(|(&yi, &zi)| yi - zi * s).collect();
    Ok((x, s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex;

    fn sample(n: usize, kl: usize, ku: usize) -> Banded<f64> {
        let mut a = Banded::zeros(n, kl, ku);
        for i in 0..n {
            for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                // weak diagonal so that pivoting actually happens
                let v = ((i * 7 + j * 13) % 11) as f64 - 5.0 + if i == j { 0.3 } else { 0.0 };
                a.set(i, j, v);
            }
        }
        a
    }

    fn dense_mul(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
        a.iter().map(|r| r.iter().zip(x).map(|(p, q)| p * q).sum()).collect()
    }

    #[test]
    fn solve_and_transpose_solve() {
        for &(n, kl, ku) in &[(12, 2, 3), (30, 1, 1), (9, 4, 2)] {
            let a = sample(n, kl, ku);
            let lu = a.factor().unwrap();
            let b: Vec<f64> = (0..n).map(|i| (i as f64).sin() + 1.0).collect();
            let x = lu.solve(&b);
            let r = a.matvec(&x);
            for (ri, bi) in r.iter().zip(&b) {
                assert!((ri - bi).abs() < 1e-9, "{ri} vs {bi}");
            }
            let xt = lu.solve_transpose(&b);
            let dense = a.to_dense();
            let at: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| dense[j][i]).collect()).collect();
            let rt = dense_mul(&at, &xt);
            for (ri, bi) in rt.iter().zip(&b) {
                assert!((ri - bi).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn complex_tridiagonal() {
        let n = 50;
        let mut a = Banded::<Complex<f64>>::zeros(n, 1, 1);
        for i in 0..n {
            a.set(i, i, Complex::new(-2.0, 0.5));
            if i > 0 {
                a.set(i, i - 1, Complex::new(1.0, 0.0));
            }
            if i + 1 < n {
                a.set(i, i + 1, Complex::new(1.0, 0.0));
            }
        }
        let b: Vec<_> = (0..n).map(|i| Complex::new(1.0, i as f64 * 0.1)).collect();
        let x = a.solve(&b).unwrap();
        let r = a.matvec(&x);
        for (ri, bi) in r.iter().zip(&b) {
            assert!((ri - bi).norm() < 1e-10);
        }
    }

    #[test]
    fn bordered_matches_dense() {
        let n = 10;
        let a = sample(n, 1, 2);
        let lu = a.factor().unwrap();
        let col: Vec<f64> = (0..n).map(|i| 1.0 / (i as f64 + 1.0)).collect();
        let row: Vec<f64> = (0..n).map(|i| (i as f64).cos()).collect();
        let f: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let (x, s) = solve_bordered(&lu, &col, &row, 2.0, &f, 1.0).unwrap();
        let ax = a.matvec(&x);
        for i in 0..n {
            assert!((ax[i] + col[i] * s - f[i]).abs() < 1e-9);
        }
        let g: f64 = row.iter().zip(&x).map(|(r, x)| r * x).sum::<f64>() + 2.0 * s;
        assert!((g - 1.0).abs() < 1e-9);
    }

    #[test]
    fn singular_detected() {
        let a = Banded::<f64>::zeros(4, 1, 1);
        assert!(a.factor().is_err());
    }
}

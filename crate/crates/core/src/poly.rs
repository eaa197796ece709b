//! Univariate and bivariate polynomials.

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::scalar::Real;

/// Polynomial in one complex variable, ascending coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly<T> {
    pub coeffs: Vec<Complex<T>>,
}

impl<T: Real> Poly<T> {
    pub fn new(coeffs: Vec<Complex<T>>) -> Self {
        Self { coeffs }
    }

    /// Degree after trimming negligible leading coefficients.
    pub fn degree(&self) -> usize {
        self.trimmed().len().saturating_sub(1)
    }

    fn trimmed(&self) -> &[Complex<T>] {
        let scale = self
            .coeffs
            .iter()
            .fold(T::zero(), |m, c| m.max(c.norm()));
        let tol = scale * T::epsilon() * T::lit(16.0);
        let mut len = self.coeffs.len();
        while len > 0 && self.coeffs[len - 1].norm() <= tol {
            len -= 1;
        }
        &self.coeffs[..len]
    }

    pub fn eval(&self, z: Complex<T>) -> Complex<T> {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex::zero(), |acc, &c| acc * z + c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * T::from_usize_lossy(k))
                .collect(),
        )
    }

    /// All roots by Aberth–Ehrlich iteration, polished with Newton.
    pub fn roots(&self) -> Result<Vec<Complex<T>>> {
        let c = self.trimmed();
        if c.len() <= 1 {
            return Ok(Vec::new());
        }
        let deg = c.len() - 1;
        let lead = c[deg];
        let monic: Vec<Complex<T>> = c.iter().map(|&x| x / lead).collect();
        let p = Poly::new(monic);
        if deg == 1 {
            return Ok(vec![-p.coeffs[0]]);
        }
        if deg == 2 {
            let b = p.coeffs[1];
            let cc = p.coeffs[0];
            let disc = (b * b - cc * T::lit(4.0)).sqrt();
            // stable quadratic formula
            let sgn = if (b.conj() * disc).re >= T::zero() { T::one() } else { -T::one() };
            let q = -(b + disc * sgn) * T::lit(0.5);
            if q.norm() == T::zero() {
                return Ok(vec![Complex::zero(), Complex::zero()]);
            }
            return Ok(vec![q, cc / q]);
        }
        let dp = p.derivative();
        // Cauchy bound for the initial circle
        let radius = T::one()
            + p.coeffs[..deg]
                .iter()
                .fold(T::zero(), |m, x| m.max(x.norm()));
        let r0 = radius.min(T::lit(1e6)) * T::lit(0.5);
        let mut z: Vec<Complex<T>> = (0..deg)
            .map(|k| {
                let th = T::lit(2.0) * T::PI() * T::from_usize_lossy(k) / T::from_usize_lossy(deg)
                    + T::lit(0.4);
                Complex::from_polar(r0, th)
            })
            .collect();
        let tol = T::epsilon() * T::lit(4.0);
        let mut converged = false;
        for _ in 0..500 {
            let mut max_step = T::zero();
            for i in 0..deg {
                let pv = p.eval(z[i]);
                let dv = dp.eval(z[i]);
                if pv.norm() == T::zero() {
                    continue;
                }
                let ratio = pv / dv;
                let mut s: Complex<T> = Complex::zero();
                for j in 0..deg {
                    if j != i {
                        let d = z[i] - z[j];
                        if d.norm() > T::zero() {
                            s += Complex::<T>::one() / d;
                        }
                    }
                }
                let w: Complex<T> = ratio / (Complex::<T>::one() - ratio * s);
                if w.re.is_finite() && w.im.is_finite() {
                    z[i] -= w;
                    max_step = max_step.max(w.norm() / (T::one() + z[i].norm()));
                }
            }
            if max_step < tol {
                converged = true;
                break;
            }
        }
        if !converged {
            // Aberth stalls only on clustered roots; Newton polish below
            // still certifies the residual.
            let worst = z.iter().fold(T::zero(), |m, &r| m.max(p.eval(r).norm()));
            if worst.to_f64_lossy() > 1e-6 {
                return Err(Error::NoConvergence {
                    what: "polynomial roots",
                    iterations: 500,
                    residual: worst.to_f64_lossy(),
                });
            }
        }
        for r in z.iter_mut() {
            for _ in 0..3 {
                let dv = dp.eval(*r);
                if dv.norm() == T::zero() {
                    break;
                }
                let step = p.eval(*r) / dv;
                if !(step.re.is_finite() && step.im.is_finite()) {
                    break;
                }
                let cand = *r - step;
                if p.eval(cand).norm() <= p.eval(*r).norm() {
                    *r = cand;
                } else {
                    break;
                }
            }
        }
        Ok(z)
    }
}

/// Polynomial in two variables `(λ, ν)` with real coefficients;
/// `c[i][j]` multiplies `λ^i ν^j`.
#[derive(Clone, Debug, PartialEq)]
pub struct BiPoly<T> {
    c: Vec<Vec<T>>,
}

impl<T: Real> BiPoly<T> {
    pub fn zero() -> Self {
        Self { c: vec![vec![T::zero()]] }
    }

    pub fn constant(v: T) -> Self {
        Self { c: vec![vec![v]] }
    }

    /// `a0 + a1 ν + a2 ν² + l λ`.
    pub fn entry(nu_coeffs: [T; 3], lambda_coeff: T) -> Self {
        Self {
            c: vec![nu_coeffs.to_vec(), vec![lambda_coeff, T::zero(), T::zero()]],
        }
    }

    pub fn coeffs(&self) -> &[Vec<T>] {
        &self.c
    }

    pub fn deg_lambda(&self) -> usize {
        self.c.len() - 1
    }

    pub fn deg_nu(&self) -> usize {
        self.c.iter().map(Vec::len).max().unwrap_or(1) - 1
    }

    pub fn scale_abs(&self) -> T {
        self.c
            .iter()
            .flatten()
            .fold(T::zero(), |m, &x| m.max(x.abs()))
    }

    pub fn add(&self, o: &Self) -> Self {
        let rows = self.c.len().max(o.c.len());
        let cols = self.deg_nu().max(o.deg_nu()) + 1;
        let mut c = vec![vec![T::zero(); cols]; rows];
        for (i, r) in self.c.iter().enumerate() {
            for (j, &v) in r.iter().enumerate() {
                c[i][j] += v;
            }
        }
        for (i, r) in o.c.iter().enumerate() {
            for (j, &v) in r.iter().enumerate() {
                c[i][j] += v;
            }
        }
        Self { c }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let rows = self.c.len() + o.c.len() - 1;
        let cols = self.deg_nu() + o.deg_nu() + 1;
        let mut c = vec![vec![T::zero(); cols]; rows];
        for (i, r) in self.c.iter().enumerate() {
            for (j, &a) in r.iter().enumerate() {
                if a == T::zero() {
                    continue;
                }
                for (k, s) in o.c.iter().enumerate() {
                    for (l, &b) in s.iter().enumerate() {
                        c[i + k][j + l] += a * b;
                    }
                }
            }
        }
        Self { c }
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            c: self.c.iter().map(|r| r.iter().map(|&x| x * s).collect()).collect(),
        }
    }

    pub fn d_lambda(&self) -> Self {
        if self.c.len() <= 1 {
            return Self::zero();
        }
        Self {
            c: self.c[1..]
                .iter()
                .enumerate()
                .map(|(i, r)| r.iter().map(|&x| x * T::from_usize_lossy(i + 1)).collect())
                .collect(),
        }
    }

    pub fn d_nu(&self) -> Self {
        Self {
            c: self
                .c
                .iter()
                .map(|r| {
                    if r.len() <= 1 {
                        vec![T::zero()]
                    } else {
                        r[1..]
                            .iter()
                            .enumerate()
                            .map(|(j, &x)| x * T::from_usize_lossy(j + 1))
                            .collect()
                    }
                })
                .collect(),
        }
    }

    pub fn eval(&self, lambda: Complex<T>, nu: Complex<T>) -> Complex<T> {
        let mut acc = Complex::zero();
        for r in self.c.iter().rev() {
            let inner = r.iter().rev().fold(Complex::zero(), |a, &x| a * nu + x);
            acc = acc * lambda + inner;
        }
        acc
    }

    /// Coefficients in λ for fixed ν.
    pub fn in_lambda(&self, nu: Complex<T>) -> Poly<T> {
        Poly::new(
            self.c
                .iter()
                .map(|r| r.iter().rev().fold(Complex::zero(), |a, &x| a * nu + x))
                .collect(),
        )
    }

    /// Coefficients in ν for fixed λ.
    pub fn in_nu(&self, lambda: Complex<T>) -> Poly<T> {
        let cols = self.deg_nu() + 1;
        let mut out = vec![Complex::zero(); cols];
        let mut pow = Complex::one();
        for r in &self.c {
            for (j, &x) in r.iter().enumerate() {
                out[j] += pow * x;
            }
            pow *= lambda;
        }
        Poly::new(out)
    }

    /// Determinant of a square matrix of bivariate polynomials, by
    /// cofactor expansion along the first row.
    pub fn det(m: &[Vec<BiPoly<T>>]) -> Self {
        let n = m.len();
        match n {
            0 => Self::constant(T::one()),
            1 => m[0][0].clone(),
            _ => {
                let mut acc = Self::zero();
                for j in 0..n {
                    let minor: Vec<Vec<BiPoly<T>>> = m[1..]
                        .iter()
                        .map(|row| {
                            row.iter()
                                .enumerate()
                                .filter(|&(k, _)| k != j)
                                .map(|(_, p)| p.clone())
                                .collect()
                        })
                        .collect();
                    let term = m[0][j].mul(&Self::det(&minor));
                    acc = if j % 2 == 0 {
                        acc.add(&term)
                    } else {
                        acc.add(&term.scale(-T::one()))
                    };
                }
                acc
            }
        }
    }
}

/// Characteristic polynomial coefficients of `det(A - λ I)` (ascending),
/// via Faddeev–LeVerrier.
pub fn char_poly<T: Real>(a: &Mat<T>) -> Vec<T> {
    let n = a.rows();
    // c_n = 1 for det(λI - A)
    let mut coeffs = vec![T::zero(); n + 1];
    coeffs[n] = T::one();
    let mut m = Mat::zeros(n, n);
    for k in 1..=n {
        let prev = coeffs[n - k + 1];
        m = a.matmul(&m).add(&Mat::identity(n).scale(prev));
        let am = a.matmul(&m);
        let mut tr = T::zero();
        for i in 0..n {
            tr += am[(i, i)];
        }
        coeffs[n - k] = -tr / T::from_usize_lossy(k);
    }
    // det(A - λI) = (-1)^n det(λI - A)
    if n % 2 == 1 {
        coeffs.iter_mut().for_each(|c| *c = -*c);
    }
    coeffs
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn quintic_roots() {
        // (z-1)(z+2)(z-3i)(z+3i)(z-0.5)
        let roots = [c(1.0, 0.0), c(-2.0, 0.0), c(0.0, 3.0), c(0.0, -3.0), c(0.5, 0.0)];
        let mut coeffs = vec![c(1.0, 0.0)];
        for r in roots {
            let mut next = vec![c(0.0, 0.0); coeffs.len() + 1];
            for (k, &a) in coeffs.iter().enumerate() {
                next[k + 1] += a;
                next[k] -= a * r;
            }
            coeffs = next;
        }
        let found = Poly::new(coeffs).roots().unwrap();
        for r in roots {
            assert!(found.iter().any(|f| (f - r).norm() < 1e-10), "missing {r}");
        }
    }

    #[test]
    fn double_root_quadratic() {
        let p = Poly::new(vec![c(1.0, 0.0), c(2.0, 0.0), c(1.0, 0.0)]);
        let r = p.roots().unwrap();
        assert!(r.iter().all(|z| (z + 1.0).norm() < 1e-7));
    }

    #[test]
    fn bipoly_det_matches_direct() {
        // [[ν² + 2ν + 1 - λ, 1], [0.5 ν, -2 - λ]]
        let a = BiPoly::entry([1.0, 2.0, 1.0], -1.0);
        let b = BiPoly::constant(1.0);
        let cc = BiPoly::entry([0.0, 0.5, 0.0], 0.0);
        let d = BiPoly::entry([-2.0, 0.0, 0.0], -1.0);
        let det = BiPoly::det(&[vec![a, b], vec![cc, d]]);
        let (l, n) = (c(0.3, -0.2), c(-1.1, 0.7));
        let direct = (n * n + n * 2.0 + 1.0 - l) * (-l - 2.0) - n * 0.5;
        assert!((det.eval(l, n) - direct).norm() < 1e-12);
        let dn = det.d_nu().eval(l, n);
        let h = 1e-6;
        let fd = (det.eval(l, n + h) - det.eval(l, n - h)) / (2.0 * h);
        assert!((dn - fd).norm() < 1e-6);
    }

    #[test]
    fn faddeev_leverrier() {
        let a = Mat::from_rows(&[vec![2.0, 1.0], vec![0.0, 3.0]]).unwrap();
        // det(A - λ) = (2-λ)(3-λ) = 6 - 5λ + λ²
        let p: Vec<f64> = char_poly(&a);
        assert_eq!(p.len(), 3);
        assert!((p[0] - 6.0).abs() < 1e-12 && (p[1] + 5.0).abs() < 1e-12 && (p[2] - 1.0).abs() < 1e-12);
        let b = Mat::from_rows(&[vec![-1.0]]).unwrap();
        let q: Vec<f64> = char_poly(&b);
        // det(-1 - λ) = -1 - λ
        assert!((q[0] + 1.0).abs() < 1e-12 && (q[1] + 1.0).abs() < 1e-12);
    }
}

//! Linear dispersion relations `d_c(λ, ν) = det(Dν² + cνM + A₀ − λI)`,
//! pinched double roots, linear spreading speeds and essential-spectrum
//! diagnostics.

mod hyp;
mod pinch;
mod roots;
mod speed;
mod turing;

pub use hyp::{left_spectrum, verify_hyp1, verify_hyp1_root, Hyp1Report, SpectrumCurve};
pub use pinch::{check_pinching, PinchStatus, PinchStep, PinchingCertificate};
pub use roots::{find_double_roots, newton_double_root, DoubleRoot, DoubleRootSearch, Region};
pub use speed::{linear_spreading_speed, relevant_double_root, SpreadingSpeed};
pub use turing::{check_no_turing, symbol_norm_bounds, SymbolBounds, TuringReport};

use num_complex::Complex;

use crate::linalg::Mat;
use crate::model::RdSystem;
use crate::poly::BiPoly;
use crate::scalar::Real;

/// `d(λ, ν)` as an exact bivariate polynomial together with its partial
/// derivatives.
#[derive(Clone, Debug)]
pub struct DispersionRelation<T> {
    d: Mat<T>,
    mass: Mat<T>,
    a0: Mat<T>,
    c: T,
    poly: BiPoly<T>,
    d_l: BiPoly<T>,
    d_n: BiPoly<T>,
    d_ln: BiPoly<T>,
    d_nn: BiPoly<T>,
    scale: T,
}

impl<T: Real> DispersionRelation<T> {
    pub fn new(d: Mat<T>, mass: Mat<T>, a0: Mat<T>, c: T) -> Self {
        let n = d.rows();
        assert!(d.is_square() && mass.rows() == n && a0.rows() == n && a0.cols() == n);
        let entries: Vec<Vec<BiPoly<T>>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let l = if i == j { -T::one() } else { T::zero() };
                        BiPoly::entry([a0[(i, j)], c * mass[(i, j)], d[(i, j)]], l)
                    })
                    .collect()
            })
            .collect();
        let poly = BiPoly::det(&entries);
        let d_l = poly.d_lambda();
        let d_n = poly.d_nu();
        let d_ln = d_n.d_lambda();
        let d_nn = d_n.d_nu();
        let scale = poly.scale_abs().max(T::one());
        Self { d, mass, a0, c, poly, d_l, d_n, d_ln, d_nn, scale }
    }

    /// Scalar relation `dν² + cν + a − λ`.
    pub fn scalar(d: T, a: T, c: T) -> Self {
        Self::new(Mat::diag(&[d]), Mat::diag(&[T::one()]), Mat::diag(&[a]), c)
    }

    /// Linearization of `system` about the homogeneous state `u_ref` in a
    /// frame moving with speed `c`.
    pub fn from_system(system: &RdSystem<T>, u_ref: &[T], c: T) -> Self {
        Self::new(
            system.diffusion().clone(),
            system.mass_matrix(),
            system.jacobian(u_ref),
            c,
        )
    }

    /// Relation of the evolution operator `M⁻¹L` about `u_ref`, whose roots
    /// are the spectrum seen by `M u_t = L u`. Algebraic components
    /// (`M_kk = 0`) are eliminated by a Schur complement first; their rows
    /// must carry no diffusion or coupling through `D`.
    pub fn evolution(system: &RdSystem<T>, u_ref: &[T], c: T) -> crate::Result<Self> {
        let n = system.n();
        let (dynamic, algebraic): (Vec<usize>, Vec<usize>) = (0..n).partition(|&k| !system.is_algebraic(k));
        let d = system.diffusion();
        let a = system.jacobian(u_ref);
        if algebraic.iter().any(|&i| (0..n).any(|j| d[(i, j)] != T::zero() || d[(j, i)] != T::zero())) {
            return Err(crate::Error::Unsupported("algebraic component with diffusion".into()));
        }
        let pick = |m: &Mat<T>, r: &[usize], c: &[usize]| Mat::from_fn(r.len(), c.len(), |i, j| m[(r[i], c[j])]);
        let mut a_red = pick(&a, &dynamic, &dynamic);
        if !algebraic.is_empty() {
            let inv = pick(&a, &algebraic, &algebraic).lu()?.inverse();
            let corr = pick(&a, &dynamic, &algebraic).matmul(&inv).matmul(&pick(&a, &algebraic, &dynamic));
            a_red = a_red.sub(&corr);
        }
        let m = system.mass();
        let scale = |x: Mat<T>| Mat::from_fn(x.rows(), x.cols(), |i, j| x[(i, j)] / m[dynamic[i]]);
        let k = dynamic.len();
        Ok(Self::new(scale(pick(d, &dynamic, &dynamic)), Mat::identity(k), scale(a_red), c))
    }

    /// Same matrices at another speed.
    pub fn with_speed(&self, c: T) -> Self {
        Self::new(self.d.clone(), self.mass.clone(), self.a0.clone(), c)
    }

    pub fn n(&self) -> usize {
        self.d.rows()
    }

    pub fn speed(&self) -> T {
        self.c
    }

    pub fn diffusion(&self) -> &Mat<T> {
        &self.d
    }

    pub fn mass(&self) -> &Mat<T> {
        &self.mass
    }

    pub fn a0(&self) -> &Mat<T> {
        &self.a0
    }

    pub fn poly(&self) -> &BiPoly<T> {
        &self.poly
    }

    /// Largest coefficient modulus (at least 1).
    pub fn scale(&self) -> T {
        self.scale
    }

    pub fn eval(&self, lambda: Complex<T>, nu: Complex<T>) -> Complex<T> {
        self.poly.eval(lambda, nu)
    }

    pub fn d_lambda(&self, lambda: Complex<T>, nu: Complex<T>) -> Complex<T> {
        self.d_l.eval(lambda, nu)
    }

    pub fn d_nu(&self, lambda: Complex<T>, nu: Complex<T>) -> Complex<T> {
        self.d_n.eval(lambda, nu)
    }

    pub fn d_lambda_nu(&self, lambda: Complex<T>, nu: Complex<T>) -> Complex<T> {
        self.d_ln.eval(lambda, nu)
    }

    pub fn d_nu_nu(&self, lambda: Complex<T>, nu: Complex<T>) -> Complex<T> {
        self.d_nn.eval(lambda, nu)
    }

    /// The matrix `Dν² + cνM + A₀` (without `λ`).
    pub fn symbol(&self, nu: Complex<T>) -> Mat<Complex<T>> {
        let n = self.n();
        Mat::from_fn(n, n, |i, j| {
            nu * nu * self.d[(i, j)] + nu * (self.c * self.mass[(i, j)]) + self.a0[(i, j)]
        })
    }

    /// Determinant evaluated directly from the matrix, independent of the
    /// polynomial expansion.
    pub fn eval_direct(&self, lambda: Complex<T>, nu: Complex<T>) -> Complex<T> {
        let mut m = self.symbol(nu);
        for i in 0..self.n() {
            m[(i, i)] -= lambda;
        }
        m.det()
    }

    /// Roots `λ` of `d(·, ν)`.
    pub fn lambda_roots(&self, nu: Complex<T>) -> crate::Result<Vec<Complex<T>>> {
        self.poly.in_lambda(nu).roots()
    }

    /// Roots `ν` of `d(λ, ·)`.
    pub fn nu_roots(&self, lambda: Complex<T>) -> crate::Result<Vec<Complex<T>>> {
        self.poly.in_nu(lambda).roots()
    }
}

/// `det(Dν² + cνM + A₀ − λI)`.
pub fn eval_dispersion<T: Real>(rel: &DispersionRelation<T>, lambda: Complex<T>, nu: Complex<T>) -> Complex<T> {
    rel.eval(lambda, nu)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn kpp_expansion() {
        let rel = DispersionRelation::scalar(1.0, 1.0, 2.0);
        assert!(rel.eval(c(0.0, 0.0), c(-1.0, 0.0)).norm() < 1e-15);
        for (l, nt) in [(c(0.3, 0.1), c(0.2, -0.7)), (c(-1.0, 2.0), c(1.5, 0.0))] {
            let expect = nt * nt - l;
            assert!((rel.eval(l, nt - 1.0) - expect).norm() < 1e-13);
        }
    }

    #[test]
    fn polynomial_matches_direct_determinant() {
        let d = Mat::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 0.02, 0.01], vec![0.0, 0.0, 0.05]]).unwrap();
        let m = Mat::diag(&[1.0, 0.01, 0.01]);
        let a = Mat::from_rows(&[vec![1.0, 0.5, -0.2], vec![0.1, -1.0, 0.3], vec![0.0, 0.2, -2.0]]).unwrap();
        let rel = DispersionRelation::new(d, m, a, 1.7);
        for k in 0..20 {
            let l = c((k as f64 * 0.37).sin() * 3.0, (k as f64 * 0.91).cos() * 2.0);
            let nu = c((k as f64 * 1.3).cos() * 2.0, (k as f64 * 0.5).sin());
            let p = rel.eval(l, nu);
            let q = rel.eval_direct(l, nu);
            assert!((p - q).norm() <= 1e-10 * q.norm().max(1.0));
        }
    }

    #[test]
    fn transcritical_factorization() {
        // δ = 0.3, D_v = 2, K = 1, linear V coupling −0.1δ²
        let d2 = 0.09;
        let d = Mat::diag(&[1.0, 2.0 * d2]);
        let m = Mat::diag(&[1.0, d2]);
        let a = Mat::diag(&[1.0, -1.0 - 0.1 * d2]);
        let rel = DispersionRelation::new(d, m, a, 2.0);
        let l = c(0.2, 0.4);
        let nu = c(-0.7, 0.3);
        let f1 = nu * nu + nu * 2.0 + 1.0 - l;
        let f2 = nu * nu * (2.0 * d2) + nu * (2.0 * d2) - 1.0 - 0.1 * d2 - l;
        assert!((rel.eval(l, nu) - f1 * f2).norm() < 1e-13);
    }
}

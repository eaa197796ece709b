//! Far-field data at the invaded state: the double root of the continuous
//! dispersion relation at `λ = 0`, its counterpart for the central
//! difference operator on a grid of spacing `h`, and the Jordan chain
//! `(u⁰, u¹)` spanning the tails `e^{νx}((x + a)u⁰ + u¹)`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::dispersion::linear_spreading_speed;
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::model::RdSystem;
use crate::poly::BiPoly;
use crate::scalar::Real;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TailData<T> {
    /// Speed and exponent of the marginal double root (`λ = 0`).
    pub c: T,
    pub nu: T,
    /// Kernel vector of `Dν² + cνM + f'(0)`, first component 1.
    pub u0: Vec<T>,
    /// Minimal-norm solution of `(Dν² + cνM + f'(0))u¹ = −(2Dν + cM)u⁰`.
    pub u1: Vec<T>,
    /// Grid spacing for the discrete version, `None` for the continuum.
    pub h: Option<T>,
}

/// Second and first central difference symbols `(Δ, δ₁)` and their first
/// two derivatives in `ν`.
fn symbols<T: Real>(nu: T, h: Option<T>) -> [(T, T, T); 2] {
    match h {
        None => [
            (nu * nu, T::lit(2.0) * nu, T::lit(2.0)),
            (nu, T::one(), T::zero()),
        ],
        Some(h) => {
            let (s, c) = ((nu * h).sinh(), (nu * h).cosh());
            let two = T::lit(2.0);
            [
                ((two * c - two) / (h * h), two * s / h, two * c),
                (s / h, c, h * s),
            ]
        }
    }
}

struct Symbol<T> {
    d: Mat<T>,
    m: Mat<T>,
    a0: Mat<T>,
    h: Option<T>,
}

impl<T: Real> Symbol<T> {
    fn matrix(&self, nu: T, c: T, order: usize) -> Mat<T> {
        let [x, y] = symbols(nu, self.h);
        let pick = |s: (T, T, T)| match order {
            0 => s.0,
            1 => s.1,
            _ => s.2,
        };
        let mut out = self.d.scale(pick(x)).add(&self.m.scale(c * pick(y)));
        if order == 0 {
            out = out.add(&self.a0);
        }
        out
    }

    /// `(g, g')` where `g(ν) = det S(ν)`; exact through the polynomial
    /// `P(X, Y) = det(DX + cMY + A₀)`.
    fn g(&self, nu: T, c: T) -> (T, T) {
        let n = self.d.rows();
        let entries: Vec<Vec<BiPoly<T>>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| BiPoly::entry([self.a0[(i, j)], c * self.m[(i, j)], T::zero()], self.d[(i, j)]))
                    .collect()
            })
            .collect();
        let p = BiPoly::det(&entries);
        let [x, y] = symbols(nu, self.h);
        let at = (Complex::new(x.0, T::zero()), Complex::new(y.0, T::zero()));
        let g = p.eval(at.0, at.1).re;
        let gx = p.d_lambda().eval(at.0, at.1).re;
        let gy = p.d_nu().eval(at.0, at.1).re;
        (g, gx * x.1 + gy * y.1)
    }
}

/// Kernel vector with first component 1 (the leading block is scalar).
fn kernel<T: Real>(s: &Mat<T>) -> Result<Vec<T>> {
    let n = s.rows();
    if n == 1 {
        return Ok(vec![T::one()]);
    }
    let minor = Mat::from_fn(n - 1, n - 1, |i, j| s[(i + 1, j + 1)]);
    let rhs: Vec<T> = (1..n).map(|i| -s[(i, 0)]).collect();
    let y = minor.lu()?.solve(&rhs);
    let mut v = vec![T::one()];
    v.extend(y);
    Ok(v)
}

impl<T: Real> TailData<T> {
    fn from_root(sym: &Symbol<T>, nu: T, c: T) -> Result<Self> {
        let s0 = sym.matrix(nu, c, 0);
        let s1 = sym.matrix(nu, c, 1);
        let u0 = kernel(&s0)?;
        let rhs: Vec<T> = s1.mul_vec(&u0).into_iter().map(|x| -x).collect();
        let u1 = s0.lstsq_min_norm(&rhs, T::lit(1e-10));
        Ok(Self { c, nu, u0, u1, h: sym.h })
    }

    /// Continuous double root of the linearization of `system` at `u = 0`.
    pub fn continuous(system: &RdSystem<T>) -> Result<Self> {
        let sp = linear_spreading_speed(system)?;
        let sym = Symbol {
            d: system.diffusion().clone(),
            m: system.mass_matrix(),
            a0: system.jacobian(&vec![T::zero(); system.n()]),
            h: None,
        };
        Self::from_root(&sym, sp.root.nu_star.re, sp.c_star)
    }

    /// Double root of the central difference operator with spacing `h`,
    /// continued from the continuous one.
    pub fn discrete(system: &RdSystem<T>, continuous: &Self, h: T) -> Result<Self> {
        let sym = Symbol {
            d: system.diffusion().clone(),
            m: system.mass_matrix(),
            a0: system.jacobian(&vec![T::zero(); system.n()]),
            h: Some(h),
        };
        let (mut nu, mut c) = (continuous.nu, continuous.c);
        let eps = T::lit(1e-6);
        let scale = T::one() + c.abs() + nu.abs();
        let mut converged = false;
        for _ in 0..60 {
            let (g, gn) = sym.g(nu, c);
            let (gp, gnp) = sym.g(nu + eps, c);
            let (gm, gnm) = sym.g(nu - eps, c);
            let (gcp, gncp) = sym.g(nu, c + eps);
            let (gcm, gncm) = sym.g(nu, c - eps);
            let two_eps = eps * T::lit(2.0);
            let j = [
                [(gp - gm) / two_eps, (gcp - gcm) / two_eps],
                [(gnp - gnm) / two_eps, (gncp - gncm) / two_eps],
            ];
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            if det == T::zero() {
                break;
            }
            let dnu = (j[1][1] * g - j[0][1] * gn) / det;
            let dc = (j[0][0] * gn - j[1][0] * g) / det;
            nu -= dnu;
            c -= dc;
            if dnu.abs().max(dc.abs()) <= T::lit(1e-11) * scale {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NoConvergence {
                what: "discrete double root",
                iterations: 60,
                residual: sym.g(nu, c).0.to_f64_lossy(),
            });
        }
        Self::from_root(&sym, nu, c)
    }

    /// Decay rate of the weight, `η = −ν`.
    pub fn eta(&self) -> T {
        -self.nu
    }

    /// Residuals `(|S u⁰|, |S u¹ + S' u⁰|)` of the Jordan chain.
    pub fn chain_residual(&self, system: &RdSystem<T>) -> (T, T) {
        let sym = Symbol {
            d: system.diffusion().clone(),
            m: system.mass_matrix(),
            a0: system.jacobian(&vec![T::zero(); system.n()]),
            h: self.h,
        };
        let s0 = sym.matrix(self.nu, self.c, 0);
        let s1 = sym.matrix(self.nu, self.c, 1);
        let r0 = s0.mul_vec(&self.u0);
        let a = s0.mul_vec(&self.u1);
        let b = s1.mul_vec(&self.u0);
        let n0 = r0.iter().fold(T::zero(), |m, x| m.max(x.abs()));
        let n1 = a.iter().zip(&b).fold(T::zero(), |m, (x, y)| m.max((*x + *y).abs()));
        (n0, n1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Kinetics, Monomial};

    fn kpp() -> RdSystem<f64> {
        let k = Kinetics::<f64>::new(vec![vec![Monomial::new(1.0, 0, vec![1]), Monomial::new(-1.0, 0, vec![2])]]).unwrap();
        RdSystem::new(Mat::identity(1), k, 0.0).unwrap()
    }

    #[test]
    fn kpp_continuous_and_discrete() {
        let sys = kpp();
        let t = TailData::continuous(&sys).unwrap();
        assert!((t.c - 2.0).abs() < 1e-10 && (t.nu + 1.0).abs() < 1e-8);
        assert_eq!(t.u0, vec![1.0]);
        assert!(t.u1[0].abs() < 1e-12);
        let h = 0.02;
        let d = TailData::discrete(&sys, &t, h).unwrap();
        // (e^{νh} − 2 + e^{−νh})/h² + c sinh(νh)/h + 1 with a double root
        let g = |nu: f64, c: f64| (2.0 * (nu * h).cosh() - 2.0) / (h * h) + c * (nu * h).sinh() / h + 1.0;
        let gp = |nu: f64, c: f64| 2.0 * (nu * h).sinh() / h + c * (nu * h).cosh();
        assert!(g(d.nu, d.c).abs() < 1e-10 && gp(d.nu, d.c).abs() < 1e-9);
        assert!((d.c - 2.0).abs() < 1e-3 && (d.nu + 1.0).abs() < 1e-3);
        let (r0, r1) = d.chain_residual(&sys);
        assert!(r0 < 1e-12 && r1 < 1e-10);
    }
}

//! Reaction–diffusion systems `M u_t = D u_xx + f(u; μ)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::model::kinetics::Kinetics;
use crate::scalar::Real;

/// An `n`-component reaction–diffusion system with a diagonal mass matrix.
///
/// Unscaled systems have unit mass. Rescaled normal forms carry the factor
/// `δ²` in front of the time derivative of the stable block; at `δ = 0`
/// those components become algebraic (zero mass and zero diffusion).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RdSystem<T> {
    d: Mat<T>,
    mass: Vec<T>,
    kinetics: Kinetics<T>,
    mu: T,
}

impl<T: Real> RdSystem<T> {
    /// Unit-mass system; `D` must have positive definite symmetric part.
    pub fn new(d: Mat<T>, kinetics: Kinetics<T>, mu: T) -> Result<Self> {
        let n = kinetics.n();
        Self::with_mass(d, vec![T::one(); n], kinetics, mu)
    }

    pub fn with_mass(d: Mat<T>, mass: Vec<T>, kinetics: Kinetics<T>, mu: T) -> Result<Self> {
        let n = kinetics.n();
        if d.rows() != n || d.cols() != n || mass.len() != n {
            return Err(Error::Dimension(format!(
                "diffusion {}x{}, mass {}, kinetics {n}",
                d.rows(),
                d.cols(),
                mass.len()
            )));
        }
        if mass.iter().any(|&m| m < T::zero() || !m.is_finite()) {
            return Err(Error::InvalidModel("mass entries must be finite and non-negative".into()));
        }
        let dynamic: Vec<usize> = (0..n).filter(|&i| mass[i] > T::zero()).collect();
        for i in 0..n {
            if mass[i] == T::zero() && (0..n).any(|j| d[(i, j)] != T::zero()) {
                return Err(Error::InvalidModel(format!(
                    "component {i} is algebraic but has diffusion"
                )));
            }
        }
        let sub = Mat::from_fn(dynamic.len(), dynamic.len(), |a, b| d[(dynamic[a], dynamic[b])]);
        if !dynamic.is_empty() && !sub.sym_positive_definite() {
            return Err(Error::InvalidModel(
                "diffusion matrix must have positive definite symmetric part".into(),
            ));
        }
        Ok(Self { d, mass, kinetics, mu })
    }

    pub fn n(&self) -> usize {
        self.kinetics.n()
    }

    pub fn diffusion(&self) -> &Mat<T> {
        &self.d
    }

    pub fn mass(&self) -> &[T] {
        &self.mass
    }

    pub fn mass_matrix(&self) -> Mat<T> {
        Mat::diag(&self.mass)
    }

    pub fn kinetics(&self) -> &Kinetics<T> {
        &self.kinetics
    }

    pub fn mu(&self) -> T {
        self.mu
    }

    pub fn is_algebraic(&self, i: usize) -> bool {
        self.mass[i] == T::zero()
    }

    pub fn reaction(&self, u: &[T]) -> Vec<T> {
        self.kinetics.eval(u, self.mu)
    }

    pub fn jacobian(&self, u: &[T]) -> Mat<T> {
        self.kinetics.jacobian(u, self.mu)
    }

    /// Same system with different kinetics (dimensions must agree).
    pub fn with_kinetics(&self, kinetics: Kinetics<T>) -> Result<Self> {
        Self::with_mass(self.d.clone(), self.mass.clone(), kinetics, self.mu)
    }

    /// Newton iteration for a homogeneous equilibrium `f(u) = 0`.
    pub fn equilibrium(&self, seed: &[T], tol: T) -> Result<Vec<T>> {
        let mut u = seed.to_vec();
        let mut res = T::infinity();
        for _ in 0..100 {
            let f = self.reaction(&u);
            res = f.iter().fold(T::zero(), |m, x| m.max(x.abs()));
            if res <= tol {
                return Ok(u);
            }
            let step = self.jacobian(&u).lu()?.solve(&f);
            for (x, s) in u.iter_mut().zip(step) {
                *x -= s;
            }
            if u.iter().any(|x| !x.is_finite()) {
                break;
            }
        }
        let f = self.reaction(&u);
        let last = f.iter().fold(T::zero(), |m, x| m.max(x.abs()));
        if last <= tol {
            return Ok(u);
        }
        Err(Error::NoConvergence {
            what: "equilibrium Newton",
            iterations: 100,
            residual: res.to_f64_lossy(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::kinetics::Monomial;

    #[test]
    fn rejects_indefinite_diffusion() {
        let k = Kinetics::<f64>::zero(2);
        let d = Mat::from_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]]).unwrap();
        assert!(RdSystem::new(d, k, 0.0).is_err());
    }

    #[test]
    fn equilibrium_of_logistic() {
        let k = Kinetics::<f64>::new(vec![vec![
            Monomial::new(1.0, 0, vec![1]),
            Monomial::new(-1.0, 0, vec![2]),
        ]])
        .unwrap();
        let s = RdSystem::new(Mat::identity(1), k, 0.0).unwrap();
        let u = s.equilibrium(&[0.8], 1e-14).unwrap();
        assert!((u[0] - 1.0).abs() < 1e-14);
    }
}

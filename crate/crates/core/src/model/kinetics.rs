//! Polynomial kinetics `f(u; μ)` stored as sums of monomials.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::scalar::Real;

/// `coef · μ^mu_pow · Π u_i^{u_pows[i]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Monomial<T> {
    pub coef: T,
    #[serde(default)]
    pub mu_pow: u32,
    pub u_pows: Vec<u32>,
}

#[inline]
fn ipow<T: Real>(x: T, p: u32) -> T {
    match p {
        0 => T::one(),
        1 => x,
        2 => x * x,
        3 => x * x * x,
        _ => x.powi(p as i32),
    }
}

impl<T: Real> Monomial<T> {
    pub fn new(coef: T, mu_pow: u32, u_pows: Vec<u32>) -> Self {
        Self { coef, mu_pow, u_pows }
    }

    pub fn degree(&self) -> u32 {
        self.u_pows.iter().sum()
    }

    pub fn eval(&self, u: &[T], mu: T) -> T {
        let mut v = self.coef * ipow(mu, self.mu_pow);
        for (&x, &p) in u.iter().zip(&self.u_pows) {
            if p > 0 {
                v *= ipow(x, p);
            }
        }
        v
    }

    /// `∂/∂u_j` evaluated at `u`.
    pub fn partial(&self, j: usize, u: &[T], mu: T) -> T {
        let pj = self.u_pows[j];
        if pj == 0 {
            return T::zero();
        }
        let mut v = self.coef * T::from_usize_lossy(pj as usize) * ipow(mu, self.mu_pow);
        for (i, (&x, &p)) in u.iter().zip(&self.u_pows).enumerate() {
            let e = if i == j { p - 1 } else { p };
            if e > 0 {
                v *= ipow(x, e);
            }
        }
        v
    }
}

/// Kinetics of an `n`-component system: one monomial list per component.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Kinetics<T> {
    n: usize,
    terms: Vec<Vec<Monomial<T>>>,
}

impl<T: Real> Kinetics<T> {
    pub fn new(terms: Vec<Vec<Monomial<T>>>) -> Result<Self> {
        let n = terms.len();
        if n == 0 {
            return Err(Error::InvalidModel("kinetics need at least one component".into()));
        }
        for (i, comp) in terms.iter().enumerate() {
            for m in comp {
                if m.u_pows.len() != n {
                    return Err(Error::InvalidModel(format!(
                        "component {i}: monomial has {} exponents, expected {n}",
                        m.u_pows.len()
                    )));
                }
                if !m.coef.is_finite() {
                    return Err(Error::InvalidModel(format!("component {i}: non-finite coefficient")));
                }
            }
        }
        Ok(Self { n, terms }.simplified())
    }

    pub fn zero(n: usize) -> Self {
        Self { n, terms: vec![Vec::new(); n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[Vec<Monomial<T>>] {
        &self.terms
    }

    pub fn component(&self, i: usize) -> &[Monomial<T>] {
        &self.terms[i]
    }

    pub fn push(&mut self, comp: usize, m: Monomial<T>) {
        assert_eq!(m.u_pows.len(), self.n);
        self.terms[comp].push(m);
    }

    /// Merges equal exponent patterns and drops zero coefficients.
    pub fn simplified(mut self) -> Self {
        for comp in self.terms.iter_mut() {
            let mut merged: Vec<Monomial<T>> = Vec::with_capacity(comp.len());
            for m in comp.drain(..) {
                if let Some(e) = merged
                    .iter_mut()
                    .find(|e| e.mu_pow == m.mu_pow && e.u_pows == m.u_pows)
                {
                    e.coef += m.coef;
                } else {
                    merged.push(m);
                }
            }
            merged.retain(|m| m.coef != T::zero());
            *comp = merged;
        }
        self
    }

    /// Removes monomials of degree 0 in `u` (all `μ`-powers).
    pub fn without_constant_terms(mut self) -> Self {
        for comp in self.terms.iter_mut() {
            comp.retain(|m| m.degree() > 0);
        }
        self
    }

    pub fn eval(&self, u: &[T], mu: T) -> Vec<T> {
        self.terms
            .iter()
            .map(|comp| comp.iter().map(|m| m.eval(u, mu)).sum())
            .collect()
    }

    pub fn jacobian(&self, u: &[T], mu: T) -> Mat<T> {
        let n = self.n;
        let mut j = Mat::zeros(n, n);
        for (i, comp) in self.terms.iter().enumerate() {
            for m in comp {
                for k in 0..n {
                    j[(i, k)] += m.partial(k, u, mu);
                }
            }
        }
        j
    }

    /// `∂f/∂μ` at `(u, μ)`.
    pub fn d_mu(&self, u: &[T], mu: T) -> Vec<T> {
        self.terms
            .iter()
            .map(|comp| {
                comp.iter()
                    .filter(|m| m.mu_pow > 0)
                    .map(|m| {
                        let mut d = m.clone();
                        d.coef *= T::from_usize_lossy(m.mu_pow as usize);
                        d.mu_pow -= 1;
                        d.eval(u, mu)
                    })
                    .sum()
            })
            .collect()
    }

    /// Substitutes a numeric value for `μ`; the result has `mu_pow = 0`.
    pub fn specialize(&self, mu: T) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|comp| {
                comp.iter()
                    .map(|m| Monomial::new(m.coef * mu.powi(m.mu_pow as i32), 0, m.u_pows.clone()))
                    .collect()
            })
            .collect();
        Self { n: self.n, terms }.simplified()
    }

    /// Kinetics in the variable `w = u − shift`, i.e. `g(w) = f(w + shift)`.
    pub fn translate(&self, shift: &[T]) -> Self {
        assert_eq!(shift.len(), self.n);
        let mut out = Self::zero(self.n);
        for (i, comp) in self.terms.iter().enumerate() {
            for m in comp {
                // expand Π (w_k + s_k)^{p_k} factor by factor
                let mut partial: Vec<(T, Vec<u32>)> = vec![(m.coef, vec![0; self.n])];
                for k in 0..self.n {
                    let p = m.u_pows[k];
                    if p == 0 {
                        continue;
                    }
                    let mut next = Vec::with_capacity(partial.len() * (p as usize + 1));
                    for (c, pows) in &partial {
                        let mut binom = T::one();
                        for j in 0..=p {
                            // C(p, j) s^{p-j} w^j
                            let s_pow = shift[k].powi((p - j) as i32);
                            let coef = *c * binom * s_pow;
                            if coef != T::zero() {
                                let mut q = pows.clone();
                                q[k] = j;
                                next.push((coef, q));
                            }
                            binom = binom * T::from_usize_lossy((p - j) as usize)
                                / T::from_usize_lossy(j as usize + 1);
                        }
                    }
                    partial = next;
                }
                for (c, pows) in partial {
                    out.terms[i].push(Monomial::new(c, m.mu_pow, pows));
                }
            }
        }
        out.simplified()
    }

    /// Largest total degree over all monomials.
    pub fn max_degree(&self) -> u32 {
        self.terms
            .iter()
            .flatten()
            .map(Monomial::degree)
            .max()
            .unwrap_or(0)
    }

    pub fn cast<U: Real>(&self) -> Kinetics<U> {
        Kinetics {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|comp| {
                    comp.iter()
                        .map(|m| Monomial::new(U::lit(m.coef.to_f64_lossy()), m.mu_pow, m.u_pows.clone()))
                        .collect()
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kpp() -> Kinetics<f64> {
        Kinetics::<f64>::new(vec![vec![
            Monomial::new(1.0, 0, vec![1]),
            Monomial::new(-1.0, 0, vec![2]),
        ]])
        .unwrap()
    }

    #[test]
    fn kpp_jacobian_at_origin() {
        let j = kpp().jacobian(&[0.0], 0.0);
        assert_eq!(j[(0, 0)], 1.0);
        assert_eq!(kpp().eval(&[0.0], 0.0), vec![0.0]);
    }

    #[test]
    fn translate_matches_shifted_evaluation() {
        let k = Kinetics::<f64>::new(vec![
            vec![
                Monomial::new(0.7, 1, vec![2, 1]),
                Monomial::new(-1.0, 0, vec![3, 0]),
                Monomial::new(2.0, 0, vec![0, 0]),
            ],
            vec![Monomial::new(0.3, 0, vec![1, 2])],
        ])
        .unwrap();
        let shift = [-1.0, 0.25];
        let t = k.translate(&shift);
        let w = [0.4, -0.3];
        let a = t.eval(&w, 0.2);
        let b = k.eval(&[w[0] + shift[0], w[1] + shift[1]], 0.2);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn specialize_and_d_mu() {
        let k = Kinetics::<f64>::new(vec![vec![Monomial::new(3.0, 2, vec![1])]]).unwrap();
        let s = k.specialize(0.5);
        assert_eq!(s.component(0)[0].coef, 0.75);
        assert!((k.d_mu(&[2.0], 0.5)[0] - 6.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_exponent_count() {
        assert!(Kinetics::<f64>::new(vec![vec![Monomial::new(1.0, 0, vec![1, 0])]]).is_err());
    }

    #[test]
    fn merges_duplicates() {
        let k = Kinetics::<f64>::new(vec![vec![
            Monomial::new(1.0, 0, vec![2]),
            Monomial::new(-1.0, 0, vec![2]),
        ]])
        .unwrap();
        assert!(k.component(0).is_empty());
    }
}

//! Exponential and algebraic weights, and the smooth cutoffs of the
//! far-field/core ansatz.
//!
//! All blends are built from the quintic smoothstep `S(t) = 6t⁵ − 15t⁴ + 10t³`
//! and are exactly C² at the matching points.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[inline]
fn smoothstep<T: Real>(t: T) -> T {
    t * t * t * (T::lit(10.0) + t * (T::lit(-15.0) + t * T::lit(6.0)))
}

#[inline]
fn smoothstep_d1<T: Real>(t: T) -> T {
    let s = t * (T::one() - t);
    T::lit(30.0) * s * s
}

#[inline]
fn smoothstep_d2<T: Real>(t: T) -> T {
    T::lit(60.0) * t * (T::one() - t) * (T::one() - T::lit(2.0) * t)
}

/// Antiderivative of the smoothstep in `ξ = 2t − 1`, giving the exponent
/// profile of `ω_*`: `ψ = 0` for `ξ ≤ −1`, `ψ = ξ` for `ξ ≥ 1`.
/// Returns `(ψ, ψ', ψ'')`.
pub fn psi<T: Real>(xi: T) -> (T, T, T) {
    if xi <= -T::one() {
        (T::zero(), T::zero(), T::zero())
    } else if xi >= T::one() {
        (xi, T::one(), T::zero())
    } else {
        let t = (xi + T::one()) * T::lit(0.5);
        let t4 = t * t * t * t;
        let val = T::lit(2.0) * t4 * (T::lit(2.5) + t * (T::lit(-3.0) + t));
        (val, smoothstep(t), smoothstep_d1(t) * T::lit(0.5))
    }
}

/// Exponent profile of `ρ_{0,r}` divided by `r`: zero for `x ≤ −1`, `ln x`
/// for `x ≥ 1`, a quintic in between matching value and two derivatives.
/// Returns `(φ, φ', φ'')`.
pub fn phi<T: Real>(x: T) -> (T, T, T) {
    if x <= -T::one() {
        (T::zero(), T::zero(), T::zero())
    } else if x >= T::one() {
        (x.ln(), x.recip(), -(x * x).recip())
    } else {
        let s = x + T::one();
        let s2 = s * s;
        let val = s2 * s * (T::lit(-1.25) + s * (T::lit(1.125) - s * T::lit(0.25)));
        let d1 = s2 * (T::lit(-3.75) + s * (T::lit(4.5) - s * T::lit(1.25)));
        let d2 = s * (T::lit(-7.5) + s * (T::lit(13.5) - s * T::lit(5.0)));
        (val, d1, d2)
    }
}

/// Parameters of `ω_*` and `ρ_{0,r}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec<T> {
    pub eta_star: T,
    pub r: T,
}

impl<T: Real> WeightSpec<T> {
    pub fn new(eta_star: T, r: T) -> Result<Self> {
        if !(eta_star > T::zero()) || !eta_star.is_finite() || !r.is_finite() {
            return Err(Error::InvalidModel(format!(
                "weight needs eta_star > 0 and finite r (got {eta_star}, {r})"
            )));
        }
        Ok(Self { eta_star, r })
    }

    /// `ω_*(ξ)`.
    pub fn omega(&self, xi: T) -> T {
        self.log_omega(xi).0.exp()
    }

    /// `(log ω_*, (log ω_*)', (log ω_*)'')`.
    pub fn log_omega(&self, xi: T) -> (T, T, T) {
        let (p, d1, d2) = psi(xi);
        (self.eta_star * p, self.eta_star * d1, self.eta_star * d2)
    }

    /// `ρ_{0,r}(x)`.
    pub fn rho(&self, x: T) -> T {
        (self.r * phi(x).0).exp()
    }
}

pub fn evaluate_weight<T: Real>(spec: &WeightSpec<T>, x: T) -> T {
    spec.omega(x)
}

pub fn evaluate_algebraic_weight<T: Real>(spec: &WeightSpec<T>, x: T) -> T {
    spec.rho(x)
}

/// `χ₋`: 1 on `(−∞, −2]`, 0 on `[−1, ∞)`. Returns value and two derivatives.
pub fn chi_minus<T: Real>(x: T) -> (T, T, T) {
    if x <= T::lit(-2.0) {
        (T::one(), T::zero(), T::zero())
    } else if x >= -T::one() {
        (T::zero(), T::zero(), T::zero())
    } else {
        let t = x + T::lit(2.0);
        (T::one() - smoothstep(t), -smoothstep_d1(t), -smoothstep_d2(t))
    }
}

/// `χ₊(x) = χ₋(−x)`: 0 on `(−∞, 1]`, 1 on `[2, ∞)`.
pub fn chi_plus<T: Real>(x: T) -> (T, T, T) {
    let (v, d1, d2) = chi_minus(-x);
    (v, -d1, d2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn branch_values() {
        let w = WeightSpec::new(1.0, 2.0).unwrap();
        assert_eq!(w.omega(-5.0), 1.0);
        assert!((w.omega(3.0) - 3f64.exp()).abs() < 1e-12);
        assert!((w.rho(4.0) - 16.0).abs() < 1e-12);
        assert_eq!(w.rho(-3.0), 1.0);
    }

    fn check_c2(f: impl Fn(f64) -> (f64, f64, f64), at: f64) {
        let e = 1e-9;
        let (a, a1, a2) = f(at - e);
        let (b, b1, b2) = f(at + e);
        assert!((a - b).abs() < 1e-8 && (a1 - b1).abs() < 1e-8 && (a2 - b2).abs() < 1e-7, "at {at}");
    }

    #[test]
    fn blends_are_c2() {
        for at in [-1.0, 1.0] {
            check_c2(psi, at);
            check_c2(phi, at);
        }
        for at in [-2.0, -1.0] {
            check_c2(chi_minus, at);
        }
        for at in [1.0, 2.0] {
            check_c2(chi_plus, at);
        }
    }

    #[test]
    fn derivatives_match_differences() {
        let h = 1e-6;
        for i in 0..40 {
            let x = -1.0 + 0.05 * i as f64 + 0.0123;
            for f in [psi::<f64>, phi::<f64>, chi_minus::<f64>, chi_plus::<f64>] {
                let (_, d1, d2) = f(x);
                let fd1 = (f(x + h).0 - f(x - h).0) / (2.0 * h);
                let fd2 = (f(x + h).1 - f(x - h).1) / (2.0 * h);
                assert!((d1 - fd1).abs() < 1e-7 && (d2 - fd2).abs() < 1e-6);
            }
        }
    }
}

//! Linear spreading speed: the speed at which the relevant pinched double
//! root reaches the imaginary axis.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::{check_pinching, find_double_roots, newton_double_root, DispersionRelation, DoubleRoot, PinchStatus, Region};
use crate::error::{Error, Result};
use crate::model::RdSystem;
use crate::scalar::Real;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpreadingSpeed<T> {
    pub c_star: T,
    pub root: DoubleRoot<T>,
    /// Final bisection bracket before the Newton polish.
    pub bracket: (T, T),
}

/// The pinched, simple double root with the largest `Re λ` near the origin.
pub fn relevant_double_root<T: Real>(rel: &DispersionRelation<T>) -> Option<DoubleRoot<T>> {
    let search = find_double_roots(rel, &Region::around_origin(rel));
    let mut best: Option<DoubleRoot<T>> = None;
    for mut r in search.roots.into_iter().filter(|r| !r.degenerate) {
        if let Some(b) = &best {
            if r.lambda_star.re <= b.lambda_star.re {
                continue;
            }
        }
        let cert = check_pinching(rel, &r);
        if cert.status == PinchStatus::Pinched {
            r.pinching = Some(cert);
            best = Some(r);
        }
    }
    best
}

fn growth<T: Real>(base: &DispersionRelation<T>, c: T) -> Result<(T, DoubleRoot<T>)> {
    let rel = base.with_speed(c);
    let r = relevant_double_root(&rel).ok_or_else(|| {
        Error::Numerics(format!("no pinched double root found at c = {c}"))
    })?;
    Ok((r.lambda_star.re, r))
}

/// Solves `Re λ*(c) = 0` for the linearization of `system` about `u = 0`.
pub fn linear_spreading_speed<T: Real>(system: &RdSystem<T>) -> Result<SpreadingSpeed<T>> {
    let n = system.n();
    let base = DispersionRelation::from_system(system, &vec![T::zero(); n], T::zero());
    let mut lo = T::zero();
    let (g_lo, _) = growth(&base, lo)?;
    if g_lo <= T::zero() {
        return Err(Error::NoBracket { lo: 0.0, hi: 0.0 });
    }
    let mut hi = T::one();
    loop {
        let (g, _) = growth(&base, hi)?;
        if g < T::zero() {
            break;
        }
        lo = hi;
        hi = hi * T::lit(2.0);
        if hi > T::lit(1e3) {
            return Err(Error::NoBracket { lo: 0.0, hi: hi.to_f64_lossy() });
        }
    }
    let mut root_lo = growth(&base, lo)?.1;
    while hi - lo > T::lit(1e-7) * (T::one() + hi) {
        let mid = T::lit(0.5) * (lo + hi);
        let (g, r) = growth(&base, mid)?;
        if g >= T::zero() {
            lo = mid;
            root_lo = r;
        } else {
            hi = mid;
        }
    }
    if root_lo.nu_star.im.abs() > T::lit(1e-6) || root_lo.lambda_star.im.abs() > T::lit(1e-6) {
        return Err(Error::Unsupported(
            "marginal double root is not real; complex marginal roots are outside scope".into(),
        ));
    }
    // Newton on (ν, c) with λ = 0 fixed
    let mut nu = root_lo.nu_star.re;
    let mut c = T::lit(0.5) * (lo + hi);
    let zero = Complex::new(T::zero(), T::zero());
    let eps = T::lit(1e-6);
    for _ in 0..50 {
        let rel = base.with_speed(c);
        let v = Complex::new(nu, T::zero());
        let f = rel.eval(zero, v).re;
        let g = rel.d_nu(zero, v).re;
        if f.abs().max(g.abs()) <= T::epsilon() * T::lit(16.0) * rel.scale() {
            break;
        }
        let rp = base.with_speed(c + eps);
        let rm = base.with_speed(c - eps);
        let fc = (rp.eval(zero, v).re - rm.eval(zero, v).re) / (eps * T::lit(2.0));
        let gc = (rp.d_nu(zero, v).re - rm.d_nu(zero, v).re) / (eps * T::lit(2.0));
        let fn_ = g;
        let gn = rel.d_nu_nu(zero, v).re;
        let det = fn_ * gc - fc * gn;
        if det == T::zero() {
            break;
        }
        let dnu = (gc * f - fc * g) / det;
        let dc = (fn_ * g - gn * f) / det;
        nu -= dnu;
        c -= dc;
    }
    let rel = base.with_speed(c);
    let mut root = newton_double_root(&rel, zero, Complex::new(nu, T::zero())).ok_or_else(|| Error::NoConvergence {
        what: "marginal double root",
        iterations: 50,
        residual: f64::NAN,
    })?;
    let cert = check_pinching(&rel, &root);
    if cert.status != PinchStatus::Pinched {
        return Err(Error::Numerics(format!("marginal double root lost pinching: {}", cert.note)));
    }
    root.pinching = Some(cert);
    Ok(SpreadingSpeed { c_star: c, root, bracket: (lo, hi) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Mat;
    use crate::model::{Kinetics, Monomial};

    fn linear_scalar(a: f64) -> RdSystem<f64> {
        let k = Kinetics::new(vec![vec![Monomial::new(a, 0, vec![1]), Monomial::new(-1.0, 0, vec![2])]]).unwrap();
        RdSystem::new(Mat::identity(1), k, 0.0).unwrap()
    }

    #[test]
    fn classical_speed() {
        for a in [0.5, 1.0, 2.0, 4.0] {
            let s = linear_spreading_speed(&linear_scalar(a)).unwrap();
            assert!((s.c_star - 2.0 * a.sqrt()).abs() < 1e-8, "a = {a}: {}", s.c_star);
            assert!((s.root.nu_star.re + a.sqrt()).abs() < 1e-8);
        }
    }
}

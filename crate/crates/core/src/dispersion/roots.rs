//! Double roots `d = ∂_ν d = 0`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::pinch::PinchingCertificate;
use super::DispersionRelation;
use crate::scalar::Real;

/// Box in `(Re λ, Im λ, Re ν, Im ν)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub lambda_re: (f64, f64),
    pub lambda_im: (f64, f64),
    pub nu_re: (f64, f64),
    pub nu_im: (f64, f64),
}

impl Region {
    /// Box sized from the coefficients of `rel`.
    pub fn around_origin<T: Real>(rel: &DispersionRelation<T>) -> Self {
        let a = rel.a0().max_abs().to_f64_lossy();
        let c = rel.speed().to_f64_lossy().abs();
        let l = 1.0 + a + 0.5 * c * c;
        let v = 2.0 + c + 2.0 * (1.0 + a).sqrt();
        Self {
            lambda_re: (-l, l),
            lambda_im: (-l, l),
            nu_re: (-v, v),
            nu_im: (-v, v),
        }
    }

    fn contains<T: Real>(&self, lambda: Complex<T>, nu: Complex<T>, slack: f64) -> bool {
        let inside = |x: f64, (a, b): (f64, f64)| x >= a - slack && x <= b + slack;
        inside(lambda.re.to_f64_lossy(), self.lambda_re)
            && inside(lambda.im.to_f64_lossy(), self.lambda_im)
            && inside(nu.re.to_f64_lossy(), self.nu_re)
            && inside(nu.im.to_f64_lossy(), self.nu_im)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DoubleRoot<T> {
    pub lambda_star: Complex<T>,
    pub nu_star: Complex<T>,
    pub c: T,
    /// `∂_λ d` at the root.
    pub d10: Complex<T>,
    /// `½ ∂_ν² d` at the root.
    pub d02: Complex<T>,
    /// `(|d|, |∂_ν d|)` at the root.
    pub residual: (T, T),
    /// `|d10|` or `|d02|` below `1e-8 · scale`.
    pub degenerate: bool,
    pub pinching: Option<PinchingCertificate<T>>,
}

impl<T: Real> DoubleRoot<T> {
    pub fn is_simple(&self) -> bool {
        !self.degenerate
    }

    pub fn is_real(&self, tol: T) -> bool {
        self.lambda_star.im.abs() <= tol && self.nu_star.im.abs() <= tol
    }

    pub fn is_pinched(&self) -> bool {
        self.pinching
            .as_ref()
            .is_some_and(|p| p.status == super::PinchStatus::Pinched)
    }
}

#[derive(Clone, Debug)]
pub struct DoubleRootSearch<T> {
    pub roots: Vec<DoubleRoot<T>>,
    /// Seeds whose Newton iteration did not converge.
    pub failed_seeds: usize,
}

/// Newton's method on `(d, ∂_ν d) = 0` from `(λ₀, ν₀)`.
pub fn newton_double_root<T: Real>(
    rel: &DispersionRelation<T>,
    lambda0: Complex<T>,
    nu0: Complex<T>,
) -> Option<DoubleRoot<T>> {
    let scale = rel.scale();
    let tol = scale * T::epsilon() * T::lit(64.0);
    let (mut l, mut v) = (lambda0, nu0);
    let mut best = T::infinity();
    let mut stall = 0;
    for _ in 0..80 {
        let f = rel.eval(l, v);
        let g = rel.d_nu(l, v);
        let res = f.norm().max(g.norm());
        if !res.is_finite() {
            return None;
        }
        if res <= tol {
            break;
        }
        if res < best * T::lit(0.999) {
            best = res;
            stall = 0;
        } else {
            stall += 1;
            if stall > 12 {
                break;
            }
        }
        let (a, b) = (rel.d_lambda(l, v), g);
        let (cc, dd) = (rel.d_lambda_nu(l, v), rel.d_nu_nu(l, v));
        let det = a * dd - b * cc;
        if det.norm() == T::zero() {
            return None;
        }
        let dl = (dd * f - b * g) / det;
        let dv = (a * g - cc * f) / det;
        // damp very long steps
        let len = dl.norm().max(dv.norm());
        let cap = T::lit(2.0) * (T::one() + l.norm().max(v.norm()));
        let s = if len > cap { cap / len } else { T::one() };
        l -= dl * s;
        v -= dv * s;
    }
    let f = rel.eval(l, v);
    let g = rel.d_nu(l, v);
    let accept = T::lit(1e-10) * scale;
    if f.norm() > accept || g.norm() > accept {
        return None;
    }
    let d10 = rel.d_lambda(l, v);
    let d02 = rel.d_nu_nu(l, v) * T::lit(0.5);
    let simple_tol = T::lit(1e-8) * scale;
    Some(DoubleRoot {
        lambda_star: l,
        nu_star: v,
        c: rel.speed(),
        d10,
        d02,
        residual: (f.norm(), g.norm()),
        degenerate: d10.norm() <= simple_tol || d02.norm() <= simple_tol,
        pinching: None,
    })
}

/// All double roots in `region`, from a seed grid in `λ` combined with the
/// `ν`-roots of `d(λ_seed, ·)`.
pub fn find_double_roots<T: Real>(rel: &DispersionRelation<T>, region: &Region) -> DoubleRootSearch<T> {
    let mut roots: Vec<DoubleRoot<T>> = Vec::new();
    let mut failed = 0;
    let nl_re = 7;
    let nl_im = 5;
    let lerp = |(a, b): (f64, f64), k: usize, m: usize| {
        if m <= 1 {
            0.5 * (a + b)
        } else {
            a + (b - a) * k as f64 / (m - 1) as f64
        }
    };
    for i in 0..nl_re {
        for j in 0..nl_im {
            let ls = Complex::new(
                T::lit(lerp(region.lambda_re, i, nl_re)),
                T::lit(lerp(region.lambda_im, j, nl_im)),
            );
            let nus = match rel.nu_roots(ls) {
                Ok(v) => v,
                Err(_) => {
                    failed += 1;
                    continue;
                }
            };
            for nu in nus {
                match newton_double_root(rel, ls, nu) {
                    Some(r) => {
                        if !region.contains(r.lambda_star, r.nu_star, 1e-9) {
                            continue;
                        }
                        let dup = roots.iter().any(|q| {
                            (q.lambda_star - r.lambda_star).norm().to_f64_lossy() < 1e-8
                                && (q.nu_star - r.nu_star).norm().to_f64_lossy() < 1e-8
                        });
                        if !dup {
                            roots.push(r);
                        }
                    }
                    None => failed += 1,
                }
            }
        }
    }
    roots.sort_by(|a, b| {
        b.lambda_star
            .re
            .partial_cmp(&a.lambda_star.re)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    DoubleRootSearch { roots, failed_seeds: failed }
}

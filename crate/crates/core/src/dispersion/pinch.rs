//! Pinching certificates by continuation of the two `ν`-branches that meet
//! at a double root.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::{DispersionRelation, DoubleRoot};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PinchStatus {
    Pinched,
    NotPinched,
    Undetermined,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PinchStep<T> {
    pub s: T,
    pub nu_plus: Complex<T>,
    pub nu_minus: Complex<T>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PinchingCertificate<T> {
    pub status: PinchStatus,
    pub s_max: T,
    pub threshold: T,
    pub trace: Vec<PinchStep<T>>,
    pub note: String,
}

fn nearest<T: Real>(roots: &[Complex<T>], target: Complex<T>) -> (usize, T, T) {
    let mut best = (usize::MAX, T::infinity(), T::infinity());
    for (i, r) in roots.iter().enumerate() {
        let d = (*r - target).norm();
        if d < best.1 {
            best = (i, d, best.1);
        } else if d < best.2 {
            best.2 = d;
        }
    }
    best
}

/// Continues `ν_±(λ* + s)` for `s ∈ [0, S_max]`, `S_max = 10·scale·(1 + R)²`
/// with `R = 1 + |ν*|` the separation threshold.
pub fn check_pinching<T: Real>(rel: &DispersionRelation<T>, root: &DoubleRoot<T>) -> PinchingCertificate<T> {
    let threshold = T::one() + root.nu_star.norm();
    let s_max = T::lit(10.0) * rel.scale() * (T::one() + threshold).powi(2);
    let mut cert = PinchingCertificate {
        status: PinchStatus::Undetermined,
        s_max,
        threshold,
        trace: Vec::new(),
        note: String::new(),
    };
    if root.degenerate {
        cert.note = "degenerate double root".into();
        return cert;
    }
    let ls = root.lambda_star;
    // Branches are analytic in σ = √s near the double root; continue and
    // extrapolate in σ.
    let sig_max = s_max.sqrt();
    let unit = (-root.d10 / root.d02).sqrt();
    let mut pts: Vec<(T, Complex<T>, Complex<T>)> = vec![(T::zero(), root.nu_star, root.nu_star)];
    let mut h = T::lit(1e-3);
    let h_min = T::lit(1e-9);
    let mut sig = h;
    loop {
        let (pa, pb) = if pts.len() == 1 {
            (root.nu_star + unit * sig, root.nu_star - unit * sig)
        } else {
            let (s1, a1, b1) = pts[pts.len() - 1];
            let (s0, a0, b0) = pts[pts.len() - 2];
            let r = (sig - s1) / (s1 - s0);
            (a1 + (a1 - a0) * r, b1 + (b1 - b0) * r)
        };
        let roots = match rel.nu_roots(ls + sig * sig) {
            Ok(r) if r.len() >= 2 => r,
            _ => {
                cert.note = format!("root finder failed at s = {}", sig * sig);
                return cert;
            }
        };
        let (ia, da, da2) = nearest(&roots, pa);
        let (ib, db, db2) = nearest(&roots, pb);
        let tol = T::lit(0.3) * (pa - pb).norm() + T::lit(1e-12);
        let ok = ia != ib && da <= tol && db <= tol && da2 > T::lit(2.0) * da && db2 > T::lit(2.0) * db;
        if !ok {
            h = h * T::lit(0.5);
            if h < h_min {
                cert.note = format!("branch collision near s = {}", sig * sig);
                return cert;
            }
            sig = pts[pts.len() - 1].0 + h;
            continue;
        }
        pts.push((sig, roots[ia], roots[ib]));
        cert.trace.push(PinchStep { s: sig * sig, nu_plus: roots[ia], nu_minus: roots[ib] });
        if sig >= sig_max {
            break;
        }
        h = (h * T::lit(2.0)).min(T::lit(0.1));
        sig = (sig + h).min(sig_max);
    }
    // label the branches by the sign of their final real parts
    let last = cert.trace.last().cloned().expect("trace non-empty");
    if last.nu_plus.re < last.nu_minus.re {
        for st in cert.trace.iter_mut() {
            std::mem::swap(&mut st.nu_plus, &mut st.nu_minus);
        }
    }
    let last = cert.trace.last().expect("trace non-empty");
    let diverged = last.nu_plus.re > threshold && last.nu_minus.re < -threshold;
    let half = cert.trace.len() / 2;
    let slack = T::lit(1e-9);
    let monotone = cert.trace[half..].windows(2).all(|w| {
        w[1].nu_plus.re - w[1].nu_minus.re >= w[0].nu_plus.re - w[0].nu_minus.re - slack
    });
    cert.status = if diverged && monotone {
        PinchStatus::Pinched
    } else {
        cert.note = format!(
            "branches end at Re ν₊ = {}, Re ν₋ = {} (threshold {threshold})",
            last.nu_plus.re, last.nu_minus.re
        );
        PinchStatus::NotPinched
    };
    cert
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::{find_double_roots, Region};

    #[test]
    fn kpp_branches_follow_closed_form() {
        let rel = DispersionRelation::<f64>::scalar(1.0, 1.0, 2.0);
        let root = find_double_roots(&rel, &Region::around_origin(&rel)).roots.remove(0);
        let cert = check_pinching(&rel, &root);
        assert_eq!(cert.status, PinchStatus::Pinched);
        let mut worst: f64 = 0.0;
        for st in &cert.trace {
            let r = st.s.sqrt();
            worst = worst
                .max((st.nu_plus - Complex::new(-1.0 + r, 0.0)).norm())
                .max((st.nu_minus - Complex::new(-1.0 - r, 0.0)).norm());
        }
        assert!(worst < 1e-8, "{worst}");
        assert!(cert.trace.len() > 10);
    }

    #[test]
    fn damped_scalar_is_pinched() {
        // u_t = u_xx + c u_x − u
        let c = 1.3;
        let rel = DispersionRelation::<f64>::scalar(1.0, -1.0, c);
        let root = find_double_roots(&rel, &Region::around_origin(&rel)).roots.remove(0);
        assert!((root.lambda_star.re + 1.0 + c * c / 4.0).abs() < 1e-12);
        assert_eq!(check_pinching(&rel, &root).status, PinchStatus::Pinched);
    }
}

//! The no-Turing condition on the stable block and the symbol bounds of
//! the preconditioner `(δ²D_v∂² − K)⁻¹`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::linalg::Mat;
use crate::poly::{char_poly, Poly};
use crate::scalar::Real;
use crate::status::Status;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TuringReport {
    /// Largest number of roots of `det(−D_v k² − K − λ)` in `Re λ ≥ 0`
    /// over the sampled `k` (argument principle).
    pub max_unstable_count: usize,
    /// `min |det(−D_v k² − K − iω)|`, normalized by the size of the matrix.
    pub min_abs_det_on_axis: f64,
    /// `min_k (−max Re λ)` from a direct eigenvalue computation.
    pub margin: f64,
    /// Beyond this `k` the condition holds by a field-of-values bound.
    pub k_certified: f64,
    pub certified: bool,
    pub samples: usize,
    pub status: Status,
}

impl TuringReport {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn summary(&self) -> String {
        format!(
            "{}: {} root(s) in Re λ ≥ 0, min |det| on the imaginary axis {:e}, margin {:e}",
            self.status, self.max_unstable_count, self.min_abs_det_on_axis, self.margin
        )
    }
}

fn eval_real_poly(coeffs: &[f64], z: Complex<f64>) -> Complex<f64> {
    coeffs.iter().rev().fold(Complex::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// Winding number of `p` around the boundary of `[0, r] × [−r, r]`.
fn winding(coeffs: &[f64], r: f64) -> (usize, f64) {
    let corners = [
        Complex::new(0.0, -r),
        Complex::new(r, -r),
        Complex::new(r, r),
        Complex::new(0.0, r),
    ];
    let mut m = 256;
    loop {
        let mut total = 0.0;
        let mut min_axis = f64::INFINITY;
        let mut smooth = true;
        for e in 0..4 {
            let (a, b) = (corners[e], corners[(e + 1) % 4]);
            let mut prev = eval_real_poly(coeffs, a);
            for j in 1..=m {
                let z = a + (b - a) * (j as f64 / m as f64);
                let v = eval_real_poly(coeffs, z);
                if e == 3 {
                    min_axis = min_axis.min(v.norm());
                }
                let d = (v / prev).arg();
                if d.abs() > std::f64::consts::FRAC_PI_2 {
                    smooth = false;
                }
                total += d;
                prev = v;
            }
        }
        if smooth || m >= 1 << 16 {
            let count = (total / std::f64::consts::TAU).round().max(0.0) as usize;
            return (count, min_axis);
        }
        m *= 2;
    }
}

/// Checks `det(−D_v k² − K − λI) ≠ 0` for real `k` and `Re λ ≥ 0`.
pub fn check_no_turing<T: Real>(d_v: &Mat<T>, k: &Mat<T>) -> TuringReport {
    let d = d_v.map(|x| x.to_f64_lossy());
    let kk = k.map(|x| x.to_f64_lossy());
    let n = d.rows();
    let (dsym, _) = d.sym_part().symmetric_eigen();
    let (ksym, _) = kk.sym_part().symmetric_eigen();
    let dmin = dsym.first().copied().unwrap_or(0.0);
    let kmin = ksym.first().copied().unwrap_or(0.0);
    // Re eig(D k² + K) ≥ dmin k² + kmin
    let guard = 1e-3;
    let (k_cert, certified) = if dmin > 0.0 {
        (((guard - kmin).max(0.0) / dmin).sqrt(), true)
    } else {
        (100.0, false)
    };
    let k_hi = (2.0 * k_cert).max(2.0);
    let mut samples = 200;
    let mut report = None;
    while samples <= 6400 {
        let mut max_count = 0;
        let mut min_det = f64::INFINITY;
        let mut margin = f64::INFINITY;
        for j in 0..=samples {
            let kv = k_hi * j as f64 / samples as f64;
            let a = d.scale(-kv * kv).sub(&kk);
            let size = 1.0 + a.max_abs() * n as f64;
            let coeffs = char_poly(&a);
            let (count, min_axis) = winding(&coeffs, 1.01 * size);
            max_count = max_count.max(count);
            min_det = min_det.min(min_axis / size.powi(n as i32));
            let top = a.eigenvalues().iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
            margin = margin.min(-top);
        }
        let done = report
            .as_ref()
            .is_some_and(|r: &TuringReport| (r.margin - margin).abs() < 1e-6);
        report = Some(TuringReport {
            max_unstable_count: max_count,
            min_abs_det_on_axis: min_det,
            margin,
            k_certified: k_cert,
            certified,
            samples,
            status: Status::Pass,
        });
        if done {
            break;
        }
        samples *= 2;
    }
    let mut r = report.expect("at least one pass");
    r.status = if r.max_unstable_count > 0 || r.margin <= 0.0 {
        Status::Fail
    } else if r.min_abs_det_on_axis < 1e-12 || !r.certified {
        Status::Inconclusive
    } else {
        Status::Pass
    };
    r
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SymbolBounds {
    /// `sup_k ‖(−δ²D_v k² − K)⁻¹‖₂`.
    pub c0: f64,
    /// `sup_k ⟨k⟩ ‖(−δ²D_v k² − K)⁻¹‖₂`.
    pub c1: f64,
    /// Maximizers in `κ = δk`.
    pub kappa_c0: f64,
    pub kappa_c1: f64,
}

fn resolvent_norm(d: &Mat<f64>, k: &Mat<f64>, kappa: f64) -> f64 {
    let a = d.scale(-kappa * kappa).sub(k);
    match a.lu() {
        Ok(lu) => lu.inverse().norm2(),
        Err(_) => f64::INFINITY,
    }
}

fn golden_max(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-13 * (1.0 + a.abs() + b.abs()) {
            break;
        }
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        }
    }
    if f1 > f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

fn sup_over_kappa(f: &dyn Fn(f64) -> f64) -> (f64, f64) {
    // κ = 0 plus a logarithmic grid on (1e-6, 1e6)
    let mut grid = vec![0.0];
    let m = 1200;
    for j in 0..=m {
        grid.push(10f64.powf(-6.0 + 12.0 * j as f64 / m as f64));
    }
    let vals: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    let (imax, _) = vals
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |a, (i, &v)| if v > a.1 { (i, v) } else { a });
    let lo = grid[imax.saturating_sub(1)];
    let hi = grid[(imax + 1).min(grid.len() - 1)];
    let (x, v) = golden_max(f, lo, hi);
    if v >= vals[imax] {
        (x, v)
    } else {
        (grid[imax], vals[imax])
    }
}

/// Bounds on the preconditioner symbol, computed in `κ = δk`.
pub fn symbol_norm_bounds<T: Real>(d_v: &Mat<T>, k: &Mat<T>, delta: T) -> SymbolBounds {
    let d = d_v.map(|x| x.to_f64_lossy());
    let kk = k.map(|x| x.to_f64_lossy());
    let delta = delta.to_f64_lossy().abs();
    let c0f = |kappa: f64| resolvent_norm(&d, &kk, kappa);
    let c1f = |kappa: f64| (1.0 + (kappa / delta).powi(2)).sqrt() * resolvent_norm(&d, &kk, kappa);
    let (kappa_c0, c0) = sup_over_kappa(&c0f);
    let (kappa_c1, c1) = sup_over_kappa(&c1f);
    SymbolBounds { c0, c1, kappa_c0, kappa_c1 }
}

/// Roots of a real polynomial in ascending coefficients (helper for tests).
#[allow(dead_code)]
fn real_roots(coeffs: &[f64]) -> Vec<Complex<f64>> {
    Poly::new(coeffs.iter().map(|&c| Complex::new(c, 0.0)).collect())
        .roots()
        .unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_passes() {
        let r = check_no_turing(&Mat::diag(&[1.0]), &Mat::diag(&[1.0]));
        assert_eq!(r.status, Status::Pass, "{}", r.summary());
        assert!((r.margin - 1.0).abs() < 1e-12);
    }

    #[test]
    fn negative_k_fails() {
        let r = check_no_turing(&Mat::diag(&[1.0]), &Mat::diag(&[-1.0]));
        assert_eq!(r.status, Status::Fail);
        assert_eq!(r.max_unstable_count, 1);
    }

    #[test]
    fn triangular_k_passes() {
        let d = Mat::diag(&[1.0, 2.0]);
        let k = Mat::from_rows(&[vec![2.0, 1.0], vec![0.0, 3.0]]).unwrap();
        let r = check_no_turing(&d, &k);
        assert_eq!(r.status, Status::Pass);
        assert!(r.min_abs_det_on_axis > 1e-3);
        assert_eq!(real_roots(&[2.0, -3.0, 1.0]).len(), 2);
    }

    #[test]
    fn scalar_symbol_bounds() {
        for delta in [0.1f64, 0.05, 0.025] {
            let b = symbol_norm_bounds(&Mat::diag(&[1.0]), &Mat::diag(&[1.0]), delta);
            assert!((b.c0 - 1.0).abs() < 1e-12);
            let exact = 1.0 / (2.0 * delta * (1.0 - delta * delta).sqrt());
            assert!((b.c1 - exact).abs() < 1e-9 * exact, "{} vs {exact}", b.c1);
        }
    }
}

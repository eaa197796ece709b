//! Absence of a bounded solution of `𝓛v = 0` by shooting: the subspaces of
//! solutions bounded at `−∞` and at `+∞` are integrated to `ξ = 0` and their
//! smallest principal angle is measured.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::operator::{WeightedOperator, C64};
use crate::status::Status;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ZeroModeReport {
    /// Smallest principal angle at the matching point.
    pub angle: f64,
    /// Same with the right closure rate doubled.
    pub angle_alt: f64,
    pub dim_minus: usize,
    pub dim_plus: usize,
    /// Marginal far-field modes at `+∞` replaced by the Robin closure.
    pub marginal_plus: usize,
    pub matching_point: f64,
    pub threshold: f64,
    pub status: Status,
}

pub const ZERO_MODE_THRESHOLD: f64 = 1e-3;

/// First-order system `Y' = A(ξ)Y`, `Y = (v_d, v_d')`, at node `i`, with
/// algebraic components eliminated pointwise.
fn first_order(op: &WeightedOperator, i: usize) -> DMatrix<f64> {
    let dyn_: Vec<usize> = (0..op.n).filter(|&k| !op.algebraic[k]).collect();
    let alg: Vec<usize> = (0..op.n).filter(|&k| op.algebraic[k]).collect();
    let m = dyn_.len();
    let pick = |src: &crate::linalg::Mat<f64>, r: &[usize], c: &[usize]| {
        DMatrix::from_fn(r.len(), c.len(), |a, b| src[(r[a], c[b])])
    };
    let mut c_eff = pick(&op.c[i], &dyn_, &dyn_);
    if !alg.is_empty() {
        let caa = pick(&op.c[i], &alg, &alg);
        let cad = pick(&op.c[i], &alg, &dyn_);
        let cda = pick(&op.c[i], &dyn_, &alg);
        let x = caa.lu().solve(&cad).expect("algebraic block is invertible");
        c_eff -= cda * x;
    }
    let dinv = pick(&op.d, &dyn_, &dyn_).try_inverse().expect("diffusion is invertible on dynamic components");
    let b = pick(&op.b[i], &dyn_, &dyn_);
    let mut a = DMatrix::zeros(2 * m, 2 * m);
    for k in 0..m {
        a[(k, m + k)] = 1.0;
    }
    a.view_mut((m, 0), (m, m)).copy_from(&(-&dinv * c_eff));
    a.view_mut((m, m), (m, m)).copy_from(&(-&dinv * b));
    a
}

/// Real basis of the span of eigenvectors of `a` whose eigenvalues satisfy
/// `keep`, and the number of eigenvalues with `|Re μ| ≤ tol`.
fn invariant_basis(a: &DMatrix<f64>, keep: impl Fn(f64) -> bool, tol: f64) -> (Vec<DVector<f64>>, usize) {
    let n = a.nrows();
    let eig = a.complex_eigenvalues();
    let ac = a.map(|x| C64::new(x, 0.0));
    let mut out: Vec<DVector<f64>> = Vec::new();
    let mut marginal = 0;
    let mut seen: Vec<C64> = Vec::new();
    for &mu in eig.iter() {
        if mu.re.abs() <= tol {
            marginal += 1;
            continue;
        }
        if !keep(mu.re) || mu.im < -tol || seen.iter().any(|s| (s - mu).norm() < 1e-9 * (1.0 + mu.norm())) {
            continue;
        }
        seen.push(mu);
        let shifted = &ac - DMatrix::identity(n, n) * mu;
        let svd = shifted.svd(false, true);
        let vt = svd.v_t.expect("requested");
        let v: Vec<C64> = (0..n).map(|j| vt[(n - 1, j)].conj()).collect();
        // rotate so that the largest entry is real
        let big = v.iter().fold(C64::new(0.0, 0.0), |m, z| if z.norm() > m.norm() { *z } else { m });
        let ph = big.conj() / big.norm();
        let v: Vec<C64> = v.iter().map(|z| z * ph).collect();
        out.push(DVector::from_iterator(n, v.iter().map(|z| z.re)));
        if mu.im.abs() > tol {
            out.push(DVector::from_iterator(n, v.iter().map(|z| z.im)));
        }
    }
    (out, marginal)
}

fn orthonormalize(cols: &mut [DVector<f64>]) {
    for j in 0..cols.len() {
        for k in 0..j {
            let p = cols[k].dot(&cols[j]);
            let ck = cols[k].clone();
            cols[j] -= ck * p;
        }
        let nrm = cols[j].norm();
        if nrm > 0.0 {
            cols[j] /= nrm;
        }
    }
}

/// RK4 transport of a basis between nodes, with midpoint coefficients
/// averaged from the two nodes.
fn transport(op: &WeightedOperator, mut basis: Vec<DVector<f64>>, from: usize, to: usize) -> Vec<DVector<f64>> {
    let h = op.grid.h;
    let step = if to > from { 1isize } else { -1 };
    let mut i = from as isize;
    let mut a0 = first_order(op, from);
    while i != to as isize {
        let j = (i + step) as usize;
        let a1 = first_order(op, j);
        let am = (&a0 + &a1) * 0.5;
        let dt = h * step as f64;
        for y in basis.iter_mut() {
            let k1 = &a0 * &*y;
            let k2 = &am * (&*y + &k1 * (0.5 * dt));
            let k3 = &am * (&*y + &k2 * (0.5 * dt));
            let k4 = &a1 * (&*y + &k3 * dt);
            *y += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        }
        orthonormalize(&mut basis);
        a0 = a1;
        i += step;
    }
    basis
}

fn angle_with_rate(op: &WeightedOperator, rate: f64) -> (f64, usize, usize, usize, f64) {
    let last = op.nodes() - 1;
    let a_minus = first_order(op, 0);
    let a_plus = first_order(op, last);
    let scale = 1.0 + a_minus.amax().max(a_plus.amax());
    let tol = 1e-6 * scale;
    let (mut minus, _) = invariant_basis(&a_minus, |re| re > 0.0, tol);
    let (mut plus, marginal) = invariant_basis(&a_plus, |re| re < 0.0, tol);
    let m = a_plus.nrows() / 2;
    let mut k = 0;
    while plus.len() < m && k < m {
        // Robin closure v' = −rate·v on the marginal components
        let mut v = DVector::zeros(2 * m);
        v[k] = 1.0;
        v[m + k] = -rate;
        plus.push(v);
        k += 1;
    }
    orthonormalize(&mut minus);
    orthonormalize(&mut plus);
    let meet = (0..op.nodes()).min_by(|&a, &b| op.grid.x(a).abs().total_cmp(&op.grid.x(b).abs())).unwrap_or(0);
    let qm = transport(op, minus, 0, meet);
    let qp = transport(op, plus, last, meet);
    let (dm, dp) = (qm.len(), qp.len());
    let angle = if dm == 0 || dp == 0 {
        std::f64::consts::FRAC_PI_2
    } else if dm + dp > 2 * m {
        0.0
    } else {
        let a = DMatrix::from_columns(&qm);
        let b = DMatrix::from_columns(&qp);
        let s = (a.transpose() * b).singular_values();
        s.max().min(1.0).acos()
    };
    (angle, dm, dp, marginal, op.grid.x(meet))
}

/// Principal angle between the bounded subspaces at `ξ = 0`.
pub fn zero_mode_check(op: &WeightedOperator) -> ZeroModeReport {
    let rate = op.eta_margin;
    let (angle, dim_minus, dim_plus, marginal_plus, matching_point) = angle_with_rate(op, rate);
    let (angle_alt, ..) = angle_with_rate(op, 2.0 * rate);
    ZeroModeReport {
        angle,
        angle_alt,
        dim_minus,
        dim_plus,
        marginal_plus,
        matching_point,
        threshold: ZERO_MODE_THRESHOLD,
        status: Status::from_bool(angle > ZERO_MODE_THRESHOLD),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waves::{kpp_front, kpp_system, Grid};

    #[test]
    fn weighted_kpp_has_no_bounded_kernel() {
        let p = kpp_front::<f64>(Grid::standard()).unwrap();
        let sys = kpp_system();
        let op = WeightedOperator::assemble(&p, &sys, 0.1).unwrap();
        let r = zero_mode_check(&op);
        assert!(r.angle > 1e-2, "{r:?}");
        assert_eq!(r.marginal_plus, 2);
        // the translation mode q' is bounded for the unweighted operator
        let raw = WeightedOperator::assemble_with_weight(&p, &sys, 0.0, 0.1).unwrap();
        let r = zero_mode_check(&raw);
        assert!(r.angle < 1e-6, "{r:?}");
    }
}

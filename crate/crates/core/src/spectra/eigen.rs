//! Isolated eigenvalues of `𝓛` in a rectangle of the `λ`-plane by shifted
//! inverse iteration on complex banded factorizations, polished with
//! Rayleigh-quotient steps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::operator::{norm, WeightedOperator, C64};
use crate::banded::Banded;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralRegion {
    pub re: (f64, f64),
    pub im: (f64, f64),
    /// Eigenvalues with `|λ| < exclude_radius` are not reported.
    pub exclude_radius: f64,
}

impl SpectralRegion {
    /// `[re_min, re_max, im_min, im_max]`.
    pub fn new(bounds: [f64; 4], exclude_radius: f64) -> Result<Self> {
        if !(bounds[0] < bounds[1] && bounds[2] < bounds[3]) || bounds.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidModel(format!("bad spectral region {bounds:?}")));
        }
        Ok(Self { re: (bounds[0], bounds[1]), im: (bounds[2], bounds[3]), exclude_radius })
    }

    pub fn contains(&self, z: C64) -> bool {
        z.re >= self.re.0 && z.re <= self.re.1 && z.im >= self.im.0 && z.im <= self.im.1 && z.norm() >= self.exclude_radius
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Eigenpair {
    pub lambda: C64,
    /// `‖(𝓛 − λ)v‖ / ‖v‖`.
    pub residual: f64,
    /// Fraction of `‖v‖²` away from the two boundary strips.
    pub interior_mass: f64,
    #[serde(skip)]
    pub vector: Vec<C64>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct EigenScan {
    /// Localized eigenvalues inside the region.
    pub eigenvalues: Vec<Eigenpair>,
    /// Converged eigenvalues in the region whose eigenvectors live at the
    /// boundary (discretized essential spectrum).
    pub boundary_modes: Vec<Eigenpair>,
    pub shifts: usize,
    pub stagnated: usize,
}

const RESIDUAL_TOL: f64 = 1e-8;
const LOCALIZED: f64 = 0.9;

fn seed(n: usize, salt: u64) -> Vec<C64> {
    // deterministic, not aligned with any grid mode
    let mut s = 0x9e37_79b9_7f4a_7c15u64 ^ salt.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    (0..n)
        .map(|_| {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            let a = (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            let b = (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
            C64::new(a, b)
        })
        .collect()
}

fn normalize(v: &mut [C64]) {
    let n = norm(v);
    v.iter_mut().for_each(|z| *z /= n);
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn residual(a: &Banded<C64>, v: &[C64], lambda: C64) -> f64 {
    let av = a.matvec(v);
    let r: Vec<C64> = av.iter().zip(v).map(|(x, y)| x - lambda * y).collect();
    norm(&r) / norm(v)
}

/// One eigenpair near `sigma`, or `None` on stagnation.
pub fn eigenpair_near(op: &WeightedOperator, a: &Banded<C64>, sigma: C64, salt: u64) -> Option<Eigenpair> {
    let mut v = seed(a.n(), salt);
    normalize(&mut v);
    let mut shifted = a.clone();
    shifted.shift_diagonal(-sigma);
    let lu = shifted.factor().ok()?;
    let mut lambda = sigma;
    for _ in 0..80 {
        let x = lu.solve(&v);
        let theta = dot(&v, &x);
        if theta.norm() == 0.0 || !theta.re.is_finite() {
            return None;
        }
        lambda = sigma + theta.inv();
        v = x;
        normalize(&mut v);
        if residual(a, &v, lambda) < 1e-6 {
            break;
        }
    }
    for _ in 0..8 {
        if residual(a, &v, lambda) < RESIDUAL_TOL * 1e-2 {
            break;
        }
        let mut s = a.clone();
        s.shift_diagonal(-lambda);
        let Ok(lu) = s.factor() else { break };
        let x = lu.solve(&v);
        let theta = dot(&v, &x);
        if !theta.re.is_finite() || theta.norm() == 0.0 {
            break;
        }
        lambda += theta.inv();
        v = x;
        normalize(&mut v);
    }
    let r = residual(a, &v, lambda);
    if !(r < RESIDUAL_TOL) {
        return None;
    }
    Some(Eigenpair { lambda, residual: r, interior_mass: interior_mass(op, &v), vector: v })
}

/// Mass of `v` outside boundary strips of a quarter of each half-length.
pub fn interior_mass(op: &WeightedOperator, v: &[C64]) -> f64 {
    let full = op.expand(v);
    let g = op.grid;
    let strip = 0.125 * (g.x_max - g.x_min);
    let (lo, hi) = (g.x_min + strip, g.x_max - strip);
    let (mut inner, mut total) = (0.0, 0.0);
    for i in 0..op.nodes() {
        let m: f64 = full[i * op.n..(i + 1) * op.n].iter().map(|z| z.norm_sqr()).sum();
        total += m;
        let x = g.x(i);
        if x >= lo && x <= hi {
            inner += m;
        }
    }
    inner / total.max(f64::MIN_POSITIVE)
}

/// Scans a lattice of shifts of spacing about `0.25` over `region` (upper
/// half only, conjugates added) and keeps at most `count` eigenvalues with
/// the largest real parts.
pub fn eigenvalues_in_region(op: &WeightedOperator, region: &SpectralRegion, count: usize) -> Result<EigenScan> {
    let a = op.banded(C64::new(0.0, 0.0));
    let spacing = 0.25;
    let nr = (((region.re.1 - region.re.0) / spacing).ceil() as usize).max(1);
    let im_lo = region.im.0.max(0.0).min(region.im.1);
    let ni = (((region.im.1 - im_lo) / spacing).ceil() as usize).max(1);
    let shifts: Vec<(usize, usize)> = (0..=nr).flat_map(|p| (0..=ni).map(move |q| (p, q))).collect();
    let results: Vec<Option<Eigenpair>> = shifts
        .par_iter()
        .map(|&(p, q)| {
            let sigma = C64::new(
                region.re.0 + (region.re.1 - region.re.0) * p as f64 / nr as f64,
                im_lo + (region.im.1 - im_lo) * q as f64 / ni as f64,
            );
            // keep the shift off the eigenvalue it may sit on
            eigenpair_near(op, &a, sigma + C64::new(1.3e-3, 0.7e-3), (p * 1000 + q) as u64)
        })
        .collect();
    let mut scan = EigenScan { shifts: shifts.len(), ..EigenScan::default() };
    let mut found: Vec<Eigenpair> = Vec::new();
    for e in results {
        match e {
            Some(e) => {
                if !found.iter().any(|f| (f.lambda - e.lambda).norm() < 1e-6 * (1.0 + e.lambda.norm())) {
                    found.push(e);
                }
            }
            None => scan.stagnated += 1,
        }
    }
    let mut with_conj = Vec::new();
    for e in found {
        if e.lambda.im.abs() > 1e-9 {
            let conj = Eigenpair {
                lambda: e.lambda.conj(),
                residual: e.residual,
                interior_mass: e.interior_mass,
                vector: e.vector.iter().map(|z| z.conj()).collect(),
            };
            if !with_conj.iter().any(|f: &Eigenpair| (f.lambda - conj.lambda).norm() < 1e-6) {
                with_conj.push(conj);
            }
        }
        with_conj.push(e);
    }
    for e in with_conj {
        if !region.contains(e.lambda) {
            continue;
        }
        if e.interior_mass >= LOCALIZED {
            scan.eigenvalues.push(e);
        } else {
            scan.boundary_modes.push(e);
        }
    }
    scan.eigenvalues.sort_by(|x, y| y.lambda.re.total_cmp(&x.lambda.re));
    scan.eigenvalues.truncate(count);
    Ok(scan)
}

/// All eigenvalues of the reduced operator by a dense solve (small grids).
pub fn dense_spectrum(op: &WeightedOperator) -> Vec<C64> {
    op.dense().eigenvalues()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waves::{kpp_front, kpp_system, Grid};

    #[test]
    fn shifted_iteration_matches_dense() {
        let p = kpp_front::<f64>(Grid::new(-20.0, 25.0, 0.1).unwrap()).unwrap();
        let op = WeightedOperator::assemble(&p, &kpp_system(), 0.1)
            .unwrap()
            .with_potential(0, |x| 0.5 / (x - 8.0).cosh().powi(2));
        let dense = dense_spectrum(&op);
        let top = dense.iter().fold(dense[0], |m, z| if z.re > m.re { *z } else { m });
        assert!(top.re > 0.05, "{top}");
        let a = op.banded(C64::new(0.0, 0.0));
        let e = eigenpair_near(&op, &a, top + C64::new(0.03, 0.01), 1).unwrap();
        assert!((e.lambda - top).norm() < 1e-9, "{} vs {}", e.lambda, top);
        assert!(e.interior_mass > 0.9);
    }
}

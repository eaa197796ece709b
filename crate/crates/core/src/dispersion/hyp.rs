//! Spectral scans along vertical lines `ν = ν_base + ik`: the marginal
//! spectrum at the leading edge and the essential spectrum in the wake.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::{relevant_double_root, DispersionRelation, DoubleRoot};
use crate::error::{Error, Result};
use crate::model::RdSystem;
use crate::scalar::Real;
use crate::status::Status;

/// Dispersion curve sampled along `ν = base + ik`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumCurve {
    pub base: f64,
    pub samples: Vec<(f64, Vec<Complex<f64>>)>,
    pub max_real_part: f64,
    /// Wavenumbers where some root has `Re λ ≥ −1e-9`.
    pub contact_points: Vec<f64>,
    pub k_max: f64,
    /// Whether `|k| > k_max` is covered by a Gershgorin bound.
    pub tail_certified: bool,
    pub status: Status,
}

impl SpectrumCurve {
    /// CSV rows `k, Re λ_1, Im λ_1, …`.
    pub fn to_csv(&self) -> String {
        let n = self.samples.first().map_or(0, |s| s.1.len());
        let mut out = String::from("k");
        for j in 1..=n {
            out.push_str(&format!(",re_lambda_{j},im_lambda_{j}"));
        }
        out.push('\n');
        for (k, roots) in &self.samples {
            out.push_str(&format!("{k:?}"));
            for r in roots {
                out.push_str(&format!(",{:?},{:?}", r.re, r.im));
            }
            out.push('\n');
        }
        out
    }
}

/// Smallest `K` such that every Gershgorin disc of `Dν² + cνM + A₀`,
/// `ν = base + ik`, lies in `Re λ < −guard` for `|k| ≥ K`.
fn gershgorin_kmax<T: Real>(rel: &DispersionRelation<T>, base: T, guard: f64) -> Option<f64> {
    let n = rel.n();
    let f = |x: T| x.to_f64_lossy();
    let b = f(base);
    let c = f(rel.speed());
    let row_bound = |i: usize, k: f64| -> f64 {
        let d = rel.diffusion();
        let m = rel.mass();
        let a = rel.a0();
        let center = f(d[(i, i)]) * (b * b - k * k) + c * f(m[(i, i)]) * b + f(a[(i, i)]);
        let mut radius = 0.0;
        for j in 0..n {
            if j != i {
                radius += f(d[(i, j)]).abs() * (b * b + k * k)
                    + (c * f(m[(i, j)])).abs() * (b * b + k * k).sqrt()
                    + f(a[(i, j)]).abs();
            }
        }
        center + radius
    };
    // past the vertex the bound is monotone in k for rows with D_ii > Σ|D_ij|
    let mut k = 1.0;
    for _ in 0..40 {
        let ok = (0..n).all(|i| {
            let r = row_bound(i, k);
            let r2 = row_bound(i, 2.0 * k);
            r < -guard && r2 <= r + 1e-12
        });
        if ok {
            return Some(k);
        }
        k *= 1.5;
        if k > 1e4 {
            break;
        }
    }
    None
}

fn scan<T: Real>(rel: &DispersionRelation<T>, base: T, k_max: f64, n: usize) -> Result<Vec<(f64, Vec<Complex<f64>>)>> {
    (0..=n)
        .map(|j| {
            let k = k_max * j as f64 / n as f64;
            let nu = Complex::new(base, T::lit(k));
            let roots = rel.lambda_roots(nu)?;
            let mut r: Vec<Complex<f64>> = roots
                .iter()
                .map(|z| Complex::new(z.re.to_f64_lossy(), z.im.to_f64_lossy()))
                .collect();
            r.sort_by(|a, b| b.re.partial_cmp(&a.re).unwrap_or(std::cmp::Ordering::Equal));
            Ok((k, r))
        })
        .collect()
}

/// Report on the marginal pinched double root and the spectrum on the line
/// `ν = ν* + ik`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Hyp1Report {
    pub c_star: f64,
    pub lambda_star: Complex<f64>,
    pub nu_star: Complex<f64>,
    pub d10: Complex<f64>,
    pub d02: Complex<f64>,
    /// Item i: simple pinched double root at the origin with `d10·d02 < 0`.
    pub simple_root: Status,
    /// Item ii: only the contact `(ω, k) = (0, 0)`.
    pub marginal: Status,
    /// `−max Re λ` away from the principal branch near `k = 0`.
    pub margin: f64,
    /// Item iii: no roots with `Re λ > 0`.
    pub no_unstable: Status,
    pub max_real_part: f64,
    pub samples_used: usize,
    pub curve: SpectrumCurve,
}

impl Hyp1Report {
    pub fn status(&self) -> Status {
        Status::all([self.simple_root, self.marginal, self.no_unstable])
    }
}

/// Half-width of the `k`-window around 0 in which the principal branch is
/// separated from the other roots.
const K_EXCL: f64 = 0.5;
const MARGIN_TOL: f64 = 1e-3;

struct LineStats {
    margin: f64,
    max_re: f64,
    principal_ok: bool,
    contacts: Vec<f64>,
}

/// Statistics over the line, treating the root that continues `λ*` from
/// `k = 0` (the principal branch) separately inside `|k| < K_EXCL`.
fn line_stats(samples: &[(f64, Vec<Complex<f64>>)], d10: Complex<f64>, d02: Complex<f64>) -> LineStats {
    let mut margin = f64::INFINITY;
    let mut max_re = f64::NEG_INFINITY;
    let mut principal_ok = true;
    let mut contacts = Vec::new();
    for (k, roots) in samples {
        let k = *k;
        let principal = if k.abs() < K_EXCL {
            // principal branch ≈ −d02 (ik)² / d10
            let pred = d02 * k * k / d10;
            roots
                .iter()
                .enumerate()
                .map(|(i, r)| (i, (r - pred).norm()))
                .fold(None, |a: Option<(usize, f64)>, b| match a {
                    Some(x) if x.1 <= b.1 => Some(x),
                    _ => Some(b),
                })
                .map(|x| x.0)
        } else {
            None
        };
        let mut touches = false;
        for (i, r) in roots.iter().enumerate() {
            if Some(i) == principal {
                if k != 0.0 {
                    max_re = max_re.max(r.re);
                    principal_ok &= r.re < 0.0;
                    touches |= r.re >= 0.0;
                }
            } else {
                margin = margin.min(-r.re);
                max_re = max_re.max(r.re);
                touches |= r.re >= -1e-9;
            }
        }
        if touches {
            contacts.push(k);
        }
    }
    LineStats { margin, max_re, principal_ok, contacts }
}

/// Checks the three items of the marginal-spectrum hypothesis for the
/// double root `root` of `rel`.
pub fn verify_hyp1_root<T: Real>(rel: &DispersionRelation<T>, root: &DoubleRoot<T>) -> Result<Hyp1Report> {
    let to = |z: Complex<T>| Complex::new(z.re.to_f64_lossy(), z.im.to_f64_lossy());
    let (l, nu, d10, d02) = (to(root.lambda_star), to(root.nu_star), to(root.d10), to(root.d02));
    let scale = rel.scale().to_f64_lossy();
    let real = l.im.abs() < 1e-10 && nu.im.abs() < 1e-10 && d10.im.abs() < 1e-10 && d02.im.abs() < 1e-10;
    if !real {
        return Err(Error::Unsupported("complex marginal double root".into()));
    }
    let simple = d10.norm() > 1e-8 * scale && d02.norm() > 1e-8 * scale;
    let at_origin = l.norm() <= 1e-8;
    let pinched = root.is_pinched();
    let simple_root = Status::from_bool(simple && at_origin && pinched && d10.re * d02.re < 0.0);

    let base = root.nu_star.re;
    let guard = 0.01;
    let (k_max, tail_certified) = match gershgorin_kmax(rel, base, guard) {
        Some(k) => (k.max(2.0 * K_EXCL), true),
        None => (50.0, false),
    };
    let mut n = 400;
    let mut prev: Option<LineStats> = None;
    let (samples, stats) = loop {
        let samples = scan(rel, base, k_max, n)?;
        let stats = line_stats(&samples, d10, d02);
        let converged = prev.as_ref().is_some_and(|p| {
            (p.margin - stats.margin).abs() < 1e-4 && (p.max_re - stats.max_re).abs() < 1e-4
        });
        if converged || n >= 25_600 {
            break (samples, stats);
        }
        prev = Some(stats);
        n *= 2;
    };
    let marginal = if !stats.principal_ok || stats.margin <= 0.0 {
        Status::Fail
    } else if stats.margin < MARGIN_TOL || !tail_certified {
        Status::Inconclusive
    } else {
        Status::Pass
    };
    let tol = 1e-10 * scale;
    let no_unstable = if l.re > tol || stats.max_re > tol {
        Status::Fail
    } else if !tail_certified {
        Status::Inconclusive
    } else {
        Status::Pass
    };
    let mut contact_points = stats.contacts.clone();
    if at_origin {
        contact_points.insert(0, 0.0);
    }
    let curve = SpectrumCurve {
        base: base.to_f64_lossy(),
        max_real_part: stats.max_re.max(l.re),
        contact_points,
        k_max,
        tail_certified,
        status: no_unstable,
        samples,
    };
    Ok(Hyp1Report {
        c_star: rel.speed().to_f64_lossy(),
        lambda_star: l,
        nu_star: nu,
        d10,
        d02,
        simple_root,
        marginal,
        margin: stats.margin,
        no_unstable,
        max_real_part: stats.max_re.max(l.re),
        samples_used: n,
        curve,
    })
}

/// Linearizes `system` about 0 at speed `c_star`, locates the relevant
/// pinched double root and checks it.
pub fn verify_hyp1<T: Real>(system: &RdSystem<T>, c_star: T) -> Result<Hyp1Report> {
    let n = system.n();
    let rel = DispersionRelation::from_system(system, &vec![T::zero(); n], c_star);
    let root = relevant_double_root(&rel)
        .ok_or_else(|| Error::Numerics(format!("no pinched double root at c = {c_star}")))?;
    verify_hyp1_root(&rel, &root)
}

/// Essential spectrum of the linearization about the wake state `u_minus`
/// in the frame of speed `c`, as eigenvalues of `M⁻¹L` (the rates seen by
/// the evolution `M u_t = L u`).
pub fn left_spectrum<T: Real>(system: &RdSystem<T>, u_minus: &[T], c: T) -> Result<SpectrumCurve> {
    let res = system
        .reaction(u_minus)
        .iter()
        .fold(0.0_f64, |m, x| m.max(x.to_f64_lossy().abs()));
    if res > 1e-10 {
        return Err(Error::Numerics(format!(
            "state is not an equilibrium (kinetics residual {res:e})"
        )));
    }
    let rel = DispersionRelation::evolution(system, u_minus, c)?;
    let guard = 0.01;
    let (k_max, tail_certified) = match gershgorin_kmax(&rel, T::zero(), guard) {
        Some(k) => (k, true),
        None => (50.0, false),
    };
    let mut n = 400;
    let mut prev = f64::NAN;
    let samples = loop {
        let s = scan(&rel, T::zero(), k_max, n)?;
        let m = s.iter().flat_map(|(_, r)| r.iter().map(|z| z.re)).fold(f64::NEG_INFINITY, f64::max);
        if (m - prev).abs() < 1e-6 || n >= 25_600 {
            break s;
        }
        prev = m;
        n *= 2;
    };
    let max_re = samples
        .iter()
        .flat_map(|(_, r)| r.iter().map(|z| z.re))
        .fold(f64::NEG_INFINITY, f64::max);
    let margin = 1e-6;
    let status = if max_re >= -margin {
        Status::Fail
    } else if !tail_certified {
        Status::Inconclusive
    } else {
        Status::Pass
    };
    Ok(SpectrumCurve {
        base: 0.0,
        contact_points: samples
            .iter()
            .filter(|(_, r)| r.iter().any(|z| z.re >= -1e-9))
            .map(|(k, _)| *k)
            .collect(),
        samples,
        max_real_part: max_re,
        k_max,
        tail_certified,
        status,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Mat;
    use crate::model::{Kinetics, Monomial};

    fn kpp() -> RdSystem<f64> {
        let k = Kinetics::new(vec![vec![Monomial::new(1.0, 0, vec![1]), Monomial::new(-1.0, 0, vec![2])]]).unwrap();
        RdSystem::new(Mat::identity(1), k, 0.0).unwrap()
    }

    #[test]
    fn kpp_passes_at_two() {
        let r = verify_hyp1(&kpp(), 2.0).unwrap();
        assert_eq!(r.status(), Status::Pass, "{r:?}");
        assert!((r.d10.re + 1.0).abs() < 1e-12 && (r.d02.re - 1.0).abs() < 1e-12);
        assert!((r.margin - 0.25).abs() < 1e-3, "margin {}", r.margin);
        assert_eq!(r.curve.contact_points, vec![0.0]);
    }

    #[test]
    fn kpp_fails_below_two() {
        let r = verify_hyp1(&kpp(), 1.5).unwrap();
        assert_eq!(r.no_unstable, Status::Fail);
    }

    #[test]
    fn kpp_wake() {
        let s = left_spectrum(&kpp(), &[1.0], 2.0).unwrap();
        assert!((s.max_real_part + 1.0).abs() < 1e-12);
        assert_eq!(s.status, Status::Pass);
        assert!(left_spectrum(&kpp(), &[0.5], 2.0).is_err());
    }
}

//! Lyapunov–Schmidt reduced Evans function `E(γ, δ)`, `λ = γ²`.
//!
//! Eigenfunctions are sought as `w + e₊` with `e₊ = χ₊ e^{μ(γ)ξ}` the
//! decaying far-field mode of the weighted first component and `w` in the
//! domain of the index −1 operator `𝒜₁₁(0)` (value and slope vanish at the
//! right end, so `w + e₊` equals `e₊` on the last two nodes). With `φ` spanning its cokernel, `w` solves the projected
//! equation and `E = ⟨F(w + e₊), φ⟩`. Stable components are eliminated
//! exactly by solving their (banded) equations alongside.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::operator::{WeightedOperator, C64};
use crate::banded::solve_bordered;
use crate::error::{Error, Result};
use crate::model::{chi_plus, psi};

/// Cokernel vector of `𝒜₁₁(0)` and the gauge `E(γ_g, 0) = 1`.
///
/// The core correction is measured with the extra weight `e^{εψ}`,
/// `ε > Re γ`, so that the slowly decaying mode `e₊` is not in its space;
/// `φ` is the cokernel vector in that weighted space.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EvansContext {
    /// `φ` on the first component at each node (zero at the ends).
    pub phi: Vec<f64>,
    /// Component of `φ` on the extra boundary equation.
    pub phi_extra: f64,
    /// Extra decay rate `ε` of the core correction.
    pub epsilon: f64,
    pub gauge: C64,
    pub gauge_gamma: f64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct EvansSample {
    pub gamma: C64,
    pub value: C64,
    /// `max |w|` of the core correction.
    pub core_norm: f64,
    /// Pivot ratio of the banded factorization.
    pub conditioning: f64,
}

fn extra_weight(epsilon: f64, x: f64) -> f64 {
    (epsilon * psi(x).0).exp()
}

impl EvansContext {
    /// Builds `φ` from the `δ = 0` operator for contours up to `|γ| = gamma0`
    /// and fixes the gauge at `γ = gamma0 / 2`.
    pub fn new(op0: &WeightedOperator, gamma0: f64) -> Result<Self> {
        let epsilon = 1.5 * gamma0;
        let a11 = op0.principal_block().with_right_dirichlet();
        let lu = a11.banded(C64::new(0.0, 0.0)).factor()?;
        let last_node = a11.nodes() - 2;
        let last = a11.unknown(last_node, 0).expect("interior node");
        let mut e = vec![C64::new(0.0, 0.0); a11.dim()];
        e[last] = C64::new(1.0, 0.0);
        let raw = lu.solve_transpose(&e);
        let mut phi = vec![0.0; op0.nodes()];
        for (i, p) in phi.iter_mut().enumerate() {
            if let Some(r) = a11.unknown(i, 0) {
                *p = raw[r].re / extra_weight(epsilon, op0.grid.x(i));
            }
        }
        let mut phi_extra = -1.0 / extra_weight(epsilon, op0.grid.x(last_node));
        let scale = (phi.iter().map(|x| x * x).sum::<f64>() + phi_extra * phi_extra).sqrt();
        phi.iter_mut().for_each(|x| *x /= scale);
        phi_extra /= scale;
        let mut ctx = Self { phi, phi_extra, epsilon, gauge: C64::new(1.0, 0.0), gauge_gamma: 0.5 * gamma0 };
        let g = ctx.evaluate(op0, C64::new(ctx.gauge_gamma, 0.0))?;
        if g.value.norm() == 0.0 {
            return Err(Error::Numerics("Evans function vanishes at the gauge point".into()));
        }
        ctx.gauge = g.value;
        Ok(ctx)
    }

    /// `E(γ)` for the operator `op` (same grid as the context).
    pub fn evaluate(&self, op: &WeightedOperator, gamma: C64) -> Result<EvansSample> {
        if op.nodes() != self.phi.len() {
            return Err(Error::Dimension(format!("operator has {} nodes, context {}", op.nodes(), self.phi.len())));
        }
        let lam = gamma * gamma;
        let op = &op.with_right_dirichlet();
        let lu = op.banded(-lam).factor()?;
        let mu = far_field_exponent(op, gamma)?;
        let n = op.n;
        let mut e = vec![C64::new(0.0, 0.0); op.nodes() * n];
        for i in 0..op.nodes() {
            let x = op.grid.x(i);
            e[i * n] = (mu * x).exp() * chi_plus(x).0;
        }
        let le = op.apply_full(&e);
        let mut f = vec![C64::new(0.0, 0.0); op.dim()];
        let mut col = vec![C64::new(0.0, 0.0); op.dim()];
        let mut row = vec![C64::new(0.0, 0.0); op.dim()];
        for i in 0..op.nodes() {
            for k in 0..n {
                if let Some(r) = op.unknown(i, k) {
                    f[r] = -(le[r] - lam * e[i * n + k]);
                    if k == 0 {
                        col[r] = C64::new(-self.phi[i] / extra_weight(self.epsilon, op.grid.x(i)), 0.0);
                    }
                }
            }
        }
        let last_node = op.nodes() - 2;
        let last = op.unknown(last_node, 0).expect("interior node");
        row[last] = C64::new(1.0, 0.0);
        let corner = -self.phi_extra / extra_weight(self.epsilon, op.grid.x(last_node));
        let (w, beta) = solve_bordered(&lu, &col, &row, C64::new(corner, 0.0), &f, C64::new(0.0, 0.0))?;
        Ok(EvansSample {
            gamma,
            value: beta / self.gauge,
            core_norm: w.iter().fold(0.0, |m, z| m.max(z.norm())),
            conditioning: lu.pivot_ratio(),
        })
    }
}

/// Decaying root `μ` of the discrete weighted far-field symbol of the first
/// component, `Δ(μ) + b δ₁(μ) + c₀ = γ²`, continued from `−b/2 − √(b²/4 − c₀ + γ²)`.
pub fn far_field_exponent(op: &WeightedOperator, gamma: C64) -> Result<C64> {
    let i = op.nodes() - 2;
    let (d, b, c0, h) = (op.d[(0, 0)], op.b[i][(0, 0)], op.c[i][(0, 0)], op.grid.h);
    let lam = gamma * gamma;
    let disc = (C64::new(b * b / 4.0 - c0, 0.0) / d + lam / d).sqrt();
    let disc = if disc.re < 0.0 || (disc.re == 0.0 && disc.im * gamma.im < 0.0) { -disc } else { disc };
    let mut mu = -b / (2.0 * d) - disc;
    // the continuum branch with γ real positive is −γ when b = c₀ = 0
    if (b.abs() + c0.abs()) < 1e-12 && d == 1.0 {
        mu = -gamma;
    }
    let g = |m: C64| (d * ((m * h).cosh() * 2.0 - 2.0) / (h * h) + b * (m * h).sinh() / h + c0) - lam;
    let dg = |m: C64| d * 2.0 * (m * h).sinh() / h + b * (m * h).cosh();
    for _ in 0..50 {
        let dm = dg(mu);
        if dm.norm() < 1e-300 {
            break;
        }
        let step = g(mu) / dm;
        mu -= step;
        if step.norm() < 1e-15 * (1.0 + mu.norm()) {
            return Ok(mu);
        }
    }
    if g(mu).norm() < 1e-10 {
        Ok(mu)
    } else {
        Err(Error::NoConvergence { what: "far-field exponent", iterations: 50, residual: g(mu).norm() })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EvansScan {
    pub gamma0: f64,
    /// Samples along the boundary of `{|γ| < γ₀, Re γ > 0.1γ₀}`.
    pub contour: Vec<EvansSample>,
    /// Number of zeros inside by the argument principle.
    pub winding: i64,
    pub min_modulus: f64,
    pub at_origin: EvansSample,
}

/// Offset of the straight part of the contour from the imaginary axis. On a
/// finite domain `E` has poles on `Re γ = 0` at the discretized continuum.
pub const CONTOUR_OFFSET: f64 = 0.1;

fn contour_point(t: f64, gamma0: f64) -> C64 {
    // t ∈ [0, 1): segment Re γ = offset upwards, then the arc back down
    let off = CONTOUR_OFFSET * gamma0;
    let th0 = (off / gamma0).acos();
    if t < 0.5 {
        C64::new(off, gamma0 * th0.sin() * (4.0 * t - 1.0))
    } else {
        let th = th0 - 2.0 * th0 * (2.0 * t - 1.0);
        C64::from_polar(gamma0, th)
    }
}

/// Winding number of `E` around `{|γ| < γ₀, Re γ > 0.1γ₀}`, sampled
/// adaptively so that consecutive arguments differ by less than `π/4`.
pub fn evans_scan(ctx: &EvansContext, op: &WeightedOperator, gamma0: f64) -> Result<EvansScan> {
    let m = 64;
    let mut pts = (0..=m)
        .into_par_iter()
        .map(|j| {
            let t = j as f64 / m as f64;
            let g = contour_point(if j == m { 0.0 } else { t }, gamma0);
            ctx.evaluate(op, g).map(|s| (t, s))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut j = 0;
    while j + 1 < pts.len() {
        let (ta, a) = pts[j];
        let (tb, b) = pts[j + 1];
        let jump = (b.value / a.value).arg().abs();
        if jump > std::f64::consts::FRAC_PI_4 && tb - ta > 1e-6 && pts.len() < 8192 {
            let t = 0.5 * (ta + tb);
            let s = ctx.evaluate(op, contour_point(t, gamma0))?;
            pts.insert(j + 1, (t, s));
        } else {
            j += 1;
        }
    }
    let total: f64 = pts.windows(2).map(|w| (w[1].1.value / w[0].1.value).arg()).sum();
    let contour: Vec<EvansSample> = pts.into_iter().map(|(_, s)| s).collect();
    let min_modulus = contour.iter().fold(f64::INFINITY, |m, s| m.min(s.value.norm()));
    Ok(EvansScan {
        gamma0,
        // the contour runs clockwise
        winding: (-total / std::f64::consts::TAU).round() as i64,
        min_modulus,
        at_origin: ctx.evaluate(op, C64::new(0.0, 0.0))?,
        contour,
    })
}

/// Zero of `E` near `seed` by Newton with a centred difference derivative.
pub fn evans_zero(ctx: &EvansContext, op: &WeightedOperator, seed: C64) -> Result<C64> {
    let mut g = seed;
    let eps = 1e-5;
    for _ in 0..40 {
        let e = ctx.evaluate(op, g)?.value;
        let ep = ctx.evaluate(op, g + eps)?.value;
        let em = ctx.evaluate(op, g - eps)?.value;
        let de = (ep - em) / (2.0 * eps);
        let step = e / de;
        g -= step;
        if step.norm() < 1e-12 {
            return Ok(g);
        }
    }
    Err(Error::NoConvergence { what: "Evans zero", iterations: 40, residual: ctx.evaluate(op, g)?.value.norm() })
}

/// Smallest `|E|` on a polar lattice of the half disk, as a Newton seed.
pub fn evans_minimum(ctx: &EvansContext, op: &WeightedOperator, gamma0: f64) -> Result<EvansSample> {
    let mut best: Option<EvansSample> = None;
    for a in 1..=12 {
        for b in 0..=12 {
            let r = gamma0 * a as f64 / 12.0;
            let th = -std::f64::consts::FRAC_PI_2 + std::f64::consts::PI * b as f64 / 12.0;
            let s = ctx.evaluate(op, C64::from_polar(r, th))?;
            if best.map_or(true, |x| s.value.norm() < x.value.norm()) {
                best = Some(s);
            }
        }
    }
    Ok(best.expect("non-empty lattice"))
}

//! The weighted linearization `𝓛 = ω 𝒜 ω⁻¹`, `𝒜 = D∂² + cM∂ + f'(q)`,
//! about a computed front, discretized by central differences.
//!
//! With `ω = e^{g}` the conjugated operator is
//! `D v'' + (cM − 2g'D) v' + (D(g'² − g'') − cMg' + f'(q)) v`; the weight
//! derivatives are evaluated analytically. Dynamic components carry Robin
//! conditions `v' = κ₋v` on the left and `v' = −η̃v` on the right, which
//! are eliminated so that the discrete eigenproblem is a standard one.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::banded::Banded;
use crate::dispersion::DispersionRelation;
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::model::{RdSystem, WeightSpec};
use crate::scalar::Real;
use crate::waves::{FrontProfile, Grid};

pub type C64 = Complex<f64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Slot {
    Unknown(usize),
    /// Eliminated by a boundary condition: value = factor · partner.
    Tied,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WeightedOperator {
    pub grid: Grid<f64>,
    pub n: usize,
    pub speed: f64,
    /// Weight exponent `η` (0 for the unweighted operator).
    pub eta: f64,
    pub eta_margin: f64,
    /// Decay rate used in the left Robin condition.
    pub left_rate: f64,
    pub algebraic: Vec<bool>,
    pub d: Mat<f64>,
    pub b: Vec<Mat<f64>>,
    pub c: Vec<Mat<f64>>,
    /// `∂f/∂u` at the invaded state, unweighted.
    pub a_plus: Mat<f64>,
    /// Dirichlet instead of Robin at the right end.
    #[serde(default)]
    pub right_dirichlet: bool,
    #[serde(skip)]
    slots: Vec<Option<usize>>,
    dim: usize,
}

impl WeightedOperator {
    /// `𝓛` about `profile` with the weight `ω_*` of the continuous double
    /// root (`η_* = −ν*`) and speed `c*`.
    pub fn assemble<T: Real>(profile: &FrontProfile<T>, system: &RdSystem<T>, eta_margin: f64) -> Result<Self> {
        let eta = profile.tail_continuous.eta().to_f64_lossy();
        Self::assemble_with_weight(profile, system, eta, eta_margin)
    }

    /// Same with an explicit weight exponent (`0` gives `𝒜` itself).
    pub fn assemble_with_weight<T: Real>(
        profile: &FrontProfile<T>,
        system: &RdSystem<T>,
        eta: f64,
        eta_margin: f64,
    ) -> Result<Self> {
        let n = system.n();
        if profile.n() != n {
            return Err(Error::Dimension(format!("profile has {} components, system {}", profile.n(), n)));
        }
        let grid = Grid {
            x_min: profile.grid.x_min.to_f64_lossy(),
            x_max: profile.grid.x_max.to_f64_lossy(),
            h: profile.grid.h.to_f64_lossy(),
        };
        if grid.len() != profile.values.len() {
            return Err(Error::Dimension(format!(
                "grid has {} nodes, profile {}",
                grid.len(),
                profile.values.len()
            )));
        }
        let sys = system_f64(system);
        let c = profile.c_star.to_f64_lossy();
        let d = sys.diffusion().clone();
        let m = Mat::diag(sys.mass());
        let w = WeightSpec { eta_star: eta, r: 0.0 };
        let mut bs = Vec::with_capacity(grid.len());
        let mut cs = Vec::with_capacity(grid.len());
        for (i, q) in profile.values.iter().enumerate() {
            let (_, g1, g2) = if eta == 0.0 { (0.0, 0.0, 0.0) } else { w.log_omega(grid.x(i)) };
            let q: Vec<f64> = q.iter().map(|v| v.to_f64_lossy()).collect();
            bs.push(m.scale(c).sub(&d.scale(2.0 * g1)));
            let j = sys.jacobian(&q);
            cs.push(d.scale(g1 * g1 - g2).sub(&m.scale(c * g1)).add(&j));
        }
        let u_minus: Vec<f64> = profile.u_minus.iter().map(|v| v.to_f64_lossy()).collect();
        let left_rate = left_decay_rate(&sys, &u_minus, c)?;
        let algebraic = (0..n).map(|k| sys.is_algebraic(k)).collect();
        let a_plus = sys.jacobian(&vec![0.0; n]);
        let mut op = Self {
            grid,
            n,
            speed: c,
            eta,
            eta_margin,
            left_rate,
            algebraic,
            d,
            b: bs,
            c: cs,
            a_plus,
            right_dirichlet: false,
            slots: Vec::new(),
            dim: 0,
        };
        op.index();
        Ok(op)
    }

    fn index(&mut self) {
        let nodes = self.grid.len();
        let mut slots = Vec::with_capacity(nodes * self.n);
        let mut next = 0;
        for i in 0..nodes {
            for k in 0..self.n {
                if !self.algebraic[k] && (i == 0 || i == nodes - 1) {
                    slots.push(None);
                } else {
                    slots.push(Some(next));
                    next += 1;
                }
            }
        }
        self.slots = slots;
        self.dim = next;
    }

    pub fn nodes(&self) -> usize {
        self.grid.len()
    }

    /// Size of the reduced (boundary-eliminated) problem.
    pub fn dim(&self) -> usize {
        self.dim
    }

    fn slot(&self, i: usize, k: usize) -> Slot {
        match self.slots[i * self.n + k] {
            Some(r) => Slot::Unknown(r),
            None => Slot::Tied,
        }
    }

    /// Reduced index of `(node, component)` if it is an unknown.
    pub fn unknown(&self, i: usize, k: usize) -> Option<usize> {
        self.slots[i * self.n + k]
    }

    /// `(reduced partner, factor)` for an eliminated boundary value.
    fn tie(&self, i: usize, k: usize) -> (usize, f64) {
        let h = self.grid.h;
        if i == 0 {
            (self.slots[self.n + k].expect("interior"), 1.0 / (1.0 + self.left_rate * h))
        } else if self.right_dirichlet {
            (self.slots[(i - 1) * self.n + k].expect("interior"), 0.0)
        } else {
            (self.slots[(i - 1) * self.n + k].expect("interior"), 1.0 / (1.0 + self.eta_margin * h))
        }
    }

    /// Stencil of the equation at `(i, k)`: `(node, component, coefficient)`.
    pub fn row(&self, i: usize, k: usize) -> Vec<(usize, usize, f64)> {
        let (h, n) = (self.grid.h, self.n);
        let mut out = Vec::with_capacity(3 * n);
        for j in 0..n {
            let dk = self.d[(k, j)] / (h * h);
            let bk = self.b[i][(k, j)] / (2.0 * h);
            let ck = self.c[i][(k, j)];
            if i > 0 && (dk != 0.0 || bk != 0.0) {
                out.push((i - 1, j, dk - bk));
            }
            out.push((i, j, ck - 2.0 * dk));
            if i + 1 < self.nodes() && (dk != 0.0 || bk != 0.0) {
                out.push((i + 1, j, dk + bk));
            }
        }
        out
    }

    fn bandwidth(&self) -> usize {
        3 * self.n
    }

    /// Reduced operator as a banded matrix, plus `shift` on the diagonal.
    pub fn banded(&self, shift: C64) -> Banded<C64> {
        let bw = self.bandwidth();
        let mut a = Banded::zeros(self.dim, bw, bw);
        for i in 0..self.nodes() {
            for k in 0..self.n {
                let Some(r) = self.unknown(i, k) else { continue };
                for (ii, j, v) in self.row(i, k) {
                    match self.slot(ii, j) {
                        Slot::Unknown(col) => a.add(r, col, C64::new(v, 0.0)),
                        Slot::Tied => {
                            let (col, f) = self.tie(ii, j);
                            a.add(r, col, C64::new(v * f, 0.0));
                        }
                    }
                }
                a.add(r, r, shift);
            }
        }
        a
    }

    /// Real reduced operator.
    pub fn banded_real(&self) -> Banded<f64> {
        self.banded(C64::new(0.0, 0.0)).map(|z| z.re)
    }

    /// Reduced vector → values at all nodes (eliminated entries filled in).
    pub fn expand(&self, v: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.nodes() * self.n];
        for i in 0..self.nodes() {
            for k in 0..self.n {
                out[i * self.n + k] = match self.slot(i, k) {
                    Slot::Unknown(r) => v[r],
                    Slot::Tied => {
                        let (r, f) = self.tie(i, k);
                        v[r] * f
                    }
                };
            }
        }
        out
    }

    /// `𝓛v` at every equation row (reduced indexing) for `v` given at all
    /// nodes, without boundary elimination.
    pub fn apply_full(&self, v: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.dim];
        for i in 0..self.nodes() {
            for k in 0..self.n {
                let Some(r) = self.unknown(i, k) else { continue };
                out[r] = self
                    .row(i, k)
                    .into_iter()
                    .fold(C64::new(0.0, 0.0), |acc, (ii, j, c)| acc + v[ii * self.n + j] * c);
            }
        }
        out
    }

    /// Copy with `v = 0` at the right end for dynamic components.
    pub fn with_right_dirichlet(&self) -> Self {
        Self { right_dirichlet: true, ..self.clone() }
    }

    /// Adds `p(x)` to the zeroth-order coefficient of component `k`.
    pub fn with_potential(mut self, k: usize, p: impl Fn(f64) -> f64) -> Self {
        for i in 0..self.nodes() {
            self.c[i][(k, k)] += p(self.grid.x(i));
        }
        self
    }

    /// The same operator restricted to component 0 (`𝒜₁₁`).
    pub fn principal_block(&self) -> Self {
        let pick = |m: &Mat<f64>| Mat::diag(&[m[(0, 0)]]);
        let mut op = Self {
            grid: self.grid,
            n: 1,
            speed: self.speed,
            eta: self.eta,
            eta_margin: self.eta_margin,
            left_rate: self.left_rate,
            algebraic: vec![self.algebraic[0]],
            d: pick(&self.d),
            b: self.b.iter().map(pick).collect(),
            c: self.c.iter().map(pick).collect(),
            a_plus: pick(&self.a_plus),
            right_dirichlet: self.right_dirichlet,
            slots: Vec::new(),
            dim: 0,
        };
        op.index();
        op
    }

    /// `max_i |coefficient block (r, s)|` over the zeroth-order terms, for
    /// row and column index sets `r`, `s`.
    pub fn block_sup(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> f64 {
        let mut m = 0.0f64;
        for i in 0..self.nodes() {
            for r in rows.clone() {
                for s in cols.clone() {
                    m = m.max(self.c[i][(r, s)].abs()).max(self.b[i][(r, s)].abs());
                    if r != s {
                        m = m.max(self.d[(r, s)].abs());
                    }
                }
            }
        }
        m
    }

    /// Dense copy of the reduced operator (small grids only).
    pub fn dense(&self) -> Mat<f64> {
        let b = self.banded_real();
        let rows = b.to_dense();
        Mat::from_rows(&rows).expect("square")
    }
}

pub(crate) fn system_f64<T: Real>(system: &RdSystem<T>) -> RdSystem<f64> {
    let d = system.diffusion().map(|x| x.to_f64_lossy());
    let mass: Vec<f64> = system.mass().iter().map(|x| x.to_f64_lossy()).collect();
    RdSystem::with_mass(d, mass, system.kinetics().cast(), system.mu().to_f64_lossy())
        .expect("a valid system stays valid in f64")
}

/// Smallest positive real part among the spatial roots at `u₋`.
fn left_decay_rate(sys: &RdSystem<f64>, u_minus: &[f64], c: f64) -> Result<f64> {
    let rel = DispersionRelation::from_system(sys, u_minus, c);
    let roots = rel.nu_roots(C64::new(0.0, 0.0))?;
    roots
        .iter()
        .map(|r| r.re)
        .filter(|&r| r > 1e-8)
        .fold(None, |m: Option<f64>, r| Some(m.map_or(r, |m| m.min(r))))
        .ok_or_else(|| Error::Numerics("no decaying mode at the wake state".into()))
}

/// `‖v‖₂` of a complex vector.
pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waves::{kpp_front, kpp_system};

    #[test]
    fn conjugation_identity() {
        let grid = Grid::new(-20.0, 25.0, 0.05).unwrap();
        let p = kpp_front::<f64>(grid).unwrap();
        let op = WeightedOperator::assemble(&p, &kpp_system(), 0.1).unwrap();
        let w = WeightSpec { eta_star: op.eta, r: 0.0 };
        // smooth test function v = exp(−x²/8)
        let v = |x: f64| (-x * x / 8.0).exp();
        let v1 = |x: f64| -x / 4.0 * v(x);
        let v2 = |x: f64| (x * x / 16.0 - 0.25) * v(x);
        let full: Vec<C64> = (0..op.nodes()).map(|i| C64::new(w.omega(grid.x(i)) * v(grid.x(i)), 0.0)).collect();
        let lv = op.apply_full(&full);
        let mut worst = 0.0f64;
        for i in 1..op.nodes() - 1 {
            let x = grid.x(i);
            let q = p.values[i][0];
            let exact = w.omega(x) * (v2(x) + 2.0 * v1(x) + (1.0 - 2.0 * q) * v(x));
            let r = op.unknown(i, 0).unwrap();
            worst = worst.max((lv[r].re - exact).abs() / w.omega(x).max(1.0));
        }
        assert!(worst < 5e-3, "{worst}");
    }

    #[test]
    fn far_field_is_marginal() {
        let p = kpp_front::<f64>(Grid::standard()).unwrap();
        let op = WeightedOperator::assemble(&p, &kpp_system(), 0.1).unwrap();
        let last = op.nodes() - 2;
        assert!(op.b[last][(0, 0)].abs() < 1e-12);
        assert!(op.c[last][(0, 0)].abs() < 1e-12);
    }
}

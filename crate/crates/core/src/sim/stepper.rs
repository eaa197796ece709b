//! IMEX time stepping of `M u_t = D u_xx + c M u_x + f(u)` on a uniform grid
//! with no-flux boundaries.
//!
//! Diffusion, frame advection (fourth-order stencil) and the linear part of the stable block at the
//! invaded state are treated by Crank–Nicolson; the remaining reaction by
//! Heun's method. One banded factorization serves every step. Components
//! with zero mass are algebraic and solved pointwise by Newton.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::banded::{Banded, BandedLu};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::model::RdSystem;
use crate::scalar::Real;

/// Uniform grid with no-flux boundaries at both ends.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub x_min: f64,
    pub x_max: f64,
    pub h: f64,
    pub n_points: usize,
}

impl Grid1D {
    /// `x_max` is moved onto the lattice `x_min + kh`.
    pub fn new(x_min: f64, x_max: f64, h: f64) -> Result<Self> {
        if !(h > 0.0) || !(x_max > x_min) || !h.is_finite() || !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::InvalidModel(format!("bad grid [{x_min}, {x_max}] with h = {h}")));
        }
        let n_points = ((x_max - x_min) / h).round() as usize + 1;
        if n_points < 3 {
            return Err(Error::InvalidModel(format!("grid [{x_min}, {x_max}] with h = {h} has fewer than 3 nodes")));
        }
        Ok(Self { x_min, x_max: x_min + (n_points - 1) as f64 * h, h, n_points })
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.h
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }
}

/// Forcing `s(x, t)` added to the right-hand side (before division by mass).
pub type Source<T> = Arc<dyn Fn(T, T) -> Vec<T> + Send + Sync>;

pub struct Stepper<T: Real> {
    system: RdSystem<T>,
    pub grid: Grid1D,
    pub dt: T,
    pub frame_speed: T,
    dynamic: Vec<usize>,
    algebraic: Vec<usize>,
    /// `L₀ / m` on dynamic rows (zero elsewhere).
    l0: Mat<T>,
    lhs: BandedLu<T>,
    rhs: Banded<T>,
    source: Option<Source<T>>,
    t: T,
    /// Time is `t0 + steps·dt`, so sample times do not drift.
    t0: T,
    steps: usize,
    state: Vec<T>,
}

impl<T: Real> std::fmt::Debug for Stepper<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Stepper")
            .field("grid", &self.grid)
            .field("dt", &self.dt)
            .field("frame_speed", &self.frame_speed)
            .field("t", &self.t)
            .finish()
    }
}

impl<T: Real> Stepper<T> {
    /// `linear_at` is the state whose stable-block Jacobian is taken
    /// implicitly (the invaded state).
    pub fn new(system: RdSystem<T>, grid: Grid1D, dt: T, frame_speed: T, linear_at: &[T]) -> Result<Self> {
        let n = system.n();
        if linear_at.len() != n {
            return Err(Error::Dimension(format!("linearization point has {} entries, system {n}", linear_at.len())));
        }
        if !(dt > T::zero()) {
            return Err(Error::InvalidModel(format!("dt must be positive, got {dt}")));
        }
        let dynamic: Vec<usize> = (0..n).filter(|&k| !system.is_algebraic(k)).collect();
        let algebraic: Vec<usize> = (0..n).filter(|&k| system.is_algebraic(k)).collect();
        if dynamic.is_empty() {
            return Err(Error::InvalidModel("no dynamic component".into()));
        }
        let d = system.diffusion();
        for &k in &dynamic {
            if algebraic.iter().any(|&j| d[(k, j)] != T::zero()) {
                return Err(Error::Unsupported("diffusion couples a dynamic to an algebraic component".into()));
            }
        }
        let j0 = system.jacobian(linear_at);
        let mut l0 = Mat::zeros(n, n);
        for &k in dynamic.iter().filter(|&&k| k > 0) {
            for &j in dynamic.iter().filter(|&&j| j > 0) {
                l0[(k, j)] = j0[(k, j)] / system.mass()[k];
            }
        }
        let a = Self::implicit_operator(&system, &grid, frame_speed, &dynamic, &l0);
        let half = dt * T::lit(0.5);
        let mut lhs = a.map(|v| -half * v);
        lhs.shift_diagonal(T::one());
        let mut rhs = a.map(|v| half * v);
        rhs.shift_diagonal(T::one());
        let lhs = lhs.factor()?;
        let state = vec![T::zero(); n * grid.n_points];
        Ok(Self { system, grid, dt, frame_speed, dynamic, algebraic, l0, lhs, rhs, source: None, t: T::zero(), t0: T::zero(), steps: 0, state })
    }

    pub fn with_source(mut self, source: Source<T>) -> Self {
        self.source = Some(source);
        self
    }

    fn implicit_operator(sys: &RdSystem<T>, grid: &Grid1D, c: T, dynamic: &[usize], l0: &Mat<T>) -> Banded<T> {
        let nd = dynamic.len();
        let np = grid.n_points;
        let h = T::lit(grid.h);
        // i ± 1 couple all dynamic components; the advection stencil
        // reaches i ± 2 on the diagonal component
        let band = 2 * nd;
        let mut a = Banded::zeros(np * nd, band, band);
        let d = sys.diffusion();
        let mirror = |j: isize| -> usize {
            let last = np as isize - 1;
            (if j < 0 {
                -j
            } else if j > last {
                2 * last - j
            } else {
                j
            }) as usize
        };
        // fourth-order central first derivative
        let adv = [(-2isize, 1.0), (-1, -8.0), (1, 8.0), (2, -1.0)];
        for i in 0..np {
            let il = mirror(i as isize - 1);
            let ir = mirror(i as isize + 1);
            for (p, &k) in dynamic.iter().enumerate() {
                let row = i * nd + p;
                let mk = sys.mass()[k];
                for (q, &j) in dynamic.iter().enumerate() {
                    let dk = d[(k, j)] / (mk * h * h);
                    a.add(row, i * nd + q, -T::lit(2.0) * dk + l0[(k, j)]);
                    a.add(row, il * nd + q, dk);
                    a.add(row, ir * nd + q, dk);
                }
                if c != T::zero() {
                    for &(off, w) in &adv {
                        a.add(row, mirror(i as isize + off) * nd + p, c * T::lit(w) / (T::lit(12.0) * h));
                    }
                }
            }
        }
        a
    }

    pub fn n(&self) -> usize {
        self.system.n()
    }

    pub fn system(&self) -> &RdSystem<T> {
        &self.system
    }

    pub fn time(&self) -> T {
        self.t
    }

    /// Node-major state, `n` values per node.
    pub fn state(&self) -> &[T] {
        &self.state
    }

    /// Sets the state and time; algebraic components are re-solved.
    pub fn set_state(&mut self, state: Vec<T>, t: T) -> Result<()> {
        if state.len() != self.n() * self.grid.n_points {
            return Err(Error::Dimension(format!(
                "state has {} entries, expected {}",
                state.len(),
                self.n() * self.grid.n_points
            )));
        }
        self.state = state;
        self.t = t;
        self.t0 = t;
        self.steps = 0;
        let mut s = std::mem::take(&mut self.state);
        self.solve_algebraic(&mut s)?;
        self.state = s;
        Ok(())
    }

    fn pack(&self, u: &[T]) -> Vec<T> {
        let n = self.n();
        (0..self.grid.n_points)
            .flat_map(|i| self.dynamic.iter().map(move |&k| u[i * n + k]))
            .collect()
    }

    fn unpack_into(&self, y: &[T], u: &mut [T]) {
        let (n, nd) = (self.n(), self.dynamic.len());
        for i in 0..self.grid.n_points {
            for (p, &k) in self.dynamic.iter().enumerate() {
                u[i * n + k] = y[i * nd + p];
            }
        }
    }

    /// Explicit part on dynamic components, packed.
    fn explicit(&self, u: &[T], t: T) -> Vec<T> {
        let n = self.n();
        let mass = self.system.mass();
        let mut out = Vec::with_capacity(self.grid.n_points * self.dynamic.len());
        for i in 0..self.grid.n_points {
            let ui = &u[i * n..(i + 1) * n];
            let f = self.system.reaction(ui);
            let s = self.source.as_ref().map(|src| src(T::lit(self.grid.x(i)), t));
            for &k in &self.dynamic {
                let mut v = f[k] / mass[k];
                for &j in &self.dynamic {
                    v -= self.l0[(k, j)] * ui[j];
                }
                if let Some(s) = &s {
                    v += s[k] / mass[k];
                }
                out.push(v);
            }
        }
        out
    }

    fn solve_algebraic(&self, u: &mut [T]) -> Result<()> {
        if self.algebraic.is_empty() {
            return Ok(());
        }
        let n = self.n();
        let na = self.algebraic.len();
        let tol = T::lit(1e-13);
        for i in 0..self.grid.n_points {
            let ui = &mut u[i * n..(i + 1) * n];
            let mut done = false;
            for _ in 0..30 {
                let f = self.system.reaction(ui);
                let g: Vec<T> = self.algebraic.iter().map(|&k| f[k]).collect();
                let scale = T::one() + ui.iter().fold(T::zero(), |m, x| m.max(x.abs()));
                if g.iter().all(|x| x.abs() <= tol * scale) {
                    done = true;
                    break;
                }
                let j = self.system.jacobian(ui);
                let jaa = Mat::from_fn(na, na, |a, b| j[(self.algebraic[a], self.algebraic[b])]);
                let step = jaa.lu()?.solve(&g);
                for (p, &k) in self.algebraic.iter().enumerate() {
                    ui[k] -= step[p];
                }
            }
            if !done {
                let f = self.system.reaction(ui);
                let residual = self.algebraic.iter().map(|&k| f[k].to_f64_lossy().abs()).fold(0.0, f64::max);
                return Err(Error::NoConvergence { what: "algebraic components", iterations: 30, residual });
            }
        }
        Ok(())
    }

    /// One step of size `dt`.
    pub fn step(&mut self) -> Result<()> {
        let dt = self.dt;
        let y0 = self.pack(&self.state);
        let n0 = self.explicit(&self.state, self.t);
        let r = self.rhs.matvec(&y0);
        let pred: Vec<T> = r.iter().zip(&n0).map(|(a, b)| *a + dt * *b).collect();
        let ystar = self.lhs.solve(&pred);
        let mut ustar = self.state.clone();
        self.unpack_into(&ystar, &mut ustar);
        self.solve_algebraic(&mut ustar)?;
        let n1 = self.explicit(&ustar, self.t + dt);
        let half = dt * T::lit(0.5);
        let corr: Vec<T> = r.iter().zip(n0.iter().zip(&n1)).map(|(a, (b, c))| *a + half * (*b + *c)).collect();
        let y1 = self.lhs.solve(&corr);
        // ustar is reused as the write buffer; the algebraic seed is u*
        self.unpack_into(&y1, &mut ustar);
        self.solve_algebraic(&mut ustar)?;
        self.state = ustar;
        self.steps += 1;
        self.t = self.t0 + T::from_usize(self.steps).expect("step count") * dt;
        Ok(())
    }

    /// Spectral radius of the explicit Jacobian `M⁻¹(f'(u) − L₀)` on the
    /// dynamic block, over the given states.
    pub fn explicit_stiffness(&self, states: &[Vec<T>]) -> f64 {
        let mass = self.system.mass();
        let nd = self.dynamic.len();
        states
            .iter()
            .map(|u| {
                let j = self.system.jacobian(u);
                let m = Mat::from_fn(nd, nd, |a, b| {
                    let (k, l) = (self.dynamic[a], self.dynamic[b]);
                    j[(k, l)] / mass[k] - self.l0[(k, l)]
                });
                m.eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    /// Component `k` at every node.
    pub fn component(&self, k: usize) -> Vec<T> {
        self.state.iter().skip(k).step_by(self.n()).copied().collect()
    }
}

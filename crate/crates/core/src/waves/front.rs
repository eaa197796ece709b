//! Critical fronts `DQ'' + cMQ' + f(Q) = 0` on a truncated line.
//!
//! The profile is written as
//!
//! ```text
//! Q = χ₋ u₋ + χ₊ e^{νx}((x + a)u⁰ + u¹) + z / ω
//! ```
//!
//! with the far-field amplitude `a` and the weighted core `z` as unknowns.
//! `(ν, c, u⁰, u¹)` is the double root of the central difference operator
//! on the grid, so the template is annihilated by the discrete linear part
//! and `z` only carries nonlinear corrections. Equations are weighted by
//! `ω`, so Newton sees `O(1)` quantities everywhere.

use serde::{Deserialize, Serialize};

use super::tail::TailData;
use crate::banded::{solve_bordered, Banded};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::model::{chi_minus, chi_plus, Kinetics, Monomial, Numerics, RdSystem, WeightSpec};
use crate::scalar::Real;

/// Uniform grid on `[x_min, x_max]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid<T> {
    pub x_min: T,
    pub x_max: T,
    pub h: T,
}

impl<T: Real> Grid<T> {
    pub fn new(x_min: T, x_max: T, h: T) -> Result<Self> {
        if !(h > T::zero()) || !(x_max > x_min + T::lit(4.0) * h) {
            return Err(Error::InvalidModel(format!("bad grid [{x_min}, {x_max}] with h = {h}")));
        }
        let n = ((x_max - x_min) / h).round();
        if ((x_max - x_min) / h - n).abs() > T::lit(1e-9) * n {
            return Err(Error::InvalidModel(format!("grid length {} is not a multiple of h = {h}", x_max - x_min)));
        }
        Ok(Self { x_min, x_max, h })
    }

    /// `[−30, 40]` with `h = 0.02`.
    pub fn standard() -> Self {
        Self { x_min: T::lit(-30.0), x_max: T::lit(40.0), h: T::lit(0.02) }
    }

    pub fn from_numerics(n: &Numerics) -> Result<Self> {
        Self::new(T::lit(-n.l_minus), T::lit(n.l_plus), T::lit(n.h))
    }

    /// Number of nodes, endpoints included.
    pub fn len(&self) -> usize {
        ((self.x_max - self.x_min) / self.h).round().to_f64_lossy() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn x(&self, i: usize) -> T {
        self.x_min + self.h * T::from_usize_lossy(i)
    }

    pub fn nodes(&self) -> Vec<T> {
        (0..self.len()).map(|i| self.x(i)).collect()
    }

    /// Same interval with half the spacing.
    pub fn refined(&self) -> Self {
        Self { h: self.h * T::lit(0.5), ..*self }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SolveOptions<T> {
    pub grid: Grid<T>,
    /// Newton stops once the weighted sup-norm residual is below this.
    pub tol: T,
    pub max_newton: usize,
    /// `η̃` in the right boundary condition `z' + η̃ z = 0`.
    pub eta_margin: T,
    /// Continuation in `δ`: initial step and floor.
    pub step: T,
    pub floor: T,
    pub delta_max: T,
}

impl<T: Real> Default for SolveOptions<T> {
    fn default() -> Self {
        Self {
            grid: Grid::standard(),
            tol: T::lit(1e-10),
            max_newton: 40,
            eta_margin: T::lit(0.1),
            step: T::lit(0.05),
            floor: T::lit(1e-4),
            delta_max: T::lit(0.35),
        }
    }
}

impl<T: Real> SolveOptions<T> {
    pub fn from_numerics(n: &Numerics) -> Result<Self> {
        Ok(Self {
            grid: Grid::from_numerics(n)?,
            tol: T::lit(n.newton_tol),
            eta_margin: T::lit(n.eta_margin),
            step: T::lit(n.continuation_step),
            floor: T::lit(n.continuation_floor),
            ..Self::default()
        })
    }

    pub fn with_grid(mut self, grid: Grid<T>) -> Self {
        self.grid = grid;
        self
    }
}

/// A converged front on a grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FrontProfile<T> {
    pub grid: Grid<T>,
    /// `values[i]` is `Q(x_i)`.
    pub values: Vec<Vec<T>>,
    /// Weighted core `z = ω (Q − template)`.
    pub core: Vec<Vec<T>>,
    /// Speed of the discrete problem (the critical speed of the central
    /// difference operator, `c* + O(h²)`).
    pub speed: T,
    /// Linear spreading speed of the continuous problem.
    pub c_star: T,
    pub u_minus: Vec<T>,
    pub a: T,
    pub tail: TailData<T>,
    pub tail_continuous: TailData<T>,
    /// Weighted sup norm of the discrete traveling-wave residual.
    pub residual: T,
    pub newton_iterations: usize,
}

impl<T: Real> FrontProfile<T> {
    pub fn n(&self) -> usize {
        self.u_minus.len()
    }

    pub fn xi(&self) -> Vec<T> {
        self.grid.nodes()
    }

    pub fn component(&self, k: usize) -> Vec<T> {
        self.values.iter().map(|q| q[k]).collect()
    }

    pub fn weight(&self) -> WeightSpec<T> {
        WeightSpec { eta_star: self.tail.eta(), r: T::zero() }
    }

    /// `xi, Q_1, …, Q_n` rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("xi");
        for k in 0..self.n() {
            s.push_str(&format!(",Q_{}", k + 1));
        }
        s.push('\n');
        for (i, q) in self.values.iter().enumerate() {
            s.push_str(&format!("{}", self.grid.x(i).to_f64_lossy()));
            for v in q {
                s.push_str(&format!(",{}", v.to_f64_lossy()));
            }
            s.push('\n');
        }
        s
    }
}

/// Weighted sup norm of `ω (DQ'' + cMQ' + f(Q))` over interior nodes, with
/// second-order central differences; independent of the solver's unknowns.
pub fn traveling_wave_residual<T: Real>(system: &RdSystem<T>, grid: &Grid<T>, values: &[Vec<T>], c: T, eta: T) -> T {
    let w = WeightSpec { eta_star: eta, r: T::zero() };
    let (h, n) = (grid.h, system.n());
    let d = system.diffusion();
    let m = system.mass();
    let mut worst = T::zero();
    for i in 1..values.len() - 1 {
        let f = system.reaction(&values[i]);
        let om = w.omega(grid.x(i));
        for k in 0..n {
            let mut r = f[k];
            for j in 0..n {
                r += d[(k, j)] * (values[i + 1][j] - T::lit(2.0) * values[i][j] + values[i - 1][j]) / (h * h);
            }
            r += c * m[k] * (values[i + 1][k] - values[i - 1][k]) / (T::lit(2.0) * h);
            worst = worst.max((om * r).abs());
        }
    }
    worst
}

/// The discretized far-field/core problem for a fixed system.
pub(crate) struct Problem<'a, T> {
    pub system: &'a RdSystem<T>,
    pub grid: Grid<T>,
    pub tail: TailData<T>,
    pub u_minus: Vec<T>,
    pub eta_margin: T,
    omega: Vec<T>,
    chi_m: Vec<T>,
    chi_p: Vec<T>,
    phi0: Vec<Vec<T>>,
    phi1: Vec<Vec<T>>,
}

impl<'a, T: Real> Problem<'a, T> {
    pub fn new(system: &'a RdSystem<T>, grid: Grid<T>, tail: TailData<T>, u_minus: Vec<T>, eta_margin: T) -> Self {
        let w = WeightSpec { eta_star: tail.eta(), r: T::zero() };
        let xs = grid.nodes();
        let omega = xs.iter().map(|&x| w.omega(x)).collect();
        let chi_m = xs.iter().map(|&x| chi_minus(x).0).collect();
        let chi_p = xs.iter().map(|&x| chi_plus(x).0).collect();
        let e = |x: T| (tail.nu * x).exp();
        let phi0 = xs.iter().map(|&x| tail.u0.iter().map(|&u| e(x) * u).collect()).collect();
        let phi1 = xs.iter().map(|&x| tail.u1.iter().map(|&u| e(x) * u).collect()).collect();
        Self { system, grid, tail, u_minus, eta_margin, omega, chi_m, chi_p, phi0, phi1 }
    }

    fn n(&self) -> usize {
        self.system.n()
    }

    fn nodes(&self) -> usize {
        self.omega.len()
    }

    pub fn dim(&self) -> usize {
        self.n() * self.nodes()
    }

    fn is_dynamic(&self, k: usize) -> bool {
        !self.system.is_algebraic(k)
    }

    pub fn template(&self, i: usize, a: T) -> Vec<T> {
        let x = self.grid.x(i);
        (0..self.n())
            .map(|k| {
                self.chi_m[i] * self.u_minus[k] + self.chi_p[i] * ((x + a) * self.phi0[i][k] + self.phi1[i][k])
            })
            .collect()
    }

    pub fn values(&self, z: &[T], a: T) -> Vec<Vec<T>> {
        let n = self.n();
        (0..self.nodes())
            .map(|i| {
                let mut q = self.template(i, a);
                for k in 0..n {
                    q[k] += z[i * n + k] / self.omega[i];
                }
                q
            })
            .collect()
    }

    pub fn core_from_values(&self, values: &[Vec<T>], a: T) -> Vec<T> {
        let n = self.n();
        let mut z = vec![T::zero(); self.dim()];
        for (i, q) in values.iter().enumerate() {
            let t = self.template(i, a);
            for k in 0..n {
                z[i * n + k] = self.omega[i] * (q[k] - t[k]);
            }
        }
        z
    }

    /// Main residual (length `dim`) and the extra equation `z_N,0 = 0`.
    pub fn residual(&self, z: &[T], a: T) -> (Vec<T>, T) {
        let (n, nn, h) = (self.n(), self.nodes(), self.grid.h);
        let q = self.values(z, a);
        let d = self.system.diffusion();
        let m = self.system.mass();
        let c = self.tail.c;
        let mut r = vec![T::zero(); self.dim()];
        for i in 0..nn {
            let f = self.system.reaction(&q[i]);
            for k in 0..n {
                let idx = i * n + k;
                if self.is_dynamic(k) && i == 0 {
                    r[idx] = z[idx];
                    continue;
                }
                if self.is_dynamic(k) && i == nn - 1 {
                    r[idx] = (z[idx] - z[idx - n]) / h + self.eta_margin * z[idx];
                    continue;
                }
                let mut v = f[k];
                if self.is_dynamic(k) {
                    for j in 0..n {
                        v += d[(k, j)] * (q[i + 1][j] - T::lit(2.0) * q[i][j] + q[i - 1][j]) / (h * h);
                    }
                    v += c * m[k] * (q[i + 1][k] - q[i - 1][k]) / (T::lit(2.0) * h);
                }
                r[idx] = self.omega[i] * v;
            }
        }
        (r, z[(nn - 1) * n])
    }

    /// Banded Jacobian in `z`, the column `∂/∂a` and the extra row.
    pub fn jacobian(&self, z: &[T], a: T) -> (Banded<T>, Vec<T>, Vec<T>) {
        let (n, nn, h) = (self.n(), self.nodes(), self.grid.h);
        let q = self.values(z, a);
        let d = self.system.diffusion();
        let m = self.system.mass();
        let c = self.tail.c;
        let bw = 2 * n - 1;
        let mut jac = Banded::zeros(self.dim(), bw, bw);
        let mut col = vec![T::zero(); self.dim()];
        let p = |i: usize, k: usize| self.chi_p[i] * self.phi0[i][k];
        for i in 0..nn {
            let fj: Mat<T> = self.system.jacobian(&q[i]);
            for k in 0..n {
                let idx = i * n + k;
                if self.is_dynamic(k) && i == 0 {
                    jac.set(idx, idx, T::one());
                    continue;
                }
                if self.is_dynamic(k) && i == nn - 1 {
                    jac.set(idx, idx, T::one() / h + self.eta_margin);
                    jac.set(idx, idx - n, -T::one() / h);
                    continue;
                }
                let om = self.omega[i];
                let mut da = T::zero();
                for j in 0..n {
                    jac.add(idx, i * n + j, fj[(k, j)]);
                    da += fj[(k, j)] * p(i, j);
                }
                if self.is_dynamic(k) {
                    let (wl, wr) = (om / self.omega[i - 1], om / self.omega[i + 1]);
                    for j in 0..n {
                        let dk = d[(k, j)] / (h * h);
                        if dk != T::zero() {
                            jac.add(idx, (i - 1) * n + j, dk * wl);
                            jac.add(idx, i * n + j, -T::lit(2.0) * dk);
                            jac.add(idx, (i + 1) * n + j, dk * wr);
                            da += dk * (p(i + 1, j) - T::lit(2.0) * p(i, j) + p(i - 1, j));
                        }
                    }
                    let cm = c * m[k] / (T::lit(2.0) * h);
                    jac.add(idx, (i + 1) * n + k, cm * wr);
                    jac.add(idx, (i - 1) * n + k, -cm * wl);
                    da += cm * (p(i + 1, k) - p(i - 1, k));
                }
                col[idx] = om * da;
            }
        }
        let mut row = vec![T::zero(); self.dim()];
        row[(nn - 1) * n] = T::one();
        (jac, col, row)
    }

    fn norm(r: &[T], extra: T) -> T {
        r.iter().fold(extra.abs(), |m, x| m.max(x.abs()))
    }

    /// Damped Newton from `(z, a)`.
    pub fn newton(&self, mut z: Vec<T>, mut a: T, tol: T, max_it: usize) -> Result<(Vec<T>, T, usize, T)> {
        let (mut r, mut e) = self.residual(&z, a);
        let mut norm = Self::norm(&r, e);
        for it in 0..max_it {
            if norm <= tol {
                return Ok((z, a, it, norm));
            }
            let (jac, col, row) = self.jacobian(&z, a);
            let lu = jac.factor()?;
            if lu.pivot_ratio() < 1e-15 {
                return Err(Error::Numerics(format!(
                    "front Jacobian is ill-conditioned (pivot ratio {:e})",
                    lu.pivot_ratio()
                )));
            }
            let (dz, da) = solve_bordered(&lu, &col, &row, T::zero(), &r, e)?;
            let mut lambda = T::one();
            loop {
                let zt: Vec<T> = z.iter().zip(&dz).map(|(&x, &d)| x - lambda * d).collect();
                let at = a - lambda * da;
                let (rt, et) = self.residual(&zt, at);
                let nt = Self::norm(&rt, et);
                if nt.is_finite() && (nt < norm * (T::one() - T::lit(1e-4) * lambda) || nt <= tol) {
                    z = zt;
                    a = at;
                    r = rt;
                    e = et;
                    norm = nt;
                    break;
                }
                lambda *= T::lit(0.5);
                if lambda < T::lit(1.0 / 1024.0) {
                    return Err(Error::NoConvergence {
                        what: "front Newton (line search)",
                        iterations: it,
                        residual: norm.to_f64_lossy(),
                    });
                }
            }
        }
        if norm <= tol {
            return Ok((z, a, max_it, norm));
        }
        Err(Error::NoConvergence {
            what: "front Newton",
            iterations: max_it,
            residual: norm.to_f64_lossy(),
        })
    }

    /// Monotone seed `u₋ g(η(x − s))`, `g(y) = (1 + p)/(1 + p + e^y)`,
    /// `p = log(1 + e^y)`, shifted so that the tail has `b = 1`.
    pub fn seed(&self) -> (Vec<T>, T) {
        let eta = self.tail.eta();
        let um = self.u_minus[0];
        let s = -(um * eta).ln() / eta;
        let a = T::one() / eta - s - self.tail.u1[0];
        let n = self.n();
        let mut values: Vec<Vec<T>> = (0..self.nodes()).map(|i| self.template(i, a)).collect();
        for (i, q) in values.iter_mut().enumerate() {
            let y = eta * (self.grid.x(i) - s);
            let p = if y > T::lit(30.0) { y } else { y.exp().ln_1p() };
            q[0] = um * (T::one() + p) / (T::one() + p + y.exp());
        }
        let mut z = self.core_from_values(&values, a);
        for k in 0..n {
            z[k] = T::zero();
        }
        (z, a)
    }

    pub fn profile(&self, z: &[T], a: T, iterations: usize, continuous: TailData<T>) -> FrontProfile<T> {
        let n = self.n();
        let values = self.values(z, a);
        let residual = traveling_wave_residual(self.system, &self.grid, &values, self.tail.c, self.tail.eta());
        FrontProfile {
            grid: self.grid,
            core: z.chunks(n).map(|c| c.to_vec()).collect(),
            values,
            speed: self.tail.c,
            c_star: continuous.c,
            u_minus: self.u_minus.clone(),
            a,
            tail: self.tail.clone(),
            tail_continuous: continuous,
            residual,
            newton_iterations: iterations,
        }
    }
}

/// Solves for the critical front of `system` (invaded state at the origin,
/// wake state `u_minus`), optionally from a previous `(z, a)`.
pub fn solve_system<T: Real>(
    system: &RdSystem<T>,
    u_minus: &[T],
    opts: &SolveOptions<T>,
    start: Option<(&[Vec<T>], T)>,
) -> Result<FrontProfile<T>> {
    let continuous = TailData::continuous(system)?;
    let tail = TailData::discrete(system, &continuous, opts.grid.h)?;
    let prob = Problem::new(system, opts.grid, tail, u_minus.to_vec(), opts.eta_margin);
    let (z, a) = match start {
        Some((core, a)) if core.len() == prob.nodes() => (core.concat(), a),
        _ => prob.seed(),
    };
    let (z, a, it, _) = prob.newton(z, a, opts.tol, opts.max_newton)?;
    Ok(prob.profile(&z, a, it, continuous))
}

/// `u_t = u_xx + u − u²`.
pub fn kpp_system<T: Real>() -> RdSystem<T> {
    let k = Kinetics::new(vec![vec![
        Monomial::new(T::one(), 0, vec![1]),
        Monomial::new(-T::one(), 0, vec![2]),
    ]])
    .expect("valid kinetics");
    RdSystem::new(Mat::identity(1), k, T::zero()).expect("valid system")
}

/// The critical front of `q'' + 2q' + q − q² = 0`, normalized to `b = 1`.
pub fn kpp_front<T: Real>(grid: Grid<T>) -> Result<FrontProfile<T>> {
    if grid.x_max < T::lit(20.0) {
        return Err(Error::InvalidModel(format!("right end {} < 20 is too short for the tail", grid.x_max)));
    }
    let opts = SolveOptions { grid, ..SolveOptions::default() };
    solve_system(&kpp_system(), &[T::one()], &opts, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kpp_converges() {
        let p = kpp_front::<f64>(Grid::standard()).unwrap();
        assert!(p.residual < 1e-9, "{}", p.residual);
        assert!((p.values[0][0] - 1.0).abs() < 1e-14);
        assert!(p.values.last().unwrap()[0].abs() < 1e-14);
        // monotone decreasing
        assert!(p.values.windows(2).all(|w| w[1][0] <= w[0][0] + 1e-14));
    }

    #[test]
    fn jacobian_matches_differences() {
        let sys = kpp_system::<f64>();
        let grid = Grid::new(-6.0, 8.0, 0.1).unwrap();
        let cont = TailData::continuous(&sys).unwrap();
        let tail = TailData::discrete(&sys, &cont, 0.1).unwrap();
        let prob = Problem::new(&sys, grid, tail, vec![1.0], 0.1);
        let (z, a) = prob.seed();
        let (jac, col, _) = prob.jacobian(&z, a);
        let dense = jac.to_dense();
        let eps = 1e-6;
        for j in [0, 5, 40, 70, 139, 140] {
            let mut zp = z.clone();
            let mut zm = z.clone();
            zp[j] += eps;
            zm[j] -= eps;
            let (rp, _) = prob.residual(&zp, a);
            let (rm, _) = prob.residual(&zm, a);
            for i in 0..z.len() {
                let fd = (rp[i] - rm[i]) / (2.0 * eps);
                assert!((fd - dense[i][j]).abs() < 1e-5 * (1.0 + fd.abs()), "({i},{j}) {fd} {}", dense[i][j]);
            }
        }
        let (rp, _) = prob.residual(&z, a + eps);
        let (rm, _) = prob.residual(&z, a - eps);
        for i in 0..z.len() {
            let fd = (rp[i] - rm[i]) / (2.0 * eps);
            assert!((fd - col[i]).abs() < 1e-5 * (1.0 + fd.abs()), "a: {i} {fd} {}", col[i]);
        }
    }
}

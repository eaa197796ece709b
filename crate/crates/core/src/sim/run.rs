//! Invasion runs from steep data and their observables.

use serde::{Deserialize, Serialize};

use super::stepper::{Grid1D, Stepper};
use super::tracking::{fit_exponential_rate, fit_speed_and_logshift, front_position, SpeedFit};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::model::{Kinetics, Monomial, NormalFormModel, RdSystem, WeightSpec};
use crate::scalar::Real;
use crate::waves::{selected_state_of, FrontProfile};

/// Initial perturbation of the invaded state `u₊`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum InitialData {
    /// `u₊ + A b(x) e₁` with `b` the C² bump `(1 − s²)³` supported on
    /// `[x0 − width, x0]`.
    SteepBump { amplitude: f64, width: f64, x0: f64 },
    /// `u₊ + A e₁` for `x ≤ x0`.
    Step { amplitude: f64, x0: f64 },
    /// Full states at the nodes `x`, linearly interpolated; the first row
    /// continues to the left and `u₊` lies to the right.
    Table { x: Vec<f64>, values: Vec<Vec<f64>> },
}

impl Default for InitialData {
    fn default() -> Self {
        InitialData::SteepBump { amplitude: 0.5, width: 10.0, x0: 0.0 }
    }
}

impl InitialData {
    /// Right edge of the support (`+∞` for tables).
    pub fn support_edge(&self) -> f64 {
        match self {
            InitialData::SteepBump { x0, .. } | InitialData::Step { x0, .. } => *x0,
            InitialData::Table { .. } => f64::INFINITY,
        }
    }

    pub fn from_profile<T: Real>(profile: &FrontProfile<T>) -> Self {
        InitialData::Table {
            x: profile.xi().iter().map(|x| x.to_f64_lossy()).collect(),
            values: profile.values.iter().map(|q| q.iter().map(|v| v.to_f64_lossy()).collect()).collect(),
        }
    }

    /// State at `x` given the invaded state.
    pub fn eval(&self, x: f64, u_plus: &[f64]) -> Vec<f64> {
        let mut u = u_plus.to_vec();
        match self {
            InitialData::SteepBump { amplitude, width, x0 } => {
                let s = (x - (x0 - 0.5 * width)) / (0.5 * width);
                if s.abs() < 1.0 {
                    u[0] += amplitude * (1.0 - s * s).powi(3);
                }
            }
            InitialData::Step { amplitude, x0 } => {
                if x <= *x0 {
                    u[0] += amplitude;
                }
            }
            InitialData::Table { x: xs, values } => {
                if xs.is_empty() {
                    return u;
                }
                let k = xs.partition_point(|&p| p <= x);
                u = if k == 0 {
                    values[0].clone()
                } else if k == xs.len() {
                    if x > xs[k - 1] {
                        return u;
                    }
                    values[k - 1].clone()
                } else {
                    let w = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
                    values[k - 1].iter().zip(&values[k]).map(|(a, b)| a + w * (b - a)).collect()
                };
            }
        }
        u
    }

    fn rescaled(&self, space: f64, amplitude: f64) -> Result<Self> {
        Ok(match self {
            InitialData::SteepBump { amplitude: a, width, x0 } => {
                InitialData::SteepBump { amplitude: a * amplitude, width: width * space, x0: x0 * space }
            }
            InitialData::Step { amplitude: a, x0 } => InitialData::Step { amplitude: a * amplitude, x0: x0 * space },
            InitialData::Table { .. } => {
                return Err(Error::Unsupported("tabulated data cannot be mapped to original units".into()))
            }
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SimOptions {
    /// Speed of the comoving frame.
    pub frame_speed: f64,
    pub sample_interval: f64,
    /// Tracking level for the first component; default halfway between
    /// `u₊` and `u₋`.
    pub level: Option<f64>,
    /// Distance from the right boundary at which the run stops.
    pub buffer: f64,
    pub blowup_factor: f64,
    /// Regression window; default `[T/2, T]`.
    pub fit_window: Option<(f64, f64)>,
    /// Front for the weighted error, on the same rescaled system.
    #[serde(skip)]
    pub profile: Option<FrontProfile<f64>>,
    /// `ξ`-window of the weighted error.
    pub weighted_window: (f64, f64),
    /// Keep the full state every this many time units.
    pub snapshot_every: Option<f64>,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            frame_speed: 0.0,
            sample_interval: 1.0,
            level: None,
            buffer: 50.0,
            blowup_factor: 10.0,
            fit_window: None,
            profile: None,
            weighted_window: (-20.0, 10.0),
            snapshot_every: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    /// Node-major, `n` values per node.
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    pub steps: usize,
    /// `min (u₁ − u₊₁)` over the run (positivity of the first component).
    pub min_first: f64,
    pub max_abs: f64,
    /// `max |u_k − u₊_k|` over `k ≥ 2`.
    pub v_sup: f64,
    /// Spectral radius of the explicit Jacobian times `dt`.
    pub explicit_cfl: f64,
    /// `σ` non-decreasing after the first quarter of the run.
    pub monotone: bool,
    /// Smallest distance from the front to the right boundary.
    pub buffer_distance: f64,
    pub aborted: Option<String>,
    pub abort_time: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SimulationRun {
    pub grid: Grid1D,
    pub dt: f64,
    pub t_end: f64,
    pub frame_speed: f64,
    pub level: f64,
    pub u_plus: Vec<f64>,
    pub u_minus: Vec<f64>,
    pub times: Vec<f64>,
    pub sigma: Vec<Option<f64>>,
    pub c_inst: Vec<Option<f64>>,
    pub weighted_error: Vec<Option<f64>>,
    pub weighted_window: (f64, f64),
    pub fitted: Option<SpeedFit>,
    pub diagnostics: Diagnostics,
    #[serde(skip)]
    pub snapshots: Vec<Snapshot>,
    #[serde(skip)]
    pub final_state: Vec<f64>,
}

impl SimulationRun {
    pub fn n(&self) -> usize {
        self.u_plus.len()
    }

    /// `t,sigma,c_inst,weighted_error`; undefined entries are empty.
    pub fn to_csv(&self) -> String {
        let f = |v: &Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
        let mut s = String::from("t,sigma,c_inst,weighted_error\n");
        for i in 0..self.times.len() {
            s.push_str(&format!(
                "{},{},{},{}\n",
                self.times[i],
                f(&self.sigma[i]),
                f(&self.c_inst[i]),
                f(&self.weighted_error[i])
            ));
        }
        s
    }

    /// `x,u_1,…,u_n` for a stored state.
    pub fn snapshot_csv(&self, values: &[f64]) -> String {
        let n = self.n();
        let mut s = String::from("x");
        for k in 0..n {
            s.push_str(&format!(",u_{}", k + 1));
        }
        s.push('\n');
        for i in 0..self.grid.n_points {
            s.push_str(&format!("{}", self.grid.x(i)));
            for v in &values[i * n..(i + 1) * n] {
                s.push_str(&format!(",{v}"));
            }
            s.push('\n');
        }
        s
    }

    /// Position in the lab frame.
    pub fn lab_sigma(&self, i: usize) -> Option<f64> {
        self.sigma[i].map(|s| s + self.frame_speed * self.times[i])
    }

    pub fn fit(&self, window: (f64, f64)) -> Result<SpeedFit> {
        let lab: Vec<Option<f64>> = (0..self.times.len()).map(|i| self.lab_sigma(i)).collect();
        fit_speed_and_logshift(&self.times, &lab, window)
    }

    pub fn snapshot_at(&self, t: f64) -> Option<&Snapshot> {
        self.snapshots.iter().find(|s| (s.t - t).abs() <= 1e-9 * (1.0 + t.abs()))
    }
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Cubic Lagrange interpolation of component `k` at `x`.
fn interp_cubic(values: &[f64], n: usize, k: usize, grid: &Grid1D, x: f64) -> Option<f64> {
    let s = (x - grid.x_min) / grid.h;
    if s < 0.0 || s > (grid.n_points - 1) as f64 {
        return None;
    }
    let i = (s.floor() as isize - 1).clamp(0, grid.n_points as isize - 4) as usize;
    let t = s - i as f64;
    let mut acc = 0.0;
    for a in 0..4 {
        let mut w = 1.0;
        for b in 0..4 {
            if a != b {
                w *= (t - b as f64) / (a as f64 - b as f64);
            }
        }
        acc += w * values[(i + a) * n + k];
    }
    Some(acc)
}

/// `sup_ξ |ρ_{0,−1}(ξ) ω_*(ξ) [u(ξ + σ − ξ_q + s) − q(ξ)]|` over profile
/// nodes in `window`, minimized over one residual translation `s`; `ξ_q` is
/// the crossing of `level` by the profile.
pub fn weighted_error_of_state(
    state: &[f64],
    grid: &Grid1D,
    sigma: f64,
    profile: &FrontProfile<f64>,
    level: f64,
    window: (f64, f64),
) -> Result<f64> {
    let n = profile.n();
    let q0 = profile.component(0);
    let xi_q = front_position(&q0, profile.grid.x_min, profile.grid.h, level)
        .ok_or_else(|| Error::Numerics("profile does not cross the tracking level".into()))?;
    let w = WeightSpec::new(profile.tail.eta(), -1.0)?;
    let nodes: Vec<(f64, f64, &Vec<f64>)> = (0..profile.grid.len())
        .map(|i| profile.grid.x(i))
        .zip(&profile.values)
        .filter(|(x, _)| *x >= window.0 && *x <= window.1)
        .map(|(x, q)| (x, w.rho(x) * w.omega(x), q))
        .collect();
    if nodes.is_empty() {
        return Err(Error::Numerics(format!("window [{}, {}] misses the profile grid", window.0, window.1)));
    }
    let err = |s: f64| -> Option<f64> {
        let mut m: f64 = 0.0;
        for &(x, wt, q) in &nodes {
            for k in 0..n {
                let u = interp_cubic(state, n, k, grid, x + sigma - xi_q + s)?;
                m = m.max((wt * (u - q[k])).abs());
            }
        }
        Some(m)
    };
    let mismatch = || Error::Numerics("weighted window leaves the simulation domain".into());
    // coarse scan, then golden section around the best sample
    let span = 1.0;
    let m = 40;
    let mut best = (0.0, f64::INFINITY);
    for j in 0..=m {
        let s = -span + 2.0 * span * j as f64 / m as f64;
        let e = err(s).ok_or_else(mismatch)?;
        if e < best.1 {
            best = (s, e);
        }
    }
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (best.0 - 2.0 * span / m as f64, best.0 + 2.0 * span / m as f64);
    for _ in 0..40 {
        let (c, d) = (b - g * (b - a), a + g * (b - a));
        let (ec, ed) = (err(c).ok_or_else(mismatch)?, err(d).ok_or_else(mismatch)?);
        if ec < ed {
            b = d;
        } else {
            a = c;
        }
    }
    let e = err(0.5 * (a + b)).ok_or_else(mismatch)?;
    Ok(e.min(best.1))
}

/// Weighted error of a run at a recorded snapshot time `t`.
pub fn weighted_profile_error(run: &SimulationRun, profile: &FrontProfile<f64>, t: f64) -> Result<f64> {
    let snap = run
        .snapshot_at(t)
        .ok_or_else(|| Error::Numerics(format!("no snapshot recorded at t = {t}")))?;
    let i = run
        .times
        .iter()
        .position(|&s| (s - t).abs() <= 1e-9 * (1.0 + t.abs()))
        .ok_or_else(|| Error::Numerics(format!("t = {t} not sampled")))?;
    let sigma = run.sigma[i].ok_or_else(|| Error::Numerics(format!("no front at t = {t}")))?;
    weighted_error_of_state(&snap.values, &run.grid, sigma, profile, run.level, run.weighted_window)
}

/// Runs `system` from `initial` and tracks the first component.
#[allow(clippy::too_many_arguments)]
pub fn simulate<T: Real>(
    system: &RdSystem<T>,
    u_plus: &[f64],
    u_minus: &[f64],
    grid: Grid1D,
    t_end: f64,
    dt: f64,
    initial: &InitialData,
    opts: &SimOptions,
) -> Result<SimulationRun> {
    let n = system.n();
    if u_plus.len() != n || u_minus.len() != n {
        return Err(Error::Dimension(format!("states must have {n} components")));
    }
    if !(t_end > 0.0) || !(dt > 0.0) {
        return Err(Error::InvalidModel(format!("need T > 0 and dt > 0, got {t_end}, {dt}")));
    }
    let lit = |v: &[f64]| v.iter().map(|&x| T::lit(x)).collect::<Vec<T>>();
    let mut stepper = Stepper::new(system.clone(), grid, T::lit(dt), T::lit(opts.frame_speed), &lit(u_plus))?;
    let cfl = stepper.explicit_stiffness(&[lit(u_plus), lit(u_minus)]) * dt;
    if cfl >= 0.5 {
        return Err(Error::Numerics(format!(
            "dt = {dt} too large for the explicit reaction (Lipschitz bound times dt = {cfl:.3}); reduce dt"
        )));
    }
    let u0: Vec<f64> = (0..grid.n_points).flat_map(|i| initial.eval(grid.x(i), u_plus)).collect();
    let expected = sup(u_plus).max(sup(u_minus)).max(sup(&u0)).max(1e-300);
    stepper.set_state(lit(&u0), T::zero())?;
    let level = opts.level.unwrap_or(0.5 * (u_plus[0] + u_minus[0]));
    let steps = (t_end / dt).round().max(1.0) as usize;
    let every = ((opts.sample_interval / dt).round() as usize).max(1);
    let snap_every = opts.snapshot_every.map(|s| ((s / dt).round() as usize).max(1));
    let mut run = SimulationRun {
        grid,
        dt,
        t_end: steps as f64 * dt,
        frame_speed: opts.frame_speed,
        level,
        u_plus: u_plus.to_vec(),
        u_minus: u_minus.to_vec(),
        times: Vec::new(),
        sigma: Vec::new(),
        c_inst: Vec::new(),
        weighted_error: Vec::new(),
        weighted_window: opts.weighted_window,
        fitted: None,
        diagnostics: Diagnostics {
            min_first: f64::INFINITY,
            explicit_cfl: cfl,
            buffer_distance: f64::INFINITY,
            ..Diagnostics::default()
        },
        snapshots: Vec::new(),
        final_state: Vec::new(),
    };
    for step in 0..=steps {
        if step > 0 {
            stepper.step()?;
        }
        if step % every != 0 && step != steps {
            continue;
        }
        let t = step as f64 * dt;
        let u: Vec<f64> = stepper.state().iter().map(|x| x.to_f64_lossy()).collect();
        let d = &mut run.diagnostics;
        d.steps = step;
        let mut bad = false;
        for i in 0..grid.n_points {
            let ui = &u[i * n..(i + 1) * n];
            bad |= ui.iter().any(|x| !x.is_finite());
            d.max_abs = d.max_abs.max(sup(ui));
            d.min_first = d.min_first.min(ui[0] - u_plus[0]);
            for k in 1..n {
                d.v_sup = d.v_sup.max((ui[k] - u_plus[k]).abs());
            }
        }
        if bad || d.max_abs > opts.blowup_factor * expected {
            d.aborted = Some(format!("blow-up: sup |u| = {:e} exceeds {} x {expected}", d.max_abs, opts.blowup_factor));
            d.abort_time = Some(t);
            run.final_state = u;
            break;
        }
        let first: Vec<f64> = u.iter().step_by(n).copied().collect();
        let sigma = front_position(&first, grid.x_min, grid.h, level);
        let werr = match (&opts.profile, sigma) {
            (Some(p), Some(s)) => weighted_error_of_state(&u, &grid, s, p, level, opts.weighted_window).ok(),
            _ => None,
        };
        run.times.push(t);
        run.sigma.push(sigma);
        run.weighted_error.push(werr);
        if snap_every.is_some_and(|k| step % k == 0) {
            run.snapshots.push(Snapshot { t, values: u.clone() });
        }
        if let Some(s) = sigma {
            let room = grid.x_max - s;
            let d = &mut run.diagnostics;
            d.buffer_distance = d.buffer_distance.min(room);
            if room < opts.buffer {
                d.aborted = Some(format!("front at {s} entered the {}-unit right buffer", opts.buffer));
                d.abort_time = Some(t);
                run.final_state = u;
                break;
            }
        }
        if step == steps {
            run.final_state = u;
        }
    }
    finish(&mut run, opts);
    Ok(run)
}

fn finish(run: &mut SimulationRun, opts: &SimOptions) {
    let m = run.times.len();
    let lab: Vec<Option<f64>> = (0..m).map(|i| run.lab_sigma(i)).collect();
    run.c_inst = (0..m)
        .map(|i| {
            let (a, b) = (i.saturating_sub(1), (i + 1).min(m - 1));
            match (lab[a], lab[b]) {
                (Some(x), Some(y)) if b > a => Some((y - x) / (run.times[b] - run.times[a])),
                _ => None,
            }
        })
        .collect();
    let t0 = 0.25 * run.t_end;
    let late: Vec<f64> = (0..m).filter(|&i| run.times[i] >= t0).filter_map(|i| lab[i]).collect();
    run.diagnostics.monotone = late.windows(2).all(|w| w[1] >= w[0] - 1e-9);
    let window = opts.fit_window.unwrap_or((0.5 * run.t_end, run.t_end));
    run.fitted = fit_speed_and_logshift(&run.times, &lab, window).ok();
}

/// Invaded state `0` and selected state of the rescaled system at `delta`.
fn rescaled_states<T: Real>(model: &NormalFormModel<T>, delta: T) -> Result<(RdSystem<T>, Vec<f64>, Vec<f64>)> {
    let scaled = model.scaled_system(delta)?;
    let wake = selected_state_of(&scaled)?;
    let u_minus = wake.value.iter().map(|x| x.to_f64_lossy()).collect();
    Ok((scaled.system, vec![0.0; model.n()], u_minus))
}

/// Invasion run of the rescaled system at `delta` with default options.
pub fn run_invasion<T: Real>(
    model: &NormalFormModel<T>,
    delta: T,
    grid: Grid1D,
    t_end: f64,
    dt: f64,
    initial: &InitialData,
) -> Result<SimulationRun> {
    run_invasion_with(model, delta, grid, t_end, dt, initial, &SimOptions::default())
}

pub fn run_invasion_with<T: Real>(
    model: &NormalFormModel<T>,
    delta: T,
    grid: Grid1D,
    t_end: f64,
    dt: f64,
    initial: &InitialData,
    opts: &SimOptions,
) -> Result<SimulationRun> {
    let (sys, up, um) = rescaled_states(model, delta)?;
    simulate(&sys, &up, &um, grid, t_end, dt, initial, opts)
}

/// Invasion run of the system in original variables at the model's `μ`.
/// Grid, times and data are given in rescaled units and mapped with the
/// normal-form exponents; the returned run is in original units, with
/// states measured from the invaded state.
pub fn run_unscaled<T: Real>(
    model: &NormalFormModel<T>,
    grid: Grid1D,
    t_end: f64,
    dt: f64,
    initial: &InitialData,
    opts: &SimOptions,
) -> Result<SimulationRun> {
    let mu = model.mu.to_f64_lossy();
    if !(mu > 0.0) {
        return Err(Error::InvalidModel(format!("mu must be positive, got {mu}")));
    }
    let kind = model.kind;
    let space = mu.powf(-kind.space_exponent());
    let time = mu.powf(-kind.time_exponent());
    let amp = mu.powf(kind.amplitude_exponent());
    let scaled = model.scaled_system(model.delta())?;
    let wake = selected_state_of(&scaled)?;
    let sys = model.unscaled_system()?;
    let raw = |v: &[T]| -> Vec<T> {
        v.iter().zip(&scaled.shift).map(|(&x, &s)| (x + s) * T::lit(amp)).collect()
    };
    let zero = vec![T::zero(); model.n()];
    let tol = T::lit(1e-13 * amp.max(1e-3));
    let up = sys.equilibrium(&raw(&zero), tol)?;
    let um = sys.equilibrium(&raw(&wake.value), tol)?;
    // work in u − u₊ so that the invaded state is an exact equilibrium;
    // otherwise its roundoff residual grows everywhere at once
    let sys = sys.with_kinetics(sys.kinetics().translate(&up).without_constant_terms())?;
    let um: Vec<f64> = um.iter().zip(&up).map(|(a, b)| (*a - *b).to_f64_lossy()).collect();
    let up = vec![0.0; model.n()];
    let g = Grid1D::new(grid.x_min * space, grid.x_max * space, grid.h * space)?;
    let mut o = opts.clone();
    o.sample_interval *= time;
    o.buffer *= space;
    o.fit_window = opts.fit_window.map(|(a, b)| (a * time, b * time));
    o.frame_speed *= space / time;
    o.level = opts.level.map(|l| l * amp);
    o.profile = None;
    o.snapshot_every = opts.snapshot_every.map(|s| s * time);
    simulate(&sys, &up, &um, g, t_end * time, dt * time, &initial.rescaled(space, amp)?, &o)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GrowthFit {
    pub rate: f64,
    pub frame_speed: f64,
    pub window: (f64, f64),
    pub times: Vec<f64>,
    /// `sup_{|x| ≤ L} |u|` at each sample.
    pub sup: Vec<f64>,
}

/// Exponential growth rate of `sup_{|x| ≤ L}|u|` over `[T/2, T]` for the
/// linearization of `system` at `0`, seen in the frame of speed `c`.
pub fn linear_pointwise_growth<T: Real>(system: &RdSystem<T>, c: f64, l_window: f64, t_end: f64) -> Result<GrowthFit> {
    let n = system.n();
    let zero = vec![T::zero(); n];
    let j: Mat<T> = system.jacobian(&zero);
    let mut kin = Kinetics::zero(n);
    for a in 0..n {
        for b in 0..n {
            if j[(a, b)] != T::zero() {
                let mut p = vec![0; n];
                p[b] = 1;
                kin.push(a, Monomial::new(j[(a, b)], 0, p));
            }
        }
    }
    let lin = system.with_kinetics(kin)?;
    // leave room for the left-moving packet and keep the constant
    // no-flux mode of the right boundary far below the window
    let margin = l_window + 40.0;
    let x_lo = -(c.abs() + 2.0) * t_end - margin;
    let x_hi = 0.5 * c.max(0.0) * t_end + margin;
    let grid = Grid1D::new(x_lo, x_hi, 0.1)?;
    let dt = 0.02;
    let mut stepper = Stepper::new(lin, grid, T::lit(dt), T::lit(c), &zero)?;
    let mut u0 = vec![T::zero(); n * grid.n_points];
    for i in 0..grid.n_points {
        let s = grid.x(i);
        if s.abs() < 1.0 {
            u0[i * n] = T::lit((1.0 - s * s).powi(3));
        }
    }
    stepper.set_state(u0, T::zero())?;
    let steps = (t_end / dt).round() as usize;
    let every = (0.5 / dt).round() as usize;
    let (mut times, mut sups) = (Vec::new(), Vec::new());
    for step in 1..=steps {
        stepper.step()?;
        if step % every == 0 {
            let m = (0..grid.n_points)
                .filter(|&i| grid.x(i).abs() <= l_window)
                .flat_map(|i| stepper.state()[i * n..(i + 1) * n].iter().map(|x| x.to_f64_lossy().abs()))
                .fold(0.0, f64::max);
            times.push(step as f64 * dt);
            sups.push(m);
        }
    }
    let window = (0.5 * t_end, t_end);
    let rate = fit_exponential_rate(&times, &sups, window)?;
    Ok(GrowthFit { rate, frame_speed: c, window, times, sup: sups })
}

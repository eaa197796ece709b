//! Point spectrum of the weighted linearization about a front.

mod eigen;
mod evans;
mod operator;
mod zero_mode;

pub use eigen::{dense_spectrum, eigenpair_near, eigenvalues_in_region, interior_mass, EigenScan, Eigenpair, SpectralRegion};
pub use evans::{
    evans_minimum, evans_scan, evans_zero, far_field_exponent, EvansContext, EvansSample, EvansScan, CONTOUR_OFFSET,
};
pub use operator::{norm, WeightedOperator, C64};
pub use zero_mode::{zero_mode_check, ZeroModeReport, ZERO_MODE_THRESHOLD};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{NormalFormModel, Numerics, RdSystem};
use crate::scalar::Real;
use crate::status::Status;
use crate::waves::{solve_front_with, FrontProfile, SolveOptions};

/// `𝓛` about `profile`; alias of [`WeightedOperator::assemble`].
pub fn assemble_weighted_linearization<T: Real>(
    profile: &FrontProfile<T>,
    system: &RdSystem<T>,
    eta_margin: f64,
) -> Result<WeightedOperator> {
    WeightedOperator::assemble(profile, system, eta_margin)
}

/// `E(γ)` for `op` in the gauge of `ctx`.
pub fn evans_evaluate(ctx: &EvansContext, op: &WeightedOperator, gamma: C64) -> Result<EvansSample> {
    ctx.evaluate(op, gamma)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectralOptions {
    pub region: SpectralRegion,
    /// Largest number of eigenvalues reported.
    pub count: usize,
    pub gamma0: f64,
    pub eta_margin: f64,
    /// Samples on the real segment `[0, γ₀]`.
    pub real_samples: usize,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self::from_numerics(&Numerics::default()).expect("default region is valid")
    }
}

impl SpectralOptions {
    pub fn from_numerics(n: &Numerics) -> Result<Self> {
        Ok(Self {
            region: SpectralRegion::new(n.region, n.origin_exclusion)?,
            count: 16,
            gamma0: n.gamma0,
            eta_margin: n.eta_margin,
            real_samples: 200,
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PointSpectrumReport {
    pub eigen: EigenScan,
    pub evans: EvansScan,
    /// `E` on `[0, γ₀]`.
    pub real_segment: Vec<EvansSample>,
    /// Sign changes of `Re E` on the real segment.
    pub real_zeros: usize,
    pub e00: C64,
    pub zero_mode: ZeroModeReport,
    pub status: Status,
    pub notes: Vec<String>,
}

impl PointSpectrumReport {
    /// Evans samples as CSV `re_gamma,im_gamma,re_e,im_e`.
    pub fn evans_csv(&self) -> String {
        let mut s = String::from("re_gamma,im_gamma,re_e,im_e\n");
        for e in self.real_segment.iter().chain(&self.evans.contour) {
            s.push_str(&format!("{},{},{},{}\n", e.gamma.re, e.gamma.im, e.value.re, e.value.im));
        }
        s
    }
}

/// No eigenvalues in the scan region, no zeros of `E` in the half disk,
/// `E(0) ≠ 0` and no bounded kernel.
pub fn verify_hyp4(op: &WeightedOperator, ctx: &EvansContext, opts: &SpectralOptions) -> Result<PointSpectrumReport> {
    let mut notes = Vec::new();
    let eigen = eigenvalues_in_region(op, &opts.region, opts.count)?;
    for e in &eigen.eigenvalues {
        notes.push(format!("eigenvalue {:.6} (residual {:.1e})", e.lambda, e.residual));
    }
    if eigen.stagnated > 0 {
        notes.push(format!("{} of {} shifts stagnated", eigen.stagnated, eigen.shifts));
    }
    let evans = evans_scan(ctx, op, opts.gamma0)?;
    if evans.winding != 0 {
        notes.push(format!("E has {} zero(s) in the half disk", evans.winding));
    }
    let m = opts.real_samples.max(2);
    let real_segment = (0..=m)
        .into_par_iter()
        .map(|j| ctx.evaluate(op, C64::new(opts.gamma0 * j as f64 / m as f64, 0.0)))
        .collect::<Result<Vec<_>>>()?;
    let real_zeros = real_segment.windows(2).filter(|w| w[0].value.re * w[1].value.re <= 0.0).count();
    let e00 = evans.at_origin.value;
    if e00.norm() <= 1e-3 {
        notes.push(format!("|E(0)| = {:.2e} is not bounded away from 0", e00.norm()));
    }
    let zero_mode = zero_mode_check(op);
    if !zero_mode.status.is_pass() {
        notes.push(format!("bounded kernel: principal angle {:.2e}", zero_mode.angle));
    }
    let clear = eigen.eigenvalues.is_empty() && evans.winding == 0 && real_zeros == 0 && e00.norm() > 1e-3;
    let status = if !clear {
        Status::Fail
    } else {
        zero_mode.status
    };
    Ok(PointSpectrumReport { eigen, evans, real_segment, real_zeros, e00, zero_mode, status, notes })
}

/// Fronts at `0` and `delta`, the Evans context at `0`, and the report at
/// `delta`.
pub fn point_spectrum(
    model: &NormalFormModel<f64>,
    delta: f64,
    solve: &SolveOptions<f64>,
    opts: &SpectralOptions,
) -> Result<PointSpectrumReport> {
    let front0 = solve_front_with(model, 0.0, solve)?;
    let sys0 = model.scaled_system(0.0)?.system;
    let op0 = WeightedOperator::assemble(&front0.profile, &sys0, opts.eta_margin)?;
    let ctx = EvansContext::new(&op0, opts.gamma0)?;
    if delta == 0.0 {
        return verify_hyp4(&op0, &ctx, opts);
    }
    let front = solve_front_with(model, delta, solve)?;
    let sys = model.scaled_system(delta)?.system;
    let op = WeightedOperator::assemble(&front.profile, &sys, opts.eta_margin)?;
    verify_hyp4(&op, &ctx, opts)
}

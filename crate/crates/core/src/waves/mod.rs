//! Selected states, critical fronts and their tail asymptotics.

mod fit;
mod front;
mod selected;
mod tail;

pub use fit::{
    fit_asymptotics, fit_exponential_tail, fit_left, fit_left_tail, fit_right_tail, verify_hyp2, Hyp2Report, LeftFit,
    TailFit,
};
pub use front::{kpp_front, kpp_system, solve_system, traveling_wave_residual, FrontProfile, Grid, SolveOptions};
pub use selected::{selected_state, selected_state_from, selected_state_of, SelectedState};
pub use tail::TailData;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{NormalFormModel, ScaledSystem};
use crate::scalar::Real;

/// A front of a rescaled normal form together with its continuation path.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FrontSolution<T> {
    pub delta: T,
    pub profile: FrontProfile<T>,
    /// `a(δ)`.
    pub a: T,
    /// Profile in the rescaled variables before the translation of the
    /// invaded state: first component `U_fr`, the rest `V_fr`.
    pub u_fr: Vec<T>,
    pub v_fr: Vec<Vec<T>>,
    /// `(δ, a)` at every accepted continuation step.
    pub path: Vec<(T, T)>,
}

impl<T: Real> FrontSolution<T> {
    /// `max |V_fr|`.
    pub fn v_sup(&self) -> T {
        self.v_fr
            .iter()
            .flat_map(|v| v.iter())
            .fold(T::zero(), |m, x| m.max(x.abs()))
    }
}

fn solve_at<T: Real>(
    scaled: &ScaledSystem<T>,
    opts: &SolveOptions<T>,
    wake_seed: &[T],
    start: Option<(&[Vec<T>], T)>,
) -> Result<FrontProfile<T>> {
    let wake = selected_state_from(scaled, wake_seed)?;
    if !wake.status.is_pass() {
        return Err(Error::Numerics(format!(
            "selected state {:?} is not stable (max Re {})",
            wake.value.iter().map(|x| x.to_f64_lossy()).collect::<Vec<_>>(),
            wake.max_real_part
        )));
    }
    solve_system(&scaled.system, &wake.value, opts, start)
}

/// Front of `model` at `delta`, continued from `δ = 0`.
pub fn solve_front<T: Real>(model: &NormalFormModel<T>, delta: T) -> Result<FrontSolution<T>> {
    solve_front_with(model, delta, &SolveOptions::default())
}

pub fn solve_front_with<T: Real>(model: &NormalFormModel<T>, delta: T, opts: &SolveOptions<T>) -> Result<FrontSolution<T>> {
    if delta.abs() > opts.delta_max {
        return Err(Error::InvalidModel(format!(
            "|δ| = {} exceeds the validated range {}",
            delta.abs(),
            opts.delta_max
        )));
    }
    let scaled0 = model.scaled_system(T::zero())?;
    let mut profile = solve_at(&scaled0, opts, &scaled0.selected_state_seed(), None)?;
    let mut path = vec![(T::zero(), profile.a)];
    let mut current = T::zero();
    let dir = if delta < T::zero() { -T::one() } else { T::one() };
    let mut step = opts.step;
    let mut scaled = scaled0;
    while (delta - current).abs() > T::zero() {
        let next = if (delta - current).abs() <= step { delta } else { current + dir * step };
        let attempt = model.scaled_system(next).and_then(|s| {
            let seed = profile.u_minus.clone();
            let p = solve_at(&s, opts, &seed, Some((&profile.core, profile.a)))?;
            Ok((s, p))
        });
        match attempt {
            Ok((s, p)) => {
                current = next;
                profile = p;
                scaled = s;
                path.push((current, profile.a));
                step = (step * T::lit(2.0)).min(opts.step);
            }
            Err(_) => {
                step *= T::lit(0.5);
                if step < opts.floor {
                    return Err(Error::Continuation {
                        at: next.to_f64_lossy(),
                        last_good: current.to_f64_lossy(),
                    });
                }
            }
        }
    }
    let unshifted: Vec<Vec<T>> = profile
        .values
        .iter()
        .map(|q| q.iter().zip(&scaled.shift).map(|(&x, &s)| x + s).collect())
        .collect();
    let u_fr = unshifted.iter().map(|q| q[0]).collect();
    let v_fr = unshifted.iter().map(|q| q[1..].to_vec()).collect();
    Ok(FrontSolution { delta, a: profile.a, profile, u_fr, v_fr, path })
}

//! Front tracking and the regression `σ(t) ≈ c t + B log t + x∞`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rightmost downward crossing of `level` by `u` sampled at `x_min + ih`,
/// by linear interpolation. `None` when `u` never crosses.
pub fn front_position(u: &[f64], x_min: f64, h: f64, level: f64) -> Option<f64> {
    (0..u.len().saturating_sub(1)).rev().find_map(|i| {
        let (a, b) = (u[i] - level, u[i + 1] - level);
        if a >= 0.0 && b < 0.0 {
            Some(x_min + h * (i as f64 + a / (a - b)))
        } else {
            None
        }
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpeedFit {
    pub c: f64,
    /// Coefficient of `log t`.
    pub b: f64,
    pub x_inf: f64,
    /// RMS residual of the regression.
    pub residual: f64,
    pub window: (f64, f64),
    pub points: usize,
    /// Condition number of the column-scaled design matrix.
    pub condition: f64,
}

/// Least squares of `sigma` on `{t, log t, 1}` over `t ∈ window`; samples
/// with undefined position are skipped.
pub fn fit_speed_and_logshift(times: &[f64], sigma: &[Option<f64>], window: (f64, f64)) -> Result<SpeedFit> {
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(sigma)
        .filter_map(|(&t, s)| s.filter(|_| t >= window.0 && t <= window.1 && t > 0.0).map(|s| (t, s)))
        .collect();
    let advice = || {
        Error::Numerics(format!(
            "regression window [{}, {}] is too short ({} samples); widen the window",
            window.0,
            window.1,
            pts.len()
        ))
    };
    if pts.len() < 4 {
        return Err(advice());
    }
    let (t_lo, t_hi) = (pts[0].0, pts[pts.len() - 1].0);
    if t_hi < 1.1 * t_lo {
        return Err(advice());
    }
    let m = pts.len();
    let mut a = DMatrix::from_fn(m, 3, |i, j| match j {
        0 => pts[i].0,
        1 => pts[i].0.ln(),
        _ => 1.0,
    });
    let scales: Vec<f64> = (0..3).map(|j| a.column(j).norm()).collect();
    for j in 0..3 {
        a.column_mut(j).unscale_mut(scales[j]);
    }
    let y = DVector::from_iterator(m, pts.iter().map(|p| p.1));
    let svd = a.clone().svd(true, true);
    let sv = &svd.singular_values;
    let condition = sv.max() / sv.min();
    if !(condition < 1e10) {
        return Err(advice());
    }
    let coef = svd.solve(&y, 0.0).map_err(|e| Error::Numerics(e.to_string()))?;
    let r = &a * &coef - &y;
    Ok(SpeedFit {
        c: coef[0] / scales[0],
        b: coef[1] / scales[1],
        x_inf: coef[2] / scales[2],
        residual: (r.norm_squared() / m as f64).sqrt(),
        window,
        points: m,
        condition,
    })
}

/// Exponential rate `r` in `y ≈ A e^{rt}` over `window`, fitted to `log y`.
pub fn fit_exponential_rate(times: &[f64], y: &[f64], window: (f64, f64)) -> Result<f64> {
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(y)
        .filter(|(&t, &v)| t >= window.0 && t <= window.1 && v > 0.0 && v.is_finite())
        .map(|(&t, &v)| (t, v.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::Numerics(format!("no positive samples in [{}, {}]", window.0, window.1)));
    }
    let n = pts.len() as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ym = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - tm) * (p.1 - ym)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - tm).powi(2)).sum();
    Ok(sxy / sxx)
}

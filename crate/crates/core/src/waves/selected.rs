use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::dispersion::left_spectrum;
use crate::error::{Error, Result};
use crate::model::{NormalFormModel, ScaledSystem};
use crate::scalar::Real;
use crate::status::Status;

/// The homogeneous state left behind the front.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SelectedState<T> {
    pub value: Vec<T>,
    /// `max |f(u₋)|`.
    pub residual: T,
    /// Eigenvalues of `f'(u₋)`.
    pub jacobian_spectrum: Vec<Complex<f64>>,
    /// `max Re` of the spectrum of `D∂² + f'(u₋)` over real wavenumbers.
    pub max_real_part: f64,
    pub status: Status,
}

/// Newton from the leading-order state `(1, 0)` (`(2, 0)` after the shift
/// for the saddle-node).
pub fn selected_state_of<T: Real>(scaled: &ScaledSystem<T>) -> Result<SelectedState<T>> {
    selected_state_from(scaled, &scaled.selected_state_seed())
}

/// Same as [`selected_state_of`] with an explicit seed (used along
/// continuation paths).
pub fn selected_state_from<T: Real>(scaled: &ScaledSystem<T>, seed: &[T]) -> Result<SelectedState<T>> {
    let sys = &scaled.system;
    let value = sys.equilibrium(seed, T::lit(1e-13))?;
    let residual = sys.reaction(&value).iter().fold(T::zero(), |m, x| m.max(x.abs()));
    let jacobian_spectrum = sys.jacobian(&value).eigenvalues();
    let curve = left_spectrum(sys, &value, T::zero())?;
    let max_real_part = curve.max_real_part;
    let status = if residual > T::lit(1e-12) {
        Status::Fail
    } else {
        curve.status
    };
    Ok(SelectedState { value, residual, jacobian_spectrum, max_real_part, status })
}

/// Selected state of `model` at its own `δ`.
pub fn selected_state<T: Real>(model: &NormalFormModel<T>) -> Result<SelectedState<T>> {
    if model.mu < T::zero() {
        return Err(Error::InvalidModel(format!("mu must be non-negative, got {}", model.mu)));
    }
    selected_state_of(&model.scaled_system(model.delta())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Mat;
    use crate::model::{Kind, Kinetics};

    #[test]
    fn leading_order_states() {
        for kind in Kind::ALL {
            let m = NormalFormModel::<f64>::default_for(kind, 0.0);
            let s = selected_state(&m).unwrap();
            let expect = if kind == Kind::SaddleNode { 2.0 } else { 1.0 };
            assert!((s.value[0] - expect).abs() < 1e-14, "{kind}: {:?}", s.value);
            assert!(s.value[1].abs() < 1e-14);
            assert_eq!(s.status, Status::Pass);
        }
    }

    #[test]
    fn decoupled_is_exact() {
        let m = NormalFormModel::new(Kind::Transcritical, 0.04, Mat::diag(&[2.0]), Mat::diag(&[1.0]), Kinetics::zero(2))
            .unwrap();
        let s = selected_state(&m).unwrap();
        assert_eq!(s.value, vec![1.0, 0.0]);
    }
}

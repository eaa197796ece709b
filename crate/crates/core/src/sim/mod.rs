//! Direct simulation of invasion from steep data, front tracking, and the
//! observables of the selected front: speed, logarithmic shift and
//! weighted convergence to the profile.

mod run;
mod stepper;
mod tracking;

pub use run::{
    linear_pointwise_growth, run_invasion, run_invasion_with, run_unscaled, simulate, weighted_error_of_state,
    weighted_profile_error, Diagnostics, GrowthFit, InitialData, SimOptions, SimulationRun, Snapshot,
};
pub use stepper::{Grid1D, Source, Stepper};
pub use tracking::{fit_exponential_rate, fit_speed_and_logshift, front_position, SpeedFit};

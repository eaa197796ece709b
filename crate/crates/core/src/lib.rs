//! Fronts into unstable states near bifurcation points of reaction–diffusion
//! systems: normal-form scaling, linear dispersion analysis, construction of
//! critical pushed/pulled fronts, spectral stability, and direct simulation.

pub mod banded;
pub mod dispersion;
pub mod error;
pub mod linalg;
pub mod model;
pub mod pipeline;
pub mod poly;
pub mod scalar;
pub mod sim;
pub mod spectra;
pub mod status;
pub mod waves;

pub use error::{Error, Result};
pub use scalar::{Field, Real};
pub use status::Status;

pub type Model = model::NormalFormModel<f64>;
pub type System = model::RdSystem<f64>;
pub type Dispersion = dispersion::DispersionRelation<f64>;

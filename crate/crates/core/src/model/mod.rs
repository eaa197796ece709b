//! Reaction–diffusion models, bifurcation normal forms and weights.

pub mod config;
pub mod kinetics;
pub mod normal_form;
pub mod system;
pub mod weights;

pub use config::{ModelConfig, Numerics};
pub use kinetics::{Kinetics, Monomial};
pub use normal_form::{
    build_normal_form, jacobian, scale_speed_to_original, BorderlineTerm, Kind, NormalFormModel,
    ScaledSystem,
};
pub use system::RdSystem;
pub use weights::{chi_minus, chi_plus, evaluate_algebraic_weight, evaluate_weight, phi, psi, WeightSpec};

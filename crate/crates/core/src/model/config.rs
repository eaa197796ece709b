//! JSON model files.
//!
//! ```json
//! {"kind": "transcritical", "mu": 0.01, "D_v": [[2.0]], "K": [[1.0]],
//!  "f0_terms": [{"coef": 0.5, "mu_pow": 0, "u_pows": [1, 1]}],
//!  "f1_terms": [[{"coef": 0.5, "mu_pow": 0, "u_pows": [2, 0]}]]}
//! ```
//!
//! `f1_terms` is a list per stable component; for two-component models a
//! flat list is accepted as well. An optional `numerics` block overrides
//! solver defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::model::kinetics::{Kinetics, Monomial};
use crate::model::normal_form::{Kind, NormalFormModel};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum F1Terms {
    PerComponent(Vec<Vec<Monomial<f64>>>),
    Flat(Vec<Monomial<f64>>),
}

impl Default for F1Terms {
    fn default() -> Self {
        F1Terms::PerComponent(Vec::new())
    }
}

/// Solver settings with their defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Numerics {
    /// Left end of the traveling-wave domain is `−l_minus`.
    pub l_minus: f64,
    pub l_plus: f64,
    pub h: f64,
    pub newton_tol: f64,
    pub continuation_step: f64,
    pub continuation_floor: f64,
    /// Weighted-space margin `η̃` in the Robin closure.
    pub eta_margin: f64,
    pub gamma0: f64,
    /// Eigenvalue scan box `[re0, re1] × [im0, im1]`.
    pub region: [f64; 4],
    pub origin_exclusion: f64,
    pub sim_h: f64,
    pub sim_dt_factor: f64,
    pub sim_t: f64,
    pub sim_x_min: f64,
    pub sim_x_max: f64,
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            l_minus: 30.0,
            l_plus: 40.0,
            h: 0.02,
            newton_tol: 1e-10,
            continuation_step: 0.05,
            continuation_floor: 1e-4,
            eta_margin: 0.1,
            gamma0: 0.5,
            region: [1e-6, 2.0, -2.0, 2.0],
            origin_exclusion: 0.05,
            sim_h: 0.1,
            sim_dt_factor: 0.2,
            sim_t: 400.0,
            sim_x_min: -100.0,
            sim_x_max: 900.0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: Kind,
    pub mu: f64,
    #[serde(rename = "D_v")]
    pub d_v: Vec<Vec<f64>>,
    #[serde(rename = "K")]
    pub k: Vec<Vec<f64>>,
    #[serde(default)]
    pub f0_terms: Vec<Monomial<f64>>,
    #[serde(default)]
    pub f1_terms: F1Terms,
    #[serde(default)]
    pub numerics: Numerics,
}

impl ModelConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn from_model(model: &NormalFormModel<f64>, numerics: Numerics) -> Self {
        let terms = model.higher_order.terms();
        Self {
            kind: model.kind,
            mu: model.mu,
            d_v: model.d_v.to_rows(),
            k: model.k.to_rows(),
            f0_terms: terms[0].clone(),
            f1_terms: F1Terms::PerComponent(terms[1..].to_vec()),
            numerics,
        }
    }

    /// Builds and validates the normal-form model.
    pub fn model(&self) -> Result<NormalFormModel<f64>> {
        let d_v = Mat::from_rows(&self.d_v)?;
        let k = Mat::from_rows(&self.k)?;
        let m = d_v.rows();
        let f1: Vec<Vec<Monomial<f64>>> = match &self.f1_terms {
            F1Terms::PerComponent(v) if v.is_empty() => vec![Vec::new(); m],
            F1Terms::PerComponent(v) => v.clone(),
            F1Terms::Flat(v) if m == 1 => vec![v.clone()],
            F1Terms::Flat(_) => {
                return Err(Error::InvalidModel(
                    "flat f1_terms only allowed for two-component models".into(),
                ))
            }
        };
        if f1.len() != m {
            return Err(Error::Dimension(format!(
                "f1_terms has {} components, expected {m}",
                f1.len()
            )));
        }
        let mut terms = vec![self.f0_terms.clone()];
        terms.extend(f1);
        let ho = Kinetics::new(terms)?;
        NormalFormModel::new(self.kind, self.mu, d_v, k, ho)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_and_nested() {
        let flat = r#"{"kind":"transcritical","mu":0.01,"D_v":[[2]],"K":[[1]],
            "f0_terms":[{"coef":0.5,"mu_pow":0,"u_pows":[1,1]}],
            "f1_terms":[{"coef":0.5,"u_pows":[2,0]}]}"#;
        let m = ModelConfig::from_json(flat).unwrap().model().unwrap();
        assert_eq!(m.higher_order.component(1).len(), 1);
        let nested = r#"{"kind":"pitchfork","mu":0.01,"D_v":[[1]],"K":[[1]],
            "f1_terms":[[{"coef":0.5,"u_pows":[2,0]}]],
            "numerics":{"h":0.05}}"#;
        let c = ModelConfig::from_json(nested).unwrap();
        assert_eq!(c.numerics.h, 0.05);
        assert_eq!(c.numerics.l_plus, 40.0);
        c.model().unwrap();
    }

    #[test]
    fn rejects_unknown_kind() {
        let bad = r#"{"kind":"hopf","mu":0.01,"D_v":[[1]],"K":[[1]]}"#;
        assert!(ModelConfig::from_json(bad).is_err());
    }
}

//! The verification pipeline over a list of `δ` and the consolidated
//! report of run artifacts.

mod report;

pub use report::{cmd_report, parse_csv, Artifact, ArtifactContent, ConsolidatedReport, CrossReference, CsvTable};

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dispersion::{linear_spreading_speed, verify_hyp1};
use crate::error::Result;
use crate::model::{Kind, ModelConfig, NormalFormModel, Numerics};
use crate::spectra::{verify_hyp4, EvansContext, SpectralOptions, WeightedOperator};
use crate::status::Status;
use crate::waves::{selected_state_of, solve_front_with, verify_hyp2, SolveOptions};

/// Version of every JSON document written by the pipeline.
pub const SCHEMA_VERSION: &str = "1.0";

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Check {
    pub status: Status,
    /// Distance of the deciding quantity from its threshold (positive is
    /// on the passing side), when there is one.
    pub margin: Option<f64>,
    pub values: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl Check {
    fn new(status: Status, margin: Option<f64>) -> Self {
        Self { status, margin, values: BTreeMap::new(), notes: Vec::new() }
    }

    fn value(mut self, key: &str, v: f64) -> Self {
        self.values.insert(key.to_string(), v);
        self
    }

    fn inconclusive(note: String) -> Self {
        Self { status: Status::Inconclusive, margin: None, values: BTreeMap::new(), notes: vec![note] }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DeltaReport {
    pub delta: f64,
    pub mu: f64,
    pub c_star: Option<f64>,
    pub hyp1: Check,
    pub hyp2: Check,
    pub hyp3: Check,
    pub hyp4: Check,
    /// First stage error, if any; later stages are then inconclusive.
    pub error: Option<String>,
    pub status: Status,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModelMeta {
    pub kind: Kind,
    pub mu: f64,
    pub n: usize,
    #[serde(rename = "D_v")]
    pub d_v: Vec<Vec<f64>>,
    #[serde(rename = "K")]
    pub k: Vec<Vec<f64>>,
    pub higher_order_terms: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema_version: String,
    pub model: Option<ModelMeta>,
    pub numerics: Numerics,
    /// Model validation (dimensions, spectra, no-Turing, order conditions).
    pub validation: Check,
    pub deltas: Vec<DeltaReport>,
    pub overall: Status,
    /// Wall-clock seconds per stage; only when requested, since it breaks
    /// byte-for-byte reproducibility.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub timings: Option<BTreeMap<String, f64>>,
}

impl VerificationReport {
    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn meta(m: &NormalFormModel<f64>) -> ModelMeta {
    ModelMeta {
        kind: m.kind,
        mu: m.mu,
        n: m.n(),
        d_v: m.d_v.to_rows(),
        k: m.k.to_rows(),
        higher_order_terms: m.higher_order.terms().iter().map(|t| t.len()).sum(),
    }
}

struct Timer {
    on: bool,
    map: BTreeMap<String, f64>,
}

impl Timer {
    fn time<R>(&mut self, key: String, f: impl FnOnce() -> R) -> R {
        let t = Instant::now();
        let r = f();
        if self.on {
            self.map.insert(key, t.elapsed().as_secs_f64());
        }
        r
    }
}

/// Runs the hypothesis checks of `config` at every `δ`.
pub fn cmd_verify(config: &ModelConfig, deltas: &[f64], timings: bool) -> VerificationReport {
    let numerics = config.numerics.clone();
    let mut report = VerificationReport {
        schema_version: SCHEMA_VERSION.to_string(),
        model: None,
        numerics: numerics.clone(),
        validation: Check::new(Status::Pass, None),
        deltas: Vec::new(),
        overall: Status::Fail,
        timings: None,
    };
    let model = match config.model() {
        Ok(m) => m,
        Err(e) => {
            report.validation = Check { status: Status::Fail, margin: None, values: BTreeMap::new(), notes: vec![e.to_string()] };
            return report;
        }
    };
    report.model = Some(meta(&model));
    let mut timer = Timer { on: timings, map: BTreeMap::new() };
    let setup = SolveOptions::<f64>::from_numerics(&numerics).and_then(|s| Ok((s, SpectralOptions::from_numerics(&numerics)?)));
    let (solve, spec) = match setup {
        Ok(x) => x,
        Err(e) => {
            report.validation = Check::inconclusive(format!("numerics: {e}"));
            report.overall = Status::Inconclusive;
            return report;
        }
    };
    // the Evans gauge is fixed once by the front at δ = 0
    let ctx = timer.time("evans_gauge".into(), || -> Result<EvansContext> {
        let f0 = solve_front_with(&model, 0.0, &solve)?;
        let s0 = model.scaled_system(0.0)?.system;
        let op0 = WeightedOperator::assemble(&f0.profile, &s0, spec.eta_margin)?;
        EvansContext::new(&op0, spec.gamma0)
    });
    for &delta in deltas {
        let r = verify_delta(&model, delta, &solve, &spec, ctx.as_ref().map_err(|e| e.to_string()), &mut timer);
        report.deltas.push(r);
    }
    report.overall = Status::all(report.deltas.iter().map(|d| d.status));
    if report.deltas.is_empty() {
        report.overall = Status::Inconclusive;
        report.validation.notes.push("no delta requested".into());
    }
    if timings {
        report.timings = Some(timer.map);
    }
    report
}

fn verify_delta(
    model: &NormalFormModel<f64>,
    delta: f64,
    solve: &SolveOptions<f64>,
    spec: &SpectralOptions,
    ctx: std::result::Result<&EvansContext, String>,
    timer: &mut Timer,
) -> DeltaReport {
    let pending = || Check::inconclusive("not reached".into());
    let mut r = DeltaReport {
        delta,
        mu: model.kind.mu_of_delta(delta),
        c_star: None,
        hyp1: pending(),
        hyp2: pending(),
        hyp3: pending(),
        hyp4: pending(),
        error: None,
        status: Status::Inconclusive,
    };
    let key = |s: &str| format!("delta={delta}/{s}");
    let res: Result<()> = (|| {
        let scaled = model.scaled_system(delta)?;
        let speed = timer.time(key("speed"), || linear_spreading_speed(&scaled.system))?;
        let c = speed.c_star;
        r.c_star = Some(c);
        let h1 = timer.time(key("hyp1"), || verify_hyp1(&scaled.system, c))?;
        let mut chk = Check::new(h1.status(), Some(h1.margin))
            .value("c_star", c)
            .value("d10_re", h1.d10.re)
            .value("d02_re", h1.d02.re)
            .value("d10_d02", (h1.d10 * h1.d02).re)
            .value("max_real_part", h1.max_real_part);
        chk.notes.push(format!(
            "simple root {}, marginal {}, no unstable {}",
            h1.simple_root, h1.marginal, h1.no_unstable
        ));
        r.hyp1 = chk;
        let wake = timer.time(key("hyp3"), || selected_state_of(&scaled))?;
        r.hyp3 = Check::new(wake.status, Some(-wake.max_real_part))
            .value("max_real_part", wake.max_real_part)
            .value("residual", wake.residual);
        let front = timer.time(key("front"), || solve_front_with(model, delta, solve))?;
        let h2 = verify_hyp2(&front.profile);
        let mut chk = Check::new(h2.status, Some(1e-9 - h2.residual)).value("residual", h2.residual).value("a", front.a);
        if let Some(t) = &h2.tail {
            chk = chk.value("tail_a", t.a).value("tail_b", t.b).value("nu_star", t.nu_star).value("eta", t.eta);
        }
        if let Some(l) = &h2.left {
            chk = chk.value("left_rate", l.rate);
        }
        chk.notes = h2.notes.clone();
        r.hyp2 = chk;
        let ctx = ctx.map_err(crate::error::Error::Numerics)?;
        let h4 = timer.time(key("hyp4"), || -> Result<_> {
            let op = WeightedOperator::assemble(&front.profile, &scaled.system, spec.eta_margin)?;
            verify_hyp4(&op, ctx, spec)
        })?;
        let mut chk = Check::new(h4.status, Some(h4.zero_mode.angle - h4.zero_mode.threshold))
            .value("eigenvalues", h4.eigen.eigenvalues.len() as f64)
            .value("winding", h4.evans.winding as f64)
            .value("e00_abs", h4.e00.norm())
            .value("zero_mode_angle", h4.zero_mode.angle)
            .value("min_modulus", h4.evans.min_modulus);
        chk.notes = h4.notes.clone();
        r.hyp4 = chk;
        Ok(())
    })();
    if let Err(e) = res {
        r.error = Some(e.to_string());
    }
    r.status = Status::all([r.hyp1.status, r.hyp2.status, r.hyp3.status, r.hyp4.status]);
    r
}

use front_core::model::{Kind, ModelConfig, NormalFormModel, Numerics};
use front_core::pipeline::*;
use front_core::Status;

fn config(kind: Kind) -> ModelConfig {
    ModelConfig::from_model(&NormalFormModel::default_for(kind, kind.mu_of_delta(0.1)), Numerics::default())
}

#[test]
fn transcritical_default_passes_and_is_reproducible() {
    let cfg = config(Kind::Transcritical);
    let a = cmd_verify(&cfg, &[0.05, 0.1, 0.2], false);
    assert_eq!(a.overall, Status::Pass, "{}", a.to_json());
    let b = cmd_verify(&cfg, &[0.05, 0.1, 0.2], false);
    assert_eq!(a.to_json(), b.to_json());
    assert!(!a.to_json().contains("timings"));
}

#[test]
fn pitchfork_default_passes() {
    let r = cmd_verify(&config(Kind::Pitchfork), &[0.1], false);
    assert_eq!(r.overall, Status::Pass, "{}", r.to_json());
}

#[test]
fn marginal_coupling_fails_validation() {
    // K has an eigenvalue on the imaginary axis
    let mut cfg = config(Kind::Transcritical);
    cfg.d_v = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
    cfg.k = vec![vec![0.0, 1.0], vec![-1.0, 0.0]];
    cfg.f1_terms = Default::default();
    let r = cmd_verify(&cfg, &[0.1], false);
    assert_eq!(r.validation.status, Status::Fail, "{}", r.to_json());
    assert_eq!(r.overall, Status::Fail);
}

#[test]
fn timings_are_opt_in() {
    let r = cmd_verify(&config(Kind::Transcritical), &[0.1], true);
    let t = r.timings.as_ref().unwrap();
    assert!(t.keys().any(|k| k.ends_with("/hyp4")));
}

#[test]
fn report_links_verification_and_simulation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(Kind::Transcritical);
    let v = cmd_verify(&cfg, &[0.1], false);
    let vp = dir.path().join("verify.json");
    std::fs::write(&vp, v.to_json()).unwrap();
    let sp = dir.path().join("run.json");
    std::fs::write(&sp, r#"{"schema_version":"1.0","model":{"kind":"transcritical","mu":0.01},"delta":0.1,"run":{}}"#).unwrap();
    let cp = dir.path().join("run.csv");
    std::fs::write(&cp, "t,sigma,c_inst,weighted_error\n0,1,2,\n").unwrap();
    let r = cmd_report(&[&vp, &sp, &cp]).unwrap();
    assert_eq!(r.references.len(), 2);
    assert_eq!((r.references[0].from, r.references[0].to), (0, 1));
    assert_eq!((r.references[1].from, r.references[1].to), (1, 2));
    // same inputs, same bytes
    assert_eq!(r.to_json(), cmd_report(&[&vp, &sp, &cp]).unwrap().to_json());
}

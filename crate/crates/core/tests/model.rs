use front_core::model::*;
use proptest::prelude::*;

fn kind_strategy() -> impl Strategy<Value = Kind> {
    prop_oneof![Just(Kind::Transcritical), Just(Kind::SaddleNode), Just(Kind::Pitchfork)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jacobian_matches_central_differences(
        kind in kind_strategy(),
        mu in 0.0f64..0.1,
        u in proptest::collection::vec(-1.5f64..1.5, 2),
    ) {
        let m = NormalFormModel::<f64>::default_for(kind, mu);
        let sys = m.unscaled_system().unwrap();
        let j = sys.jacobian(&u);
        let h = 1e-6;
        for c in 0..sys.n() {
            let (mut up, mut dn) = (u.clone(), u.clone());
            up[c] += h;
            dn[c] -= h;
            let (fp, fm) = (sys.reaction(&up), sys.reaction(&dn));
            for r in 0..sys.n() {
                let fd = (fp[r] - fm[r]) / (2.0 * h);
                prop_assert!((fd - j[(r, c)]).abs() < 1e-6 * (1.0 + fd.abs()), "{:?} ({}, {}): {} vs {}", kind, r, c, fd, j[(r, c)]);
            }
        }
    }

    #[test]
    fn scaled_jacobian_matches_differences(kind in kind_strategy(), delta in 0.0f64..0.3, u in proptest::collection::vec(-1.0f64..2.0, 2)) {
        let m = NormalFormModel::<f64>::default_for(kind, 0.01);
        let sys = m.scaled_system(delta).unwrap().system;
        let j = jacobian(&sys, &u);
        let h = 1e-6;
        for c in 0..sys.n() {
            let (mut up, mut dn) = (u.clone(), u.clone());
            up[c] += h;
            dn[c] -= h;
            let (fp, fm) = (sys.reaction(&up), sys.reaction(&dn));
            for r in 0..sys.n() {
                let fd = (fp[r] - fm[r]) / (2.0 * h);
                prop_assert!((fd - j[(r, c)]).abs() < 1e-6 * (1.0 + fd.abs()));
            }
        }
    }

    #[test]
    fn weight_is_smooth_and_positive(eta in 0.2f64..2.0, x in -40.0f64..40.0) {
        let w = WeightSpec::new(eta, 2.0).unwrap();
        prop_assert!(w.omega(x) > 0.0);
        let (l, dl, _) = w.log_omega(x);
        let h = 1e-5;
        let fd = (w.omega(x + h).ln() - w.omega(x - h).ln()) / (2.0 * h);
        prop_assert!((fd - dl).abs() < 1e-6, "{} vs {}", fd, dl);
        prop_assert!((l - w.omega(x).ln()).abs() < 1e-10);
    }
}

#[test]
fn config_round_trips_through_json() {
    for kind in [Kind::Transcritical, Kind::SaddleNode, Kind::Pitchfork] {
        let m = NormalFormModel::<f64>::default_for(kind, 0.02);
        let cfg = ModelConfig::from_model(&m, Numerics::default());
        let text = serde_json::to_string(&cfg).unwrap();
        let back = ModelConfig::from_json(&text).unwrap().model().unwrap();
        let s0 = m.scaled_system(0.1).unwrap().system;
        let s1 = back.scaled_system(0.1).unwrap().system;
        for u in [[0.3, -0.2], [1.1, 0.4]] {
            assert_eq!(s0.reaction(&u), s1.reaction(&u));
        }
    }
}

#[test]
fn unknown_numerics_fields_are_rejected() {
    let e = ModelConfig::from_json(r#"{"kind":"pitchfork","mu":0.01,"D_v":[[1.0]],"K":[[1.0]],"numerics":{"tol_typo":1}}"#);
    assert!(e.is_err());
}

#[test]
fn speed_law_in_original_variables() {
    // c = c_resc · μ^{time/space}: √μ for the transcritical and pitchfork, μ^{1/4} for the saddle-node
    let mu: f64 = 0.04;
    assert!((scale_speed_to_original(Kind::Transcritical, 2.0, mu).unwrap() - 0.4).abs() < 1e-14);
    assert!((scale_speed_to_original(Kind::Pitchfork, 2.0, mu).unwrap() - 0.4).abs() < 1e-14);
    let sn = scale_speed_to_original(Kind::SaddleNode, 2.0 * 2f64.sqrt(), mu).unwrap();
    assert!((sn - 2.0 * 2f64.sqrt() * mu.powf(0.25)).abs() < 1e-14);
}

use front_core::model::{Kind, NormalFormModel};
use front_core::waves::*;
use proptest::prelude::*;

fn model(kind: Kind) -> NormalFormModel<f64> {
    NormalFormModel::default_for(kind, kind.mu_of_delta(0.1))
}

fn opts(h: f64) -> SolveOptions<f64> {
    SolveOptions::default().with_grid(Grid::new(-30.0, 40.0, h).unwrap())
}

#[test]
fn a_of_delta_is_cauchy_under_grid_halving() {
    for kind in [Kind::Transcritical, Kind::SaddleNode, Kind::Pitchfork] {
        let m = model(kind);
        let a: Vec<f64> = [0.1, 0.05, 0.025].iter().map(|&h| solve_front_with(&m, 0.1, &opts(h)).unwrap().a).collect();
        let (d1, d2) = ((a[1] - a[0]).abs(), (a[2] - a[1]).abs());
        assert!(d2 < 0.5 * d1 || d2 < 1e-8, "{kind:?}: {a:?}");
        // second order: the remaining error is about d2/3
        assert!(d2 / 3.0 < 1e-3, "{kind:?}: {a:?}");
    }
}

#[test]
fn continuation_step_does_not_change_the_front() {
    let m = model(Kind::Transcritical);
    let mut o = opts(0.1);
    let a = solve_front_with(&m, 0.2, &o).unwrap();
    o.step = 0.0125;
    let b = solve_front_with(&m, 0.2, &o).unwrap();
    assert!(b.path.len() > a.path.len());
    assert!((a.a - b.a).abs() < 1e-8, "{} vs {}", a.a, b.a);
}

#[test]
fn left_state_is_the_selected_state() {
    for kind in [Kind::Transcritical, Kind::SaddleNode, Kind::Pitchfork] {
        let m = model(kind);
        let f = solve_front_with(&m, 0.1, &opts(0.05)).unwrap();
        let wake = selected_state_of(&m.scaled_system(0.1).unwrap()).unwrap();
        let q0 = &f.profile.values[0];
        for (x, y) in q0.iter().zip(&wake.value) {
            assert!((x - y).abs() < 1e-6, "{kind:?}: {q0:?} vs {:?}", wake.value);
        }
        for (x, y) in f.profile.u_minus.iter().zip(&wake.value) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}

#[test]
fn decoupled_front_has_no_stable_component() {
    let m = NormalFormModel::<f64>::default_for(Kind::Transcritical, 0.01).decoupled();
    let f = solve_front(&m, 0.1).unwrap();
    assert_eq!(f.v_sup(), 0.0);
}

#[test]
fn out_of_range_delta_is_an_error() {
    assert!(solve_front(&model(Kind::Pitchfork), 0.5).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn tail_fit_recovers_planted_asymptotics(a in 0.2f64..3.0, b in 0.5f64..3.0, nu in -1.2f64..-0.8) {
        // (a + bξ)e^{νξ} with a faster correction, kept above the fitter's floor
        let xi: Vec<f64> = (0..=300).map(|i| i as f64 * 0.1).collect();
        let u: Vec<f64> = xi.iter().map(|&x| (a + b * x) * (nu * x).exp() * (1.0 + 0.3 * (-0.8 * x).exp())).collect();
        let f = fit_right_tail(&xi, &u).unwrap();
        prop_assert!((f.nu_star - nu).abs() < 1e-3, "{:?}", f);
        prop_assert!(f.generic);
    }
}

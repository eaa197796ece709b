use front_core::spectra::*;
use front_core::waves::{kpp_front, kpp_system, Grid};
use proptest::prelude::*;

fn kpp_op(h: f64) -> WeightedOperator {
    let p = kpp_front::<f64>(Grid::new(-20.0, 30.0, h).unwrap()).unwrap();
    WeightedOperator::assemble(&p, &kpp_system(), 0.1).unwrap()
}

fn bump(op: WeightedOperator) -> WeightedOperator {
    op.with_potential(0, |x| 0.5 / (x - 8.0).cosh().powi(2))
}

fn top(op: &WeightedOperator) -> C64 {
    let d = dense_spectrum(op);
    d.iter().fold(d[0], |m, z| if z.re > m.re { *z } else { m })
}

#[test]
fn weighted_kpp_dense_spectrum_is_stable() {
    let t = top(&kpp_op(0.1));
    assert!(t.re < 1e-6, "{t}");
}

#[test]
fn planted_eigenvalue_is_grid_stable() {
    let a = top(&bump(kpp_op(0.1)));
    let b = top(&bump(kpp_op(0.05)));
    assert!(a.re > 0.05);
    // second order: h = 0.1 vs 0.05 differ by 3/4 of the h = 0.1 error
    assert!((a - b).norm() / b.norm() < 1e-2, "{a} vs {b}");
    let c = top(&bump(kpp_op(0.025)));
    assert!((b - c).norm() / c.norm() < 1e-3, "{b} vs {c}");
}

#[test]
fn eigensolver_and_evans_agree_on_the_planted_mode() {
    let op = kpp_op(0.1);
    let ctx = EvansContext::new(&op, 0.5).unwrap();
    let bumped = bump(op);
    let region = SpectralRegion::new([-0.3, 1.0, -1.0, 1.0], 0.05).unwrap();
    let scan = eigenvalues_in_region(&bumped, &region, 8).unwrap();
    assert_eq!(scan.eigenvalues.len(), 1, "{:?}", scan.eigenvalues.iter().map(|e| e.lambda).collect::<Vec<_>>());
    let lam = scan.eigenvalues[0].lambda;
    let oracle = top(&bumped);
    assert!((lam - oracle).norm() < 1e-4, "{lam} vs {oracle}");
    let seed = evans_minimum(&ctx, &bumped, 0.5).unwrap();
    let g = evans_zero(&ctx, &bumped, seed.gamma).unwrap();
    assert!((g * g - oracle).norm() < 1e-4, "{} vs {oracle}", g * g);
}

#[test]
fn evans_values_are_grid_stable() {
    let gs = [C64::new(0.1, 0.2), C64::new(0.3, -0.1), C64::new(0.0, 0.0)];
    let vals: Vec<Vec<C64>> = [0.05, 0.025]
        .iter()
        .map(|&h| {
            let op = kpp_op(h);
            let ctx = EvansContext::new(&op, 0.5).unwrap();
            gs.iter().map(|&g| ctx.evaluate(&op, g).unwrap().value).collect()
        })
        .collect();
    for (a, b) in vals[0].iter().zip(&vals[1]) {
        assert!((a - b).norm() / b.norm() < 1e-3, "{a} vs {b}");
    }
}

#[test]
fn zero_mode_is_absent_for_kpp() {
    let z = zero_mode_check(&kpp_op(0.1));
    assert!(z.angle > 1e-3, "{z:?}");
    assert!(z.status.is_pass());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn evans_function_satisfies_cauchy_riemann(re in 0.05f64..0.6, im in -0.6f64..0.6) {
        let op = kpp_op(0.1);
        let ctx = EvansContext::new(&op, 0.5).unwrap();
        let e = |g: C64| ctx.evaluate(&op, g).unwrap().value;
        let (g, h) = (C64::new(re, im), 1e-5);
        let dx = (e(g + h) - e(g - h)) / (2.0 * h);
        let dy = (e(g + C64::new(0.0, h)) - e(g - C64::new(0.0, h))) / (2.0 * h);
        // analytic: ∂_y E = i ∂_x E
        let scale = dx.norm().max(1e-3);
        prop_assert!((dy - C64::new(0.0, 1.0) * dx).norm() < 1e-5 * scale.max(1.0), "{} vs {}", dy, dx);
    }
}

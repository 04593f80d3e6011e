use mehler_core::kernels::KernelEvaluator;
use mehler_core::profile::Profile;
use mehler_core::quadrature::{propagate, Grid};
use mehler_core::spectral::{decompose, QuadraticRate};
use mehler_core::weyl::{symbol_pde_residual, SymbolPoint, TimeWindow};
use proptest::prelude::*;

#[test]
fn propagation_is_a_semigroup() {
    let rate =
        QuadraticRate::from_rows(&[vec![1.0, 0.3], vec![0.3, 0.5]], vec![0.2, -0.1], 0.4).unwrap();
    let grid = Grid::new(vec![6.0, 6.0], vec![51, 51]).unwrap();
    let phi0 = Profile::Gaussian {
        mean: vec![0.5, -0.5],
        variance: 0.5,
    }
    .sample(&grid)
    .unwrap();

    let direct = propagate(&phi0, &rate, &TimeWindow::new(0.0, 0.6).unwrap(), &grid).unwrap();
    let half = propagate(&phi0, &rate, &TimeWindow::new(0.0, 0.3).unwrap(), &grid).unwrap();
    let twice = propagate(&half, &rate, &TimeWindow::new(0.3, 0.6).unwrap(), &grid).unwrap();

    let peak = direct.values().iter().cloned().fold(0.0, f64::max);
    for (a, b) in direct.values().iter().zip(twice.values()) {
        assert!((a - b).abs() <= 1e-8 * peak, "{a} vs {b}");
    }
}

#[test]
fn single_and_double_precision_agree() {
    let rate64 = QuadraticRate::<f64>::from_rows(&[vec![2.0]], vec![0.5], 0.1).unwrap();
    let rate32 = QuadraticRate::<f32>::from_rows(&[vec![2.0]], vec![0.5], 0.1).unwrap();
    let ev64 = KernelEvaluator::new(
        decompose(&rate64).unwrap(),
        TimeWindow::elapsed(0.7).unwrap(),
    )
    .unwrap();
    let ev32 = KernelEvaluator::new(
        decompose(&rate32).unwrap(),
        TimeWindow::elapsed(0.7f32).unwrap(),
    )
    .unwrap();
    for &(x, y) in &[(0.0, 0.0), (0.5, -1.0), (2.0, 1.5)] {
        let a = ev64.log_kernel(&[x], &[y]).unwrap();
        let b = ev32.log_kernel(&[x as f32], &[y as f32]).unwrap();
        assert!((a - b as f64).abs() < 1e-5 * (1.0 + a.abs()), "{a} vs {b}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn symbol_solves_its_evolution_equation(
        l1 in 0.0f64..4.0, l2 in 0.0f64..4.0, off in -0.5f64..0.5,
        r1 in -1.0f64..1.0, r2 in -1.0f64..1.0, s in -1.0f64..1.0,
        tau in 0.05f64..2.0,
        x in prop::array::uniform2(-1.5f64..1.5), xi in prop::array::uniform2(-1.5f64..1.5),
    ) {
        // diagonally dominant keeps Q positive definite
        let q = vec![vec![2.0 * l1 + 1.0, off], vec![off, 2.0 * l2 + 1.0]];
        let rate = QuadraticRate::from_rows(&q, vec![r1, r2], s).unwrap();
        let dec = decompose(&rate).unwrap();
        let p = SymbolPoint::new(x.to_vec(), xi.to_vec()).unwrap();
        let r = symbol_pde_residual(&dec, &p, &TimeWindow::elapsed(tau).unwrap()).unwrap();
        prop_assert!(r < 1e-5, "residual {}", r);
    }
}

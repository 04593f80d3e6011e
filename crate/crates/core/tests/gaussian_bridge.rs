//! Heat-rate bridge between equal Gaussians against its closed form.
//!
//! With endpoints `N(0, 1)`, diffusion variance `2τ` and Gaussian potentials
//! `exp(-αx²/2)`, matching the marginals forces `α + 1 = φ` (the golden
//! ratio), so the endpoint covariance is `1/φ`. The bridge between pinned
//! endpoints adds variance `2s(τ - s)/τ`, giving at the midpoint
//! `(2 + 2/φ)/4 + τ/2`.

use mehler_core::bridge::{interpolate_marginal, sinkhorn_solve, BridgeProblem};
use mehler_core::profile::Profile;
use mehler_core::quadrature::Grid;
use mehler_core::spectral::QuadraticRate;
use mehler_core::weyl::TimeWindow;

const TAU: f64 = 0.5;

fn golden() -> f64 {
    (1.0 + 5f64.sqrt()) / 2.0
}

fn bridge_variance(s: f64) -> f64 {
    let u = s / TAU;
    let cov = 1.0 / golden();
    (1.0 - u).powi(2) + u * u + 2.0 * u * (1.0 - u) * cov + 2.0 * s * (TAU - s) / TAU
}

#[test]
fn oracle_midpoint_value() {
    let phi = golden();
    assert!((bridge_variance(TAU / 2.0) - ((2.0 + 2.0 / phi) / 4.0 + TAU / 2.0)).abs() < 1e-15);
    assert!((bridge_variance(0.0) - 1.0).abs() < 1e-15);
    assert!((bridge_variance(TAU) - 1.0).abs() < 1e-15);
}

#[test]
fn marginals_follow_gaussian_bridge() {
    let grid = Grid::line(10.0, 401).unwrap();
    let rho = Profile::gaussian_1d(0.0, 1.0).sample(&grid).unwrap();
    let problem = BridgeProblem::new(
        rho.clone(),
        rho,
        QuadraticRate::heat(1),
        TimeWindow::elapsed(TAU).unwrap(),
    )
    .unwrap()
    .with_tolerance(1e-12, 1000);
    let sol = sinkhorn_solve(&problem).unwrap();
    assert!(sol.converged);

    for &s in &[0.1, 0.25, 0.4] {
        let m = interpolate_marginal(&problem, &sol, s).unwrap();
        let mom = m.density.moments();
        assert!((mom.mass - 1.0).abs() < 1e-12);
        assert!(mom.mean[0].abs() < 1e-10);
        assert!(
            (mom.variance[0] - bridge_variance(s)).abs() < 1e-8,
            "s={s}: {}",
            mom.variance[0]
        );

        // unimodal: increasing up to the center node, decreasing after
        let v = m.density.values();
        let mid = v.len() / 2;
        assert!(v[..=mid].windows(2).all(|w| w[1] >= w[0]));
        assert!(v[mid..].windows(2).all(|w| w[1] <= w[0]));
    }
}

mod common;

use common::{fd_jacobian, nonlinear_drift, random_stable_configs, steady_vector};
use optomech_core::dynamics::{build_drift_matrix, DIM};
use optomech_core::model::Config;
use optomech_core::steady_state::solve_steady_state;

fn worst_violation(a: &optomech_core::dynamics::Mat12, j: &optomech_core::dynamics::Mat12) -> (f64, usize, usize) {
    let mut worst = (0.0, 0, 0);
    for r in 0..DIM {
        for c in 0..DIM {
            let tol = (1e-6 * j[(r, c)].abs()).max(1e-12);
            let ratio = (a[(r, c)] - j[(r, c)]).abs() / tol;
            if ratio > worst.0 {
                worst = (ratio, r, c);
            }
        }
    }
    worst
}

#[test]
fn steady_state_is_a_fixed_point_of_the_full_equations() {
    for cfg in [Config::fig2(), Config::fig4a(), Config::fig4b()] {
        let p = cfg.validate().unwrap();
        let s = solve_steady_state(&p).unwrap();
        let x = steady_vector(&p, &s);
        let f = nonlinear_drift(&p, &x);
        let scale = p.drive_amp[0].norm().max(p.drive_amp[1].norm());
        for (k, v) in f.iter().enumerate() {
            assert!(v.abs() < 1e-9 * scale, "component {k}: {v}");
        }
    }
}

#[test]
fn drift_matrix_matches_finite_differences_at_figure_parameters() {
    for cfg in [Config::fig2(), Config::fig4a(), Config::fig4b()] {
        let p = cfg.validate().unwrap();
        let s = solve_steady_state(&p).unwrap();
        let j = fd_jacobian(&p, &steady_vector(&p, &s), 1e-6);
        let (ratio, r, c) = worst_violation(&build_drift_matrix(&p, &s), &j);
        assert!(ratio <= 1.0, "entry ({r},{c}) off by {ratio} tolerances");
    }
}

#[test]
fn drift_matrix_matches_finite_differences_on_random_stable_configs() {
    let configs = random_stable_configs(2024, 25);
    assert_eq!(configs.len(), 25);
    for (k, (_, p)) in configs.iter().enumerate() {
        let s = solve_steady_state(p).unwrap();
        let j = fd_jacobian(p, &steady_vector(p, &s), 1e-6);
        let (ratio, r, c) = worst_violation(&build_drift_matrix(p, &s), &j);
        assert!(ratio <= 1.0, "config {k}: entry ({r},{c}) off by {ratio} tolerances");
    }
}

//! Mean-field steady state of fields and mirrors.
//!
//! The atoms are eliminated to linear order, which leaves the two field
//! amplitudes coupled through the cross-gain `u` and the mirror positions
//! entering only through the radiation-pressure shifted detunings. The
//! remaining Q <-> |a|^2 feedback is resolved by fixed-point iteration
//! starting from Q = 0.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SystemParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomicGainCoefficients {
    /// Cross gain u_l = g1 g2 r_a rho_ca / (gamma + i delta_l).
    pub u: [Complex64; 2],
    /// kappa_1 + i Delta_1 - g1^2 r_a rho_aa / (gamma + i delta_1).
    pub s1a: Complex64,
    /// kappa_2 + i Delta_2 + g2^2 r_a rho_cc / (gamma + i delta_2).
    pub s2c: Complex64,
}

pub fn atomic_coefficients(params: &SystemParams, delta_eff: [f64; 2]) -> AtomicGainCoefficients {
    let ra = params.inject_rate;
    let rho = params.rho0;
    let [g1, g2] = params.g;
    let lorentz = |l: usize| Complex64::new(params.gamma_atom, params.delta[l]);
    let u = [0, 1].map(|l| Complex64::from(g1 * g2 * ra * rho.rho_ca) / lorentz(l));
    let s1a = Complex64::new(params.kappa[0], delta_eff[0]) - Complex64::from(g1 * g1 * ra * rho.rho_aa) / lorentz(0);
    let s2c = Complex64::new(params.kappa[1], delta_eff[1]) + Complex64::from(g2 * g2 * ra * rho.rho_cc) / lorentz(1);
    AtomicGainCoefficients { u, s1a, s2c }
}

/// Field amplitudes for given coefficients, written exactly as the two
/// closed-form expressions (the denominators differ by conjugate placement).
pub fn field_amplitudes(coeff: &AtomicGainCoefficients, drive: [Complex64; 2]) -> Result<[Complex64; 2]> {
    let AtomicGainCoefficients { u: [u1, u2], s1a, s2c } = *coeff;
    let [e1, e2] = drive;
    let den1 = u1 * u2.conj() + s1a * s2c.conj();
    let den2 = u1.conj() * u2 + s2c * s1a.conj();
    let scale = u1.norm() * u2.norm() + s1a.norm() * s2c.norm();
    for (mode, den) in [(1, den1), (2, den2)] {
        if !(den.norm() > f64::EPSILON * scale) || !den.norm().is_finite() {
            return Err(Error::DegenerateDenominator { mode, magnitude: den.norm() });
        }
    }
    let a1 = (s2c.conj() * e1 + e2.conj() * u1) / den1;
    let a2 = (s1a.conj() * e2 - e1.conj() * u2) / den2;
    Ok([a1, a2])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyState {
    pub a_s: [Complex64; 2],
    pub q_s: [f64; 2],
    pub p_s: [f64; 2],
    /// Delta~_j = delta_cav_j + chi_j Q_j (rad/s).
    pub delta_eff: [f64; 2],
    pub x_s: [f64; 2],
    pub y_s: [f64; 2],
    pub iterations: usize,
    /// Largest relative back-substitution residual of the steady-state equations.
    pub residual: f64,
    /// Set when sign-alternating Q updates forced damping; the Q <-> |a|^2
    /// feedback may be near a bistable point.
    pub oscillation_detected: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_iter: usize,
    pub damping: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-12, abs_tol: 1e-14, max_iter: 10_000, damping: 0.5 }
    }
}

/// Floor for the compounded damping weight.
const MIN_WEIGHT: f64 = 1e-6;

pub fn solve_steady_state(params: &SystemParams) -> Result<SteadyState> {
    solve_steady_state_with(params, &SolverOptions::default())
}

pub fn solve_steady_state_with(params: &SystemParams, opts: &SolverOptions) -> Result<SteadyState> {
    let chi = params.chi();
    let scale = [0, 1].map(|j| (params.drive_amp[j].norm() / params.kappa[j]).max(1.0));
    let displacement = |a: &[Complex64; 2]| [0, 1].map(|j| -chi[j] * a[j].norm_sqr() / params.omega_m[j]);

    let mut q = [0.0; 2];
    let mut prev_step = [0.0; 2];
    let mut prev_a: Option<[Complex64; 2]> = None;
    let mut weight = 1.0;
    let mut oscillation_detected = false;
    let mut change = f64::INFINITY;

    for iteration in 1..=opts.max_iter {
        let delta_eff = [0, 1].map(|j| params.delta_cav[j] + chi[j] * q[j]);
        let a = field_amplitudes(&atomic_coefficients(params, delta_eff), params.drive_amp)?;
        let q_new = displacement(&a);
        let step = [q_new[0] - q[0], q_new[1] - q[1]];

        change = 0.0f64;
        let mut converged = true;
        for j in 0..2 {
            let dq = step[j].abs();
            let rel = dq / q_new[j].abs().max(f64::MIN_POSITIVE);
            change = change.max(rel.min(dq));
            if !(rel < opts.rel_tol || dq < opts.abs_tol) {
                converged = false;
            }
            if let Some(prev) = prev_a {
                let da = (a[j] - prev[j]).norm() / scale[j];
                let rel_a = da / (a[j].norm() / scale[j]).max(f64::MIN_POSITIVE);
                if !(rel_a < opts.rel_tol || da < opts.abs_tol) {
                    converged = false;
                }
            }
        }
        // Q = 0 is exact when the fixed point needs no shift (chi = 0 or no drive).
        if converged && (prev_a.is_some() || step == [0.0, 0.0]) {
            let state = finish(params, a, q_new, iteration, oscillation_detected);
            return Ok(state);
        }

        if (0..2).any(|j| step[j] * prev_step[j] < 0.0) {
            weight = (weight * opts.damping).max(MIN_WEIGHT);
            oscillation_detected = true;
        }
        prev_step = step;
        prev_a = Some(a);
        q = [q[0] + weight * step[0], q[1] + weight * step[1]];
    }
    Err(Error::NonConvergence { iterations: opts.max_iter, residual: change })
}

fn finish(params: &SystemParams, a: [Complex64; 2], q: [f64; 2], iterations: usize, osc: bool) -> SteadyState {
    let chi = params.chi();
    let sqrt2 = std::f64::consts::SQRT_2;
    let mut state = SteadyState {
        a_s: a,
        q_s: q,
        p_s: [0.0; 2],
        delta_eff: [0, 1].map(|j| params.delta_cav[j] + chi[j] * q[j]),
        x_s: a.map(|z| sqrt2 * z.re),
        y_s: a.map(|z| sqrt2 * z.im),
        iterations,
        residual: 0.0,
        oscillation_detected: osc,
    };
    state.residual = back_substitution_residual(params, &state);
    state
}

/// Largest relative mismatch when the state is substituted back into the
/// steady-state equations (P = 0, Q = -chi|a|^2/omega_m and both amplitude
/// formulas evaluated at the state's own effective detunings).
pub fn back_substitution_residual(params: &SystemParams, state: &SteadyState) -> f64 {
    let chi = params.chi();
    let rel = |x: f64, y: f64| (x - y).abs() / y.abs().max(x.abs()).max(f64::MIN_POSITIVE);
    let mut worst = state.p_s[0].abs().max(state.p_s[1].abs());
    for j in 0..2 {
        let q = -chi[j] * state.a_s[j].norm_sqr() / params.omega_m[j];
        worst = worst.max(rel(state.q_s[j], q));
        worst = worst.max(rel(state.delta_eff[j], params.delta_cav[j] + chi[j] * state.q_s[j]));
    }
    let coeff = atomic_coefficients(params, state.delta_eff);
    match field_amplitudes(&coeff, params.drive_amp) {
        Ok(a) => {
            for j in 0..2 {
                let d = (state.a_s[j] - a[j]).norm();
                let n = a[j].norm().max(state.a_s[j].norm());
                if d > 0.0 {
                    worst = worst.max(d / n);
                }
            }
            worst
        }
        Err(_) => f64::INFINITY,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AtomicInjection, Config, Drive};
    use approx::assert_relative_eq;

    fn fig2() -> SystemParams {
        Config::fig2().validate().unwrap()
    }

    #[test]
    fn no_atoms_gives_bare_coefficients() {
        let p = SystemParams { g: [0.0; 2], ..fig2() };
        let c = atomic_coefficients(&p, [1.0e7, 2.0e7]);
        assert_eq!(c.u, [Complex64::new(0.0, 0.0); 2]);
        assert_eq!(c.s1a, Complex64::new(p.kappa[0], 1.0e7));
        assert_eq!(c.s2c, Complex64::new(p.kappa[1], 2.0e7));
    }

    #[test]
    fn incoherent_injection_has_no_cross_gain() {
        let p = SystemParams { rho0: AtomicInjection::new(0.5, 0.5, 0.0), ..fig2() };
        let c = atomic_coefficients(&p, p.delta_cav);
        assert_eq!(c.u, [Complex64::new(0.0, 0.0); 2]);
        assert!((c.s1a - Complex64::new(p.kappa[0], p.delta_cav[0])).norm() > 1.0);
        assert!((c.s2c - Complex64::new(p.kappa[1], p.delta_cav[1])).norm() > 1.0);
    }

    #[test]
    fn coefficients_at_fig2_match_term_by_term_evaluation() {
        // Values from a separate complex-arithmetic script at Delta~ = omega_m.
        let p = fig2();
        let c = atomic_coefficients(&p, p.omega_m);
        let tau = std::f64::consts::TAU;
        let g = tau * 2.2e5;
        let den = Complex64::new(tau * 1.3e6, tau * 4e6);
        let u = Complex64::from(g * g * 2000.0 * 0.5) / den;
        let s1a = Complex64::new(tau * 215e3, tau * 10e6) - Complex64::from(g * g * 2000.0 * 0.5) / den;
        assert_relative_eq!(c.u[0].re, u.re, max_relative = 1e-14);
        assert_relative_eq!(c.u[1].im, u.im, max_relative = 1e-14);
        assert_relative_eq!(c.s1a.re, s1a.re, max_relative = 1e-14);
        assert_relative_eq!(c.s1a.im, s1a.im, max_relative = 1e-14);
        assert_relative_eq!(c.u[0].re, 22_348_107.378_617_28, max_relative = 1e-9);
        assert_relative_eq!(c.u[0].im, -68_763_407.318_822_38, max_relative = 1e-9);
        assert_relative_eq!(c.s2c.re, 23_698_992.219_660_89, max_relative = 1e-9);
        assert_relative_eq!(c.s2c.im, -5_931_554.247_026_518, max_relative = 1e-9);
    }

    #[test]
    fn zero_drive_is_empty() {
        let cfg = Config { drive: Drive::Amplitude([0.0; 2]), ..Config::fig2() };
        let s = solve_steady_state(&cfg.validate().unwrap()).unwrap();
        assert_eq!(s.a_s, [Complex64::new(0.0, 0.0); 2]);
        assert_eq!(s.q_s, [0.0; 2]);
        assert_eq!(s.iterations, 1);
    }

    #[test]
    fn empty_cavity_limit_matches_lorentzian() {
        let p = SystemParams { g: [0.0; 2], cavity_len: 1e30, ..fig2() };
        let s = solve_steady_state(&p).unwrap();
        for j in 0..2 {
            let expected = p.drive_amp[j] / Complex64::new(p.kappa[j], p.delta_cav[j]);
            assert!((s.a_s[j] - expected).norm() <= 1e-12 * expected.norm());
        }
    }

    #[test]
    fn zero_chi_converges_in_one_iteration() {
        let p = SystemParams { cavity_len: f64::INFINITY, ..fig2() };
        assert_eq!(p.chi(), [0.0, 0.0]);
        let s = solve_steady_state(&p).unwrap();
        assert_eq!(s.iterations, 1);
        assert_eq!(s.q_s, [-0.0, -0.0]);
    }

    #[test]
    fn fig2_back_substitution() {
        let p = fig2();
        let s = solve_steady_state(&p).unwrap();
        assert!(s.residual < 1e-10, "residual {}", s.residual);
        assert_eq!(s.p_s, [0.0, 0.0]);
        let chi = p.chi();
        for j in 0..2 {
            assert_eq!(s.q_s[j], -chi[j] * s.a_s[j].norm_sqr() / p.omega_m[j]);
            assert_eq!(s.delta_eff[j], p.delta_cav[j] + chi[j] * s.q_s[j]);
            assert_relative_eq!(s.x_s[j], std::f64::consts::SQRT_2 * s.a_s[j].re);
        }
    }

    #[test]
    fn strong_feedback_is_damped_and_converges() {
        // Heavier drive makes the radiation-pressure shift comparable to kappa.
        let cfg = Config { drive: Drive::Power([2.0; 2]), coupling: [1e3; 2], ..Config::fig2() };
        let p = cfg.validate().unwrap();
        let s = solve_steady_state(&p).unwrap();
        assert!(s.residual < 1e-10, "residual {}", s.residual);
    }

    #[test]
    fn mode_swap_of_symmetric_parameters() {
        let p = fig2();
        let a = solve_steady_state(&p).unwrap();
        let b = solve_steady_state(&p.swapped_modes()).unwrap();
        assert_eq!(a, b);
        // The cascade itself is not label symmetric: mode 1 sees gain, mode 2 loss.
        assert!((a.a_s[0].norm() - a.a_s[1].norm()).abs() > 0.0);
    }

    #[test]
    fn iteration_cap_reports_nonconvergence() {
        let cfg = Config { drive: Drive::Power([2.0; 2]), coupling: [1e3; 2], ..Config::fig2() };
        let p = cfg.validate().unwrap();
        let opts = SolverOptions { max_iter: 1, ..Default::default() };
        assert!(matches!(solve_steady_state_with(&p, &opts), Err(Error::NonConvergence { .. })));
    }
}

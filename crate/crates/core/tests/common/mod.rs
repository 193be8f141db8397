#![allow(dead_code)]

use num_complex::Complex64;
use optomech_core::dynamics::{Mat12, DIM};
use optomech_core::model::{AtomicInjection, Config, Detuning, SystemParams};
use optomech_core::steady_state::SteadyState;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SQRT2: f64 = std::f64::consts::SQRT_2;
const TAU: f64 = std::f64::consts::TAU;

/// Mean-field right-hand side of the full nonlinear equations (mirrors,
/// fields and the linear-gain atomic polarizations) on the real 12-vector
/// (Q1, P1, Q2, P2, X1, Y1, X2, Y2, U1, U2, V1, V2), noise set to zero.
///
/// sigma_ba = (U1 + i U2)/sqrt(2), sigma_cb = (V1 + i V2)/sqrt(2).
pub fn nonlinear_drift(p: &SystemParams, x: &[f64; DIM]) -> [f64; DIM] {
    let chi = p.chi();
    let i = Complex64::i();
    let a = [Complex64::new(x[4], x[5]) / SQRT2, Complex64::new(x[6], x[7]) / SQRT2];
    let s_ba = Complex64::new(x[8], x[9]) / SQRT2;
    let s_cb = Complex64::new(x[10], x[11]) / SQRT2;
    let q = [x[0], x[2]];
    let mom = [x[1], x[3]];
    let ra = p.inject_rate;
    let rho = p.rho0;
    let [g1, g2] = p.g;

    let mut out = [0.0; DIM];
    for j in 0..2 {
        out[2 * j] = p.omega_m[j] * mom[j];
        out[2 * j + 1] = -chi[j] * a[j].norm_sqr() - p.omega_m[j] * q[j] - p.gamma_m[j] * mom[j];
    }
    let atom_in = [s_ba, s_cb];
    for j in 0..2 {
        let detuning = p.delta_cav[j] + chi[j] * q[j];
        let da = -Complex64::new(p.kappa[j], detuning) * a[j] - i * p.g[j] * atom_in[j] + p.drive_amp[j];
        out[4 + 2 * j] = SQRT2 * da.re;
        out[5 + 2 * j] = SQRT2 * da.im;
    }
    let d_ba = -Complex64::new(p.gamma_atom, p.delta[0]) * s_ba
        + i * g1 * ra * rho.rho_aa * a[0]
        + i * g2 * ra * rho.rho_ca * a[1].conj();
    let d_cb = -Complex64::new(p.gamma_atom, p.delta[1]) * s_cb
        - i * g1 * ra * rho.rho_ca * a[0].conj()
        - i * g2 * ra * rho.rho_cc * a[1];
    out[8] = SQRT2 * d_ba.re;
    out[9] = SQRT2 * d_ba.im;
    out[10] = SQRT2 * d_cb.re;
    out[11] = SQRT2 * d_cb.im;
    out
}

/// Steady-state point of the 12-vector, atomic polarizations included.
pub fn steady_vector(p: &SystemParams, s: &SteadyState) -> [f64; DIM] {
    let i = Complex64::i();
    let ra = p.inject_rate;
    let rho = p.rho0;
    let [g1, g2] = p.g;
    let s_ba = (i * g1 * ra * rho.rho_aa * s.a_s[0] + i * g2 * ra * rho.rho_ca * s.a_s[1].conj())
        / Complex64::new(p.gamma_atom, p.delta[0]);
    let s_cb = (-i * g1 * ra * rho.rho_ca * s.a_s[0].conj() - i * g2 * ra * rho.rho_cc * s.a_s[1])
        / Complex64::new(p.gamma_atom, p.delta[1]);
    [
        s.q_s[0],
        s.p_s[0],
        s.q_s[1],
        s.p_s[1],
        s.x_s[0],
        s.y_s[0],
        s.x_s[1],
        s.y_s[1],
        SQRT2 * s_ba.re,
        SQRT2 * s_ba.im,
        SQRT2 * s_cb.re,
        SQRT2 * s_cb.im,
    ]
}

/// Central-difference Jacobian with step `rel_step * max(1, ||x||_inf)`.
///
/// The drift is at most quadratic, so central differences carry no
/// truncation error and the step only needs to beat rounding in f.
pub fn fd_jacobian(p: &SystemParams, x: &[f64; DIM], rel_step: f64) -> Mat12 {
    let mut jac = Mat12::zeros();
    let norm = x.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    for j in 0..DIM {
        let h = rel_step * norm;
        let (mut xp, mut xm) = (*x, *x);
        xp[j] += h;
        xm[j] -= h;
        let (fp, fm) = (nonlinear_drift(p, &xp), nonlinear_drift(p, &xm));
        for i in 0..DIM {
            jac[(i, j)] = (fp[i] - fm[i]) / (xp[j] - xm[j]);
        }
    }
    jac
}

/// Random valid injection state with nonzero coherence.
pub fn random_injection(rng: &mut impl Rng) -> AtomicInjection {
    let aa: f64 = rng.gen_range(0.05..0.95);
    let cc = 1.0 - aa;
    let ca = rng.gen_range(0.05..1.0) * (aa * cc).sqrt();
    AtomicInjection::new(aa, cc, ca)
}

/// Reference configuration perturbed at random: coupling, detuning, atomic
/// detunings, injection state and a reduced injection rate.
pub fn perturbed_fig2(rng: &mut impl Rng) -> Config {
    let mut c = Config::fig2();
    let g = rng.gen_range(0.2e5..2.2e5);
    c.coupling = [g, g * rng.gen_range(0.8..1.2)];
    c.cavity_detuning = Detuning::Ratio(rng.gen_range(0.0..1.0));
    c.atom_detuning = [rng.gen_range(-4e6..4e6), rng.gen_range(-4e6..4e6)];
    c.inject_rate = (rng.gen_range(0.5f64.ln()..50f64.ln())).exp();
    c.rho0 = random_injection(rng);
    c
}

/// First `n` perturbed configurations whose linearization is stable.
pub fn random_stable_configs(seed: u64, n: usize) -> Vec<(Config, SystemParams)> {
    use optomech_core::dynamics::LinearModel;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for _ in 0..100_000 {
        if out.len() == n {
            break;
        }
        let c = perturbed_fig2(&mut rng);
        let Ok(p) = c.validate() else { continue };
        let Ok((_, m)) = LinearModel::from_params(&p) else { continue };
        if m.stability().map(|r| r.stable).unwrap_or(false) {
            out.push((c, p));
        }
    }
    out
}

/// Stable configuration near the figure-2 set with a small injection rate.
pub fn stable_demo() -> Config {
    Config { inject_rate: 2.0, ..Config::fig2() }
}

pub fn hz(x: f64) -> f64 {
    TAU * x
}

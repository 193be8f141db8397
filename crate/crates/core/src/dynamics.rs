//! Linearized fluctuation dynamics: drift matrix, noise injection, and the
//! eigenvalue stability test.
//!
//! Fluctuation vector ordering (fixed everywhere in the crate):
//!
//! ```text
//! f = (dQ1, dP1, dQ2, dP2, dX1, dY1, dX2, dY2, dU1, dU2, dV1, dV2)
//! ```
//!
//! with X = (a + a^+)/sqrt(2), Y = (a - a^+)/(i sqrt(2)) for the fields,
//! U1, U2 the same combinations of sigma_ba and V1, V2 of sigma_cb. Vacuum
//! quadrature variance is 1/2 in this convention.

use nalgebra::{Complex, SMatrix, SVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SystemParams;
use crate::steady_state::{solve_steady_state, SteadyState};

pub const DIM: usize = 12;
pub const NOISE_DIM: usize = 6;

pub type Mat12 = SMatrix<f64, DIM, DIM>;
pub type NoiseMap = SMatrix<f64, DIM, NOISE_DIM>;

pub const COMPONENTS: [&str; DIM] =
    ["dQ1", "dP1", "dQ2", "dP2", "dX1", "dY1", "dX2", "dY2", "dU1", "dU2", "dV1", "dV2"];
pub const NOISE_COMPONENTS: [&str; NOISE_DIM] = ["xi1", "xi2", "X1in", "Y1in", "X2in", "Y2in"];

pub const Q1: usize = 0;
pub const P1: usize = 1;
pub const Q2: usize = 2;
pub const P2: usize = 3;
pub const X1: usize = 4;
pub const Y1: usize = 5;
pub const X2: usize = 6;
pub const Y2: usize = 7;
pub const U1: usize = 8;
pub const U2: usize = 9;
pub const V1: usize = 10;
pub const V2: usize = 11;

/// Drift, diffusion and noise map of the linearized fluctuations.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub a_mat: Mat12,
    pub d_mat: Mat12,
    /// Columns ordered as [`NOISE_COMPONENTS`].
    pub g_mat: NoiseMap,
    /// Diagonal of the symmetrized noise spectral density.
    pub p_noise: SVector<f64, NOISE_DIM>,
    pub kappa: [f64; 2],
}

impl LinearModel {
    pub fn new(params: &SystemParams, steady: &SteadyState) -> Self {
        let (d_mat, g_mat, p_noise) = build_diffusion(params);
        Self { a_mat: build_drift_matrix(params, steady), d_mat, g_mat, p_noise, kappa: params.kappa }
    }

    /// Solves the steady state and linearizes around it.
    pub fn from_params(params: &SystemParams) -> Result<(SteadyState, Self)> {
        let steady = solve_steady_state(params)?;
        let model = Self::new(params, &steady);
        Ok((steady, model))
    }

    pub fn stability(&self) -> Result<StabilityReport> {
        stability(&self.a_mat)
    }
}

pub fn build_drift_matrix(params: &SystemParams, steady: &SteadyState) -> Mat12 {
    let chi = params.chi();
    let ra = params.inject_rate;
    let rho = params.rho0;
    let [g1, g2] = params.g;
    let gamma = params.gamma_atom;
    let mut a = Mat12::zeros();

    for j in 0..2 {
        let (q, p, x, y) = (2 * j, 2 * j + 1, X1 + 2 * j, Y1 + 2 * j);
        a[(q, p)] = params.omega_m[j];
        a[(p, q)] = -params.omega_m[j];
        a[(p, p)] = -params.gamma_m[j];
        a[(p, x)] = -chi[j] * steady.x_s[j];
        a[(p, y)] = -chi[j] * steady.y_s[j];
        a[(x, q)] = chi[j] * steady.y_s[j];
        a[(y, q)] = -chi[j] * steady.x_s[j];
        a[(x, x)] = -params.kappa[j];
        a[(x, y)] = steady.delta_eff[j];
        a[(y, x)] = -steady.delta_eff[j];
        a[(y, y)] = -params.kappa[j];
    }

    // Field <- atomic polarization.
    a[(X1, U2)] = g1;
    a[(Y1, U1)] = -g1;
    a[(X2, V2)] = g2;
    a[(Y2, V1)] = -g2;

    // Atomic polarization, linear-gain rows. V1 = (sigma_cb + sigma_bc)/sqrt(2).
    let gaa = g1 * ra * rho.rho_aa;
    let gca1 = g1 * ra * rho.rho_ca;
    let gca2 = g2 * ra * rho.rho_ca;
    let gcc = g2 * ra * rho.rho_cc;
    let [d1, d2] = params.delta;

    a[(U1, Y1)] = -gaa;
    a[(U1, Y2)] = gca2;
    a[(U1, U1)] = -gamma;
    a[(U1, U2)] = d1;
    a[(U2, X1)] = gaa;
    a[(U2, X2)] = gca2;
    a[(U2, U1)] = -d1;
    a[(U2, U2)] = -gamma;

    a[(V1, Y1)] = -gca1;
    a[(V1, Y2)] = gcc;
    a[(V1, V1)] = -gamma;
    a[(V1, V2)] = d2;
    a[(V2, X1)] = -gca1;
    a[(V2, X2)] = -gcc;
    a[(V2, V1)] = -d2;
    a[(V2, V2)] = -gamma;
    a
}

/// Returns (D, G, P) with D = G P G^T.
pub fn build_diffusion(params: &SystemParams) -> (Mat12, NoiseMap, SVector<f64, NOISE_DIM>) {
    let vac = 2.0 * params.n_field + 1.0;
    let p_noise = SVector::<f64, NOISE_DIM>::from([
        params.gamma_m[0] * (2.0 * params.n_mech[0] + 1.0),
        params.gamma_m[1] * (2.0 * params.n_mech[1] + 1.0),
        vac / 2.0,
        vac / 2.0,
        vac / 2.0,
        vac / 2.0,
    ]);
    let mut g_mat = NoiseMap::zeros();
    g_mat[(P1, 0)] = 1.0;
    g_mat[(P2, 1)] = 1.0;
    let (s1, s2) = ((2.0 * params.kappa[0]).sqrt(), (2.0 * params.kappa[1]).sqrt());
    g_mat[(X1, 2)] = s1;
    g_mat[(Y1, 3)] = s1;
    g_mat[(X2, 4)] = s2;
    g_mat[(Y2, 5)] = s2;
    let d_mat = g_mat * SMatrix::<f64, NOISE_DIM, NOISE_DIM>::from_diagonal(&p_noise) * g_mat.transpose();
    (d_mat, g_mat, p_noise)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub eigenvalues: Vec<Complex<f64>>,
    pub max_real_part: f64,
    pub stable: bool,
}

pub fn stability<const N: usize>(a_mat: &SMatrix<f64, N, N>) -> Result<StabilityReport> {
    if a_mat.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument { arg: "a_mat", reason: "matrix has non-finite entries".into() });
    }
    let schur = nalgebra::DMatrix::from_column_slice(N, N, a_mat.as_slice())
        .try_schur(f64::EPSILON, 10_000)
        .ok_or(Error::EigenSolver)?;
    let mut eigenvalues: Vec<Complex<f64>> = schur.complex_eigenvalues().iter().copied().collect();
    eigenvalues.sort_by(|x, y| y.re.total_cmp(&x.re).then(x.im.total_cmp(&y.im)));
    let max_real_part = eigenvalues.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    Ok(StabilityReport { eigenvalues, max_real_part, stable: max_real_part < 0.0 })
}

//! Two-mode continuous-variable entanglement criteria.
//!
//! Thresholds assume the quadrature normalization used throughout the
//! crate, X = (a + a^+)/sqrt(2), for which the vacuum variance is 1/2:
//!
//! * Duan: Var(X) + Var(Y) of the EPR-like pair below 2 implies entanglement.
//! * Partial transpose: smallest symplectic eigenvalue of the transposed
//!   covariance matrix below 1/2 is necessary and sufficient for two-mode
//!   Gaussian states.

use nalgebra::{Matrix4, RowVector4};
use serde::{Deserialize, Serialize};

use crate::covariance::{reduce_two_mode, CovarianceMatrix, Subsystem, TwoModeCM};
use crate::error::{Error, Result};

pub const DUAN_THRESHOLD: f64 = 2.0;
pub const SYMPLECTIC_THRESHOLD: f64 = 0.5;
const NEGATIVE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DuanResult {
    pub total: f64,
    pub entangled: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimonResult {
    pub nu_min: f64,
    pub nu_max: f64,
    pub entangled: bool,
    /// max(0, -ln(2 nu_min)); a convenience magnitude, not one of the two criteria.
    pub log_negativity: f64,
}

/// Selector rows for the EPR-like combinations. Mirrors use
/// (Q1 + Q2, P1 - P2); fields use (X1 - X2, Y1 + Y2).
pub fn epr_selectors(subsystem: Subsystem) -> (RowVector4<f64>, RowVector4<f64>) {
    match subsystem {
        Subsystem::Mirrors => (RowVector4::new(1.0, 0.0, 1.0, 0.0), RowVector4::new(0.0, 1.0, 0.0, -1.0)),
        Subsystem::Fields => (RowVector4::new(1.0, 0.0, -1.0, 0.0), RowVector4::new(0.0, 1.0, 0.0, 1.0)),
    }
}

pub fn duan_sum(v4: &Matrix4<f64>, subsystem: Subsystem) -> DuanResult {
    let (lx, ly) = epr_selectors(subsystem);
    let total = (lx * v4 * lx.transpose())[(0, 0)] + (ly * v4 * ly.transpose())[(0, 0)];
    DuanResult { total, entangled: total < DUAN_THRESHOLD }
}

/// Transposition of mode 2: p2 -> -p2.
pub fn partial_transpose(v4: &Matrix4<f64>) -> Matrix4<f64> {
    let flip = Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0, 1.0, 1.0, -1.0));
    flip * v4 * flip
}

/// beta = diag(J, J), J = [[0, 1], [-1, 0]].
pub fn symplectic_form() -> Matrix4<f64> {
    Matrix4::new(
        0.0, 1.0, 0.0, 0.0, //
        -1.0, 0.0, 0.0, 0.0, //
        0.0, 0.0, 0.0, 1.0, //
        0.0, 0.0, -1.0, 0.0,
    )
}

/// Ordinary eigenvalues of -(beta V)^2 sorted ascending; they come in
/// degenerate pairs nu_1^2, nu_1^2, nu_2^2, nu_2^2.
pub fn squared_symplectic_spectrum(v4: &Matrix4<f64>) -> Result<[f64; 4]> {
    let bv = symplectic_form() * v4;
    let m = -(bv * bv);
    let schur = m.try_schur(f64::EPSILON, 10_000).ok_or(Error::EigenSolver)?;
    let mut ev: [f64; 4] = [0.0; 4];
    for (slot, z) in ev.iter_mut().zip(schur.complex_eigenvalues().iter()) {
        *slot = z.re;
    }
    ev.sort_by(f64::total_cmp);
    let scale = ev[3].abs().max(f64::MIN_POSITIVE);
    if ev[0] < -NEGATIVE_TOL * scale.max(1.0) {
        return Err(Error::NonPhysical { eigenvalue: ev[0] });
    }
    Ok(ev)
}

/// Symplectic eigenvalues (nu_min, nu_max).
pub fn symplectic_eigenvalues(v4: &Matrix4<f64>) -> Result<(f64, f64)> {
    let ev = squared_symplectic_spectrum(v4)?;
    let lo = (0.5 * (ev[0] + ev[1])).max(0.0).sqrt();
    let hi = (0.5 * (ev[2] + ev[3])).max(0.0).sqrt();
    Ok((lo, hi))
}

pub fn simon(v4: &Matrix4<f64>) -> Result<SimonResult> {
    let (nu_min, nu_max) = symplectic_eigenvalues(&partial_transpose(v4))?;
    Ok(SimonResult {
        nu_min,
        nu_max,
        entangled: nu_min < SYMPLECTIC_THRESHOLD,
        log_negativity: (-(2.0 * nu_min).ln()).max(0.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairReport {
    pub duan: DuanResult,
    pub simon: SimonResult,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntanglementReport {
    pub mirrors: PairReport,
    pub fields: PairReport,
}

pub fn pair_report(cm: &TwoModeCM) -> Result<PairReport> {
    Ok(PairReport { duan: duan_sum(&cm.v4, cm.subsystem), simon: simon(&cm.v4)? })
}

pub fn analyze(cm: &CovarianceMatrix) -> Result<EntanglementReport> {
    Ok(EntanglementReport {
        mirrors: pair_report(&reduce_two_mode(cm, Subsystem::Mirrors))?,
        fields: pair_report(&reduce_two_mode(cm, Subsystem::Fields))?,
    })
}

//! Frequency-domain response of the linearized system.
//!
//! With flat (Markovian) input spectra, <n_i(w) n_j(w')>_sym = P_ij delta(w + w'),
//! the symmetrized correlation of any linear output y(w) = T(w) n(w) is
//! Re[T P T^H], and T(-w) = conj T(w) for the real drift matrix.

use nalgebra::{Complex, Matrix4, RowVector4, SMatrix};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{LinearModel, Mat12, NoiseMap, DIM, NOISE_DIM, X1, X2, Y1, Y2};
use crate::error::{Error, Result};

pub type CMat12 = SMatrix<Complex<f64>, DIM, DIM>;
pub type Transfer = SMatrix<Complex<f64>, DIM, NOISE_DIM>;

pub const DEFAULT_GRID_POINTS: usize = 2048;
pub const DEFAULT_GRID_SPAN: f64 = 3.0;

/// Output field selectors on (X1, Y1, X2, Y2): X1 - X2 and Y1 + Y2.
pub const L_X: [f64; 4] = [1.0, 0.0, -1.0, 0.0];
pub const L_Y: [f64; 4] = [0.0, 1.0, 0.0, 1.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSeries {
    /// rad/s, measured from the cavity frequency.
    pub omega_grid: Vec<f64>,
    pub s_out: Vec<f64>,
    /// Output correlation of (X1, Y1, X2, Y2) at each grid point.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_out: Option<Vec<Matrix4<f64>>>,
}

impl SpectrumSeries {
    /// (omega, value) of the smallest S_OUT; ties resolve to the first.
    pub fn minimum(&self) -> Option<(f64, f64)> {
        let (i, v) = self.s_out.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1))?;
        Some((self.omega_grid[i], *v))
    }
}

fn complexify<const R: usize, const C: usize>(m: &SMatrix<f64, R, C>) -> SMatrix<Complex<f64>, R, C> {
    m.map(|x| Complex::new(x, 0.0))
}

/// (-i w I - A)^{-1} B for a real B, by LU.
fn resolve(model: &LinearModel, omega: f64, b: &NoiseMap) -> Result<Transfer> {
    let mut m = -complexify(&model.a_mat);
    for k in 0..DIM {
        m[(k, k)] -= Complex::new(0.0, omega);
    }
    let lu = m.lu();
    let sol = lu.solve(&complexify(b)).ok_or(Error::SingularResolvent { omega })?;
    if sol.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::SingularResolvent { omega });
    }
    Ok(sol)
}

/// f(w) = (-i w - A)^{-1} G: response of every fluctuation to the noise inputs.
pub fn intracavity_transfer(model: &LinearModel, omega: f64) -> Result<Transfer> {
    resolve(model, omega, &model.g_mat)
}

/// Input-output map of the noise columns onto the output quadrature rows.
pub fn output_noise_map() -> NoiseMap {
    let mut e = NoiseMap::zeros();
    for (k, row) in [X1, Y1, X2, Y2].into_iter().enumerate() {
        e[(row, 2 + k)] = 1.0;
    }
    e
}

/// T(w) = C (-i w - A)^{-1} G - E; only rows X1..Y2 are nonzero.
pub fn output_transfer(model: &LinearModel, omega: f64) -> Result<Transfer> {
    let r = intracavity_transfer(model, omega)?;
    let mut t = Transfer::zeros();
    for (row, kappa) in [(X1, model.kappa[0]), (Y1, model.kappa[0]), (X2, model.kappa[1]), (Y2, model.kappa[1])] {
        let c = (2.0 * kappa).sqrt();
        for col in 0..NOISE_DIM {
            t[(row, col)] = r[(row, col)] * c;
        }
    }
    Ok(t - complexify(&output_noise_map()))
}

fn symmetrized_correlation(model: &LinearModel, t: &Transfer) -> Mat12 {
    let p = complexify(&SMatrix::<f64, NOISE_DIM, NOISE_DIM>::from_diagonal(&model.p_noise));
    let full = t * p * t.adjoint();
    let re = full.map(|z| z.re);
    (re + re.transpose()) * 0.5
}

/// Symmetrized spectral density of all twelve fluctuations at w.
pub fn intracavity_correlation(model: &LinearModel, omega: f64) -> Result<Mat12> {
    Ok(symmetrized_correlation(model, &intracavity_transfer(model, omega)?))
}

/// Symmetrized output correlation of (X1, Y1, X2, Y2) at w.
pub fn output_correlation(model: &LinearModel, omega: f64) -> Result<Matrix4<f64>> {
    let full = symmetrized_correlation(model, &output_transfer(model, omega)?);
    Ok(full.fixed_view::<4, 4>(X1, X1).clone_owned())
}

pub fn s_out_from_correlation(v_out: &Matrix4<f64>) -> f64 {
    let lx = RowVector4::from_row_slice(&L_X);
    let ly = RowVector4::from_row_slice(&L_Y);
    (lx * v_out * lx.transpose())[(0, 0)] + (ly * v_out * ly.transpose())[(0, 0)]
}

/// S_OUT over a grid, evaluated in parallel and returned in grid order.
pub fn squeezing_spectrum(model: &LinearModel, omega_grid: &[f64], keep_v_out: bool) -> Result<SpectrumSeries> {
    let report = model.stability()?;
    if !report.stable {
        return Err(Error::Unstable { max_real_part: report.max_real_part });
    }
    let blocks: Vec<Matrix4<f64>> =
        omega_grid.par_iter().map(|&w| output_correlation(model, w)).collect::<Result<_>>()?;
    Ok(SpectrumSeries {
        omega_grid: omega_grid.to_vec(),
        s_out: blocks.iter().map(s_out_from_correlation).collect(),
        v_out: keep_v_out.then_some(blocks),
    })
}

/// Trapezoidal (1/2pi) integral of the intracavity correlation over the grid.
pub fn spectral_integral(model: &LinearModel, omega_grid: &[f64]) -> Result<Mat12> {
    if omega_grid.len() < 2 {
        return Err(Error::InvalidArgument { arg: "omega_grid", reason: "need at least two points".into() });
    }
    let values: Vec<Mat12> =
        omega_grid.par_iter().map(|&w| intracavity_correlation(model, w)).collect::<Result<_>>()?;
    let mut acc = Mat12::zeros();
    for k in 1..omega_grid.len() {
        acc += (values[k] + values[k - 1]) * (0.5 * (omega_grid[k] - omega_grid[k - 1]));
    }
    Ok(acc / std::f64::consts::TAU)
}

/// `n` evenly spaced points on [a, b], endpoints included.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
    }
}

/// Symmetric grid over +-3 w_m (the larger mechanical frequency).
pub fn default_grid(omega_m: [f64; 2]) -> Vec<f64> {
    let w = DEFAULT_GRID_SPAN * omega_m[0].max(omega_m[1]);
    linspace(-w, w, DEFAULT_GRID_POINTS)
}

/// Uniform grid on [-half_width, half_width] refined around every pole of
/// the resolvent: `per_pole` points spanning +-40 linewidths of each
/// eigenvalue's resonance at +-|Im lambda|. Sorted, duplicates removed.
pub fn resonance_grid(eigenvalues: &[Complex<f64>], half_width: f64, base_points: usize, per_pole: usize) -> Vec<f64> {
    let mut grid = linspace(-half_width, half_width, base_points);
    for z in eigenvalues {
        let width = z.re.abs();
        if width == 0.0 {
            continue;
        }
        for center in [z.im.abs(), -z.im.abs()] {
            let (lo, hi) = ((center - 40.0 * width).max(-half_width), (center + 40.0 * width).min(half_width));
            if lo < hi {
                grid.extend(linspace(lo, hi, per_pole));
            }
        }
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// Indices of strict interior local minima.
pub fn local_minima(values: &[f64]) -> Vec<usize> {
    (1..values.len().saturating_sub(1)).filter(|&k| values[k] < values[k - 1] && values[k] < values[k + 1]).collect()
}

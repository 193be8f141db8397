//! Stationary covariance matrix of the fluctuations from the Lyapunov
//! equation A V + V A^T = -D, and its two-mode reductions.

use nalgebra::{Complex, DMatrix, Matrix4, SMatrix};
use serde::{Deserialize, Serialize};

use crate::dynamics::{stability, Mat12, DIM};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    /// V_ij = <f_i f_j + f_j f_i>/2.
    pub v: Mat12,
    /// ||A V + V A^T + D||_F.
    pub residual: f64,
    /// 1e-8 (||A||_F ||V||_F + ||D||_F); every accepted solve is below it.
    pub residual_bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subsystem {
    Mirrors,
    Fields,
}

impl Subsystem {
    /// First index of the (q1, p1, q2, p2) block in the fluctuation vector.
    pub const fn offset(self) -> usize {
        match self {
            Subsystem::Mirrors => 0,
            Subsystem::Fields => 4,
        }
    }
}

/// 4x4 covariance of one pair in (q1, p1, q2, p2) ordering.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoModeCM {
    pub v4: Matrix4<f64>,
    pub subsystem: Subsystem,
}

const RESIDUAL_FACTOR: f64 = 1e-8;

/// Solves A V + V A^T = -D for a stable drift matrix.
pub fn solve_lyapunov(a_mat: &Mat12, d_mat: &Mat12) -> Result<CovarianceMatrix> {
    let report = stability(a_mat)?;
    if !report.stable {
        return Err(Error::Unstable { max_real_part: report.max_real_part });
    }
    let a = DMatrix::from_column_slice(DIM, DIM, a_mat.as_slice());
    let c = -DMatrix::from_column_slice(DIM, DIM, d_mat.as_slice());
    let x = bartels_stewart(&a, &c)?;
    let mut v = Mat12::from_column_slice(x.as_slice());
    v = (v + v.transpose()) * 0.5;

    let residual = (a_mat * v + v * a_mat.transpose() + d_mat).norm();
    let residual_bound = RESIDUAL_FACTOR * (a_mat.norm() * v.norm() + d_mat.norm());
    if !(residual < residual_bound) {
        return Err(Error::LyapunovResidual { residual, bound: residual_bound });
    }
    Ok(CovarianceMatrix { v, residual, residual_bound })
}

/// Bartels-Stewart solution of A X + X A^T = C.
///
/// A = Q T Q^T (real Schur form), then T Y + Y T^T = Q^T C Q is solved block
/// by block from the bottom-right corner, each 1x1 / 2x2 diagonal-block
/// Sylvester equation being at most a 4x4 linear system.
pub fn bartels_stewart(a: &DMatrix<f64>, c: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if a.ncols() != n || c.shape() != (n, n) {
        return Err(Error::InvalidArgument { arg: "a/c", reason: "must be square and of equal size".into() });
    }
    let schur = a.clone().try_schur(f64::EPSILON, 10_000).ok_or(Error::EigenSolver)?;
    let (q, mut t) = schur.unpack();

    for k in 0..n.saturating_sub(1) {
        if t[(k + 1, k)].abs() <= f64::EPSILON * (t[(k, k)].abs() + t[(k + 1, k + 1)].abs()) {
            t[(k + 1, k)] = 0.0;
        }
    }
    let mut blocks = Vec::new();
    let mut k = 0;
    while k < n {
        let size = if k + 1 < n && t[(k + 1, k)] != 0.0 { 2 } else { 1 };
        blocks.push((k, size));
        k += size;
    }

    let c_hat = q.transpose() * c * &q;
    let mut y = DMatrix::<f64>::zeros(n, n);
    for bi in (0..blocks.len()).rev() {
        let (i0, p) = blocks[bi];
        for bj in (0..blocks.len()).rev() {
            let (j0, r) = blocks[bj];
            let mut rhs = c_hat.view((i0, j0), (p, r)).clone_owned();
            // Y_kj for rows below block i, Y_il for columns right of block j.
            if i0 + p < n {
                let m = n - i0 - p;
                rhs -= t.view((i0, i0 + p), (p, m)) * y.view((i0 + p, j0), (m, r));
            }
            if j0 + r < n {
                let m = n - j0 - r;
                rhs -= y.view((i0, j0 + r), (p, m)) * t.view((j0, j0 + r), (r, m)).transpose();
            }
            let tii = t.view((i0, i0), (p, p));
            let tjj = t.view((j0, j0), (r, r));
            // (I_r (x) T_ii + T_jj (x) I_p) vec(Y) = vec(rhs)
            let dim = p * r;
            let mut op = DMatrix::<f64>::zeros(dim, dim);
            for col in 0..r {
                for row in 0..p {
                    let idx = col * p + row;
                    for k in 0..p {
                        op[(idx, col * p + k)] += tii[(row, k)];
                    }
                    for l in 0..r {
                        op[(idx, l * p + row)] += tjj[(col, l)];
                    }
                }
            }
            let scale = tii.abs().max() + tjj.abs().max();
            let lu = op.clone().lu();
            let det = lu.determinant();
            if !(det.abs() > (f64::EPSILON * scale).powi(dim as i32)) {
                return Err(Error::SingularLyapunov);
            }
            let rhs_vec = DMatrix::from_column_slice(dim, 1, rhs.as_slice());
            let sol = lu.solve(&rhs_vec).ok_or(Error::SingularLyapunov)?;
            y.view_mut((i0, j0), (p, r)).copy_from_slice(sol.as_slice());
        }
    }
    Ok(&q * y * q.transpose())
}

/// Reference solver: vectorizes A V + V A^T = -D into the n^2 x n^2 system
/// (I (x) A + A (x) I) vec(V) = -vec(D) and solves it by LU.
pub fn solve_lyapunov_kronecker(a: &DMatrix<f64>, d: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let eye = DMatrix::<f64>::identity(n, n);
    let op = eye.kronecker(a) + a.kronecker(&eye);
    let rhs = -DMatrix::from_column_slice(n * n, 1, d.as_slice());
    let sol = op.lu().solve(&rhs).ok_or(Error::SingularLyapunov)?;
    Ok(DMatrix::from_column_slice(n, n, sol.as_slice()))
}

pub fn reduce_two_mode(cm: &CovarianceMatrix, subsystem: Subsystem) -> TwoModeCM {
    let o = subsystem.offset();
    TwoModeCM { v4: cm.v.fixed_view::<4, 4>(o, o).clone_owned(), subsystem }
}

/// Robertson-Schroedinger check V + i beta/2 >= 0 on the bosonic block
/// (mirrors and fields, first eight components).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalityReport {
    pub min_eigenvalue: f64,
    pub physical: bool,
}

pub fn bosonic_physicality(cm: &CovarianceMatrix) -> PhysicalityReport {
    let v8 = cm.v.fixed_view::<8, 8>(0, 0).clone_owned();
    let h = SMatrix::<Complex<f64>, 8, 8>::from_fn(|i, j| {
        let beta = if i / 2 == j / 2 && i != j {
            if i % 2 == 0 {
                1.0
            } else {
                -1.0
            }
        } else {
            0.0
        };
        Complex::new(v8[(i, j)], 0.5 * beta)
    });
    let min_eigenvalue = h.symmetric_eigenvalues().min();
    PhysicalityReport { min_eigenvalue, physical: min_eigenvalue >= -1e-10 * v8.norm().max(1.0) }
}

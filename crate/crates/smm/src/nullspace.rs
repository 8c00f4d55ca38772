//! Kernel extraction, pseudo-inverse, and singularity diagnostics for task
//! Jacobians.

use nalgebra::{DMatrix, DVector};

use crate::chain::TaskSpec;
use crate::error::{Error, Result};
use crate::kinematics::Jacobian;

/// Relative singular-value tolerance for rank decisions and pseudo-inverse
/// truncation: sigma below `SIGMA_TOL_REL * sigma_max` counts as zero. A
/// relative threshold keeps the test scale-invariant across the mixed
/// rad/m columns of prismatic chains.
pub const SIGMA_TOL_REL: f64 = 1e-8;

/// Norm floor below which an induced kernel direction is unusable.
const KERNEL_NORM_EPS: f64 = 1e-10;

/// A unit kernel direction plus the singular values that witness how close
/// the matrix is to losing a second rank.
#[derive(Debug, Clone)]
pub struct KernelResult {
    /// Unit n-vector spanning the kernel. Sign is whatever the decomposition
    /// produced; directional regularization happens in the integrator.
    pub direction: DVector<f64>,
    /// Smallest singular value (structurally ~0 for a one-dimensional kernel).
    pub sigma_min: f64,
    /// Second-smallest singular value; the rank-deficiency detector.
    pub sigma_second: f64,
}

/// Select the task rows of a Jacobian: plain row selection in rows mode, the
/// projected square Jacobian P*J in induced mode.
pub fn task_jacobian(jac: &Jacobian, task: &TaskSpec) -> Result<DMatrix<f64>> {
    match task {
        TaskSpec::Rows(rows) => {
            let n = jac.matrix.ncols();
            Ok(DMatrix::from_fn(rows.len(), n, |i, j| jac.matrix[(rows[i].index(), j)]))
        }
        TaskSpec::Induced(t) => {
            if jac.frame != t.frame {
                return Err(Error::Validation(format!(
                    "induced task expects the {:?}-frame Jacobian, got {:?}",
                    t.frame, jac.frame
                )));
            }
            let n = jac.matrix.ncols();
            let restricted =
                DMatrix::from_fn(t.restriction.len(), n, |i, j| {
                    jac.matrix[(t.restriction[i].index(), j)]
                });
            Ok(&t.projection * restricted)
        }
    }
}

fn svd_of(a: DMatrix<f64>) -> Result<nalgebra::linalg::SVD<f64, nalgebra::Dyn, nalgebra::Dyn>> {
    a.try_svd(true, true, f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical("SVD did not converge".into()))
}

/// Unit kernel vector of a task Jacobian with a structurally one-dimensional
/// kernel: an (n-1)xn matrix, or a square matrix with rank deficiency one.
///
/// Returns `RankDeficient` when the kernel dimension exceeds one.
pub fn kernel(a: &DMatrix<f64>) -> Result<KernelResult> {
    let (m, n) = a.shape();
    if m > n {
        return Err(Error::DimensionMismatch { expected: n, got: m });
    }
    // Pad to square so the decomposition carries the full right basis; the
    // zero rows leave the singular spectrum intact apart from added zeros.
    let padded = if m < n {
        let mut p = DMatrix::zeros(n, n);
        p.view_mut((0, 0), (m, n)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = svd_of(padded)?;
    let sv = &svd.singular_values;
    let mut idx: Vec<usize> = (0..sv.len()).collect();
    idx.sort_by(|&i, &j| sv[i].partial_cmp(&sv[j]).unwrap());
    let sigma_min = sv[idx[0]];
    let sigma_second = sv[idx[1]];
    let sigma_max = sv[idx[idx.len() - 1]];
    if sigma_second <= SIGMA_TOL_REL * sigma_max {
        return Err(Error::RankDeficient { sigma_min, sigma_second });
    }
    let v_t = svd.v_t.as_ref().expect("SVD computed with right vectors");
    let mut direction: DVector<f64> = v_t.row(idx[0]).transpose();
    direction /= direction.norm();
    Ok(KernelResult { direction, sigma_min, sigma_second })
}

/// SVD-based Moore-Penrose pseudo-inverse with relative truncation.
pub fn pinv(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let svd = svd_of(a.clone())?;
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    svd.pseudo_inverse(SIGMA_TOL_REL * sigma_max)
        .map_err(|e| Error::Numerical(e.into()))
}

/// Kernel of the projected task Jacobian P*J, computed analytically as
/// pinv(J) applied to the projection's kernel direction.
///
/// `j` is the square twist-restricted Jacobian in the task's frame and
/// `u_unit` the unit redundancy direction in the same coordinates.
pub fn induced_kernel(j: &DMatrix<f64>, u_unit: &DVector<f64>) -> Result<KernelResult> {
    if u_unit.norm() < 1e-12 {
        return Err(Error::DegenerateDirection);
    }
    if j.nrows() != j.ncols() || j.nrows() != u_unit.len() {
        return Err(Error::DimensionMismatch { expected: u_unit.len(), got: j.nrows() });
    }
    let svd = svd_of(j.clone())?;
    let sv = &svd.singular_values;
    let mut sorted: Vec<f64> = sv.iter().copied().collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let sigma_min = sorted[0];
    let sigma_second = sorted[1];
    let sigma_max = sorted[sorted.len() - 1];
    if sigma_min <= SIGMA_TOL_REL * sigma_max {
        return Err(Error::RankDeficient { sigma_min, sigma_second });
    }
    let j_pinv = svd
        .pseudo_inverse(SIGMA_TOL_REL * sigma_max)
        .map_err(|e| Error::Numerical(e.into()))?;
    let raw = j_pinv * u_unit;
    let norm = raw.norm();
    if norm < KERNEL_NORM_EPS {
        return Err(Error::DegenerateDirection);
    }
    Ok(KernelResult { direction: raw / norm, sigma_min, sigma_second })
}

//! Induced-redundancy tasks: treating a non-redundant chain as degree-1
//! redundant by projecting a symmetry direction out of its task space.
//!
//! The task keeps every twist component in `restriction` except motion along
//! the unit direction `direction_unit`, which the orthogonal projection
//! `projection = I - u u^T` annihilates. A planar chain restricts the twist to
//! the components spanning its square Jacobian (e.g. vx, vy for an RR arm), so
//! the same machinery covers planar and spatial chains.

use nalgebra::{DMatrix, DVector, Vector3};

use crate::chain::{Frame, TwistRow};
use crate::error::{Error, Result};
use crate::kinematics::{axis_deflection, pose_error, Pose};

const DIRECTION_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct InducedTask {
    /// Twist components spanning the chain's square task Jacobian.
    pub restriction: Vec<TwistRow>,
    /// Redundancy direction as given, in restriction coordinates.
    pub direction_raw: DVector<f64>,
    /// Normalized redundancy direction.
    pub direction_unit: DVector<f64>,
    /// Frame the direction (and the task Jacobian) is expressed in.
    pub frame: Frame,
    /// Orthogonal projection with kernel span{direction_unit}.
    pub projection: DMatrix<f64>,
}

impl InducedTask {
    /// Embed the unit direction into full 6-twist coordinates.
    pub fn direction_6d(&self) -> nalgebra::Vector6<f64> {
        let mut u = nalgebra::Vector6::zeros();
        for (i, row) in self.restriction.iter().enumerate() {
            u[row.index()] = self.direction_unit[i];
        }
        u
    }

    /// True when the direction mixes translational (m) and rotational (rad)
    /// components, so its normalization mixes units.
    pub fn mixed_units(&self) -> bool {
        let mut linear = false;
        let mut angular = false;
        for (i, row) in self.restriction.iter().enumerate() {
            if self.direction_unit[i].abs() > DIRECTION_EPS {
                if row.is_angular() {
                    angular = true;
                } else {
                    linear = true;
                }
            }
        }
        linear && angular
    }
}

/// Build an induced-redundancy task from a direction in the coordinates of
/// `restriction` (the twist components spanning the chain's square Jacobian).
pub fn make_induced_task(u: &[f64], restriction: &[TwistRow], frame: Frame) -> Result<InducedTask> {
    let raw = DVector::from_column_slice(u);
    if raw.len() != restriction.len() {
        return Err(Error::DimensionMismatch { expected: restriction.len(), got: raw.len() });
    }
    let norm = raw.norm();
    if norm < DIRECTION_EPS {
        return Err(Error::DegenerateDirection);
    }
    let unit = &raw / norm;
    let d = restriction.len();
    let projection = DMatrix::identity(d, d) - &unit * unit.transpose();
    Ok(InducedTask {
        restriction: restriction.to_vec(),
        direction_raw: raw,
        direction_unit: unit,
        frame,
        projection,
    })
}

/// Deviation of `current` from the symmetry subspace anchored at `seed_pose`.
#[derive(Debug, Clone, Copy)]
pub struct InducedResidual {
    /// Position deviation in meters.
    pub position: f64,
    /// Angular deviation in radians.
    pub angular: f64,
}

impl InducedResidual {
    pub fn max(&self) -> f64 {
        self.position.max(self.angular)
    }
}

fn split_direction(task: &InducedTask) -> (Vector3<f64>, Vector3<f64>) {
    let u6 = task.direction_6d();
    (Vector3::new(u6[0], u6[1], u6[2]), Vector3::new(u6[3], u6[4], u6[5]))
}

/// Measure how far `current` has left the task subspace defined by the seed
/// pose and the redundancy direction.
///
/// For a translational direction the position residual is the perpendicular
/// distance from the line through the seed position; for a rotational
/// direction it is the full position error and the angular residual is the
/// deflection of the rotation axis itself. Mixed directions fall back to the
/// projected pose error.
pub fn induced_residual(seed_pose: &Pose, current: &Pose, task: &InducedTask) -> InducedResidual {
    let (u_lin, u_ang) = split_direction(task);
    let translational = u_lin.norm() > DIRECTION_EPS && u_ang.norm() <= DIRECTION_EPS;
    let rotational = u_ang.norm() > DIRECTION_EPS && u_lin.norm() <= DIRECTION_EPS;

    if translational {
        let dir = match task.frame {
            Frame::Base => u_lin.normalize(),
            Frame::Tool => (seed_pose.rotation * u_lin).normalize(),
        };
        let dp = current.translation.vector - seed_pose.translation.vector;
        let perp = dp - dir * dp.dot(&dir);
        // Angular part: whatever rotational rows the restriction constrains.
        let err = pose_error(seed_pose, current);
        let mut ang_sq = 0.0;
        for row in &task.restriction {
            if row.is_angular() {
                ang_sq += err[row.index()] * err[row.index()];
            }
        }
        InducedResidual { position: perp.norm(), angular: ang_sq.sqrt() }
    } else if rotational {
        let dp = current.translation.vector - seed_pose.translation.vector;
        let axis = u_ang.normalize();
        let angular = match task.frame {
            Frame::Tool => axis_deflection(seed_pose, current, &axis),
            Frame::Base => {
                // Symmetry under rotation about a fixed base axis: measure how
                // far that axis moves under the relative rotation.
                let rel = current.rotation * seed_pose.rotation.inverse();
                let moved = rel * axis;
                moved.dot(&axis).clamp(-1.0, 1.0).acos()
            }
        };
        InducedResidual { position: dp.norm(), angular }
    } else {
        // Mixed units: project the restricted pose error and split the norms.
        let err = pose_error(seed_pose, current);
        let restricted = DVector::from_iterator(
            task.restriction.len(),
            task.restriction.iter().map(|row| err[row.index()]),
        );
        let projected = &task.projection * restricted;
        let mut lin_sq = 0.0;
        let mut ang_sq = 0.0;
        for (i, row) in task.restriction.iter().enumerate() {
            if row.is_angular() {
                ang_sq += projected[i] * projected[i];
            } else {
                lin_sq += projected[i] * projected[i];
            }
        }
        InducedResidual { position: lin_sq.sqrt(), angular: ang_sq.sqrt() }
    }
}

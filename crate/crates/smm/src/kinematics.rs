//! Forward kinematics, geometric Jacobians, and SE(3) error metrics.

use nalgebra::{DVector, Isometry3, Matrix6xX, Vector3, Vector6};

use crate::chain::{ChainModel, Frame, JointKind};
use crate::error::{Error, Result};

/// A configuration q: radians for revolute entries, meters for prismatic.
pub type JointConfig = DVector<f64>;

/// An end-effector pose in the base frame.
pub type Pose = Isometry3<f64>;

fn check_dim(model: &ChainModel, q: &JointConfig) -> Result<()> {
    if q.len() != model.n() {
        return Err(Error::DimensionMismatch { expected: model.n(), got: q.len() });
    }
    Ok(())
}

/// Forward kinematics: compose the joint transforms, then the tool transform.
pub fn fk(model: &ChainModel, q: &JointConfig) -> Result<Pose> {
    check_dim(model, q)?;
    let mut iso = Isometry3::identity();
    for (joint, &value) in model.joints.iter().zip(q.iter()) {
        iso *= joint.origin.isometry();
        iso *= joint.motion(value);
    }
    Ok(iso * model.tool_isometry())
}

/// The 6xn geometric Jacobian, rows ordered (vx, vy, vz, wx, wy, wz).
#[derive(Debug, Clone)]
pub struct Jacobian {
    pub matrix: Matrix6xX<f64>,
    pub frame: Frame,
}

/// Geometric Jacobian of the end-effector.
///
/// Revolute column i is (z_i x (p_e - p_i); z_i); a prismatic column is
/// (z_i; 0). `Frame::Tool` rotates both blocks into the end-effector frame.
pub fn jacobian(model: &ChainModel, q: &JointConfig, frame: Frame) -> Result<Jacobian> {
    check_dim(model, q)?;
    let n = model.n();
    let mut axes = Vec::with_capacity(n);
    let mut origins = Vec::with_capacity(n);
    let mut iso = Isometry3::identity();
    for (joint, &value) in model.joints.iter().zip(q.iter()) {
        iso *= joint.origin.isometry();
        axes.push(iso.rotation * joint.axis);
        origins.push(iso.translation.vector);
        iso *= joint.motion(value);
    }
    let ee = iso * model.tool_isometry();
    let p_e = ee.translation.vector;

    let mut m = Matrix6xX::zeros(n);
    for i in 0..n {
        let z: Vector3<f64> = axes[i];
        let (linear, angular) = match model.joints[i].kind {
            JointKind::Revolute => (z.cross(&(p_e - origins[i])), z),
            JointKind::Prismatic => (z, Vector3::zeros()),
        };
        m.fixed_view_mut::<3, 1>(0, i).copy_from(&linear);
        m.fixed_view_mut::<3, 1>(3, i).copy_from(&angular);
    }
    if frame == Frame::Tool {
        let r_inv = ee.rotation.inverse();
        for i in 0..n {
            let lin = r_inv * Vector3::new(m[(0, i)], m[(1, i)], m[(2, i)]);
            let ang = r_inv * Vector3::new(m[(3, i)], m[(4, i)], m[(5, i)]);
            m.fixed_view_mut::<3, 1>(0, i).copy_from(&lin);
            m.fixed_view_mut::<3, 1>(3, i).copy_from(&ang);
        }
    }
    Ok(Jacobian { matrix: m, frame })
}

/// Pose error from `a` to `b`: translation difference stacked on the
/// angle-axis vector of a^T b, with the angle in [0, pi].
pub fn pose_error(a: &Pose, b: &Pose) -> Vector6<f64> {
    let dp = b.translation.vector - a.translation.vector;
    let rel = a.rotation.inverse() * b.rotation;
    let w = rel.scaled_axis();
    Vector6::new(dp.x, dp.y, dp.z, w.x, w.y, w.z)
}

/// Angle between the images of a body-frame `axis` under the two rotations,
/// clamped to [0, pi].
pub fn axis_deflection(a: &Pose, b: &Pose, axis: &Vector3<f64>) -> f64 {
    let va = a.rotation * axis;
    let vb = b.rotation * axis;
    va.dot(&vb).clamp(-1.0, 1.0).acos()
}

/// Pose error from `a` to `b` expressed in the frame a geometric Jacobian of
/// that frame acts in: base-frame errors pair with the base Jacobian
/// (spatial angular part), tool-frame errors with the tool Jacobian.
pub(crate) fn frame_error(a: &Pose, b: &Pose, frame: Frame) -> Vector6<f64> {
    match frame {
        Frame::Base => {
            let dp = b.translation.vector - a.translation.vector;
            let w = (b.rotation * a.rotation.inverse()).scaled_axis();
            Vector6::new(dp.x, dp.y, dp.z, w.x, w.y, w.z)
        }
        Frame::Tool => {
            let r_inv = a.rotation.inverse();
            let dp = r_inv * (b.translation.vector - a.translation.vector);
            let w = (r_inv * b.rotation).scaled_axis();
            Vector6::new(dp.x, dp.y, dp.z, w.x, w.y, w.z)
        }
    }
}

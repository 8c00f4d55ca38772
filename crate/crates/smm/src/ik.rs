//! Unconstrained gradient-based inverse kinematics: damped-least-squares
//! iteration, random-restart seed generation, and the analytic elbow-toggle
//! seed constructor for planar 3R chains.

use nalgebra::{DMatrix, DVector, Vector2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::chain::{wrap_angle, ChainModel, JointKind, TaskSpec};
use crate::error::{Error, Result};
use crate::kinematics::{fk, jacobian, JointConfig, Pose};
use crate::nullspace::task_jacobian;

#[derive(Debug, Clone)]
pub struct IkConfig {
    /// Damped-least-squares damping factor.
    pub damping: f64,
    /// Residual norm below which the iteration stops.
    pub tol: f64,
    pub max_iters: usize,
    /// Seed for the joint-limit-uniform restart sampler.
    pub sampler_seed: u64,
}

impl Default for IkConfig {
    fn default() -> Self {
        IkConfig { damping: 1e-3, tol: 1e-10, max_iters: 500, sampler_seed: 0 }
    }
}

impl IkConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.sampler_seed = seed;
        self
    }
}

/// Configurations solving one task pose, with the count of restarts that
/// failed to converge.
#[derive(Debug, Clone)]
pub struct SeedSet {
    pub configs: Vec<JointConfig>,
    pub failures: usize,
}

/// Task residual for the iteration: selected pose-error components in rows
/// mode, the projected restricted error for induced tasks. The error is
/// expressed in the task's frame so it pairs with the task Jacobian.
pub(crate) fn task_residual(
    model: &ChainModel,
    task: &TaskSpec,
    q: &JointConfig,
    target: &Pose,
) -> Result<DVector<f64>> {
    let pose = fk(model, q)?;
    let e = crate::kinematics::frame_error(&pose, target, task.frame());
    match task {
        TaskSpec::Rows(rows) => {
            Ok(DVector::from_iterator(rows.len(), rows.iter().map(|r| e[r.index()])))
        }
        TaskSpec::Induced(t) => {
            let restricted = DVector::from_iterator(
                t.restriction.len(),
                t.restriction.iter().map(|r| e[r.index()]),
            );
            Ok(&t.projection * restricted)
        }
    }
}

/// Damped-least-squares IK: q <- q + J^T (J J^T + lambda^2 I)^-1 e, ignoring
/// joint limits. Returns the first iterate whose residual drops below the
/// configured tolerance.
pub fn solve_ik(
    model: &ChainModel,
    task: &TaskSpec,
    target: &Pose,
    q_init: &JointConfig,
    cfg: &IkConfig,
) -> Result<JointConfig> {
    let mut q = q_init.clone();
    let mut residual_norm = f64::INFINITY;
    for _ in 0..cfg.max_iters {
        let e = task_residual(model, task, &q, target)?;
        residual_norm = e.norm();
        if residual_norm < cfg.tol {
            return Ok(q);
        }
        let jac = jacobian(model, &q, task.frame())?;
        let j = task_jacobian(&jac, task)?;
        let m = j.nrows();
        let a = &j * j.transpose() + DMatrix::identity(m, m) * (cfg.damping * cfg.damping);
        let x = nalgebra::linalg::Cholesky::new(a)
            .ok_or_else(|| Error::Numerical("DLS normal matrix not positive definite".into()))?
            .solve(&e);
        q += j.transpose() * x;
    }
    Err(Error::NoConvergence { iters: cfg.max_iters, residual: residual_norm })
}

fn sample_in_limits(model: &ChainModel, rng: &mut impl Rng) -> JointConfig {
    DVector::from_iterator(
        model.n(),
        model.joints.iter().map(|j| rng.random_range(j.limits[0]..=j.limits[1])),
    )
}

/// Run `n` independently seeded random-restart IK solves and collect the
/// converged solutions. Restart `i` draws from its own deterministic stream,
/// so the result is reproducible regardless of evaluation order.
pub fn random_restart_seeds(
    model: &ChainModel,
    task: &TaskSpec,
    target: &Pose,
    n: usize,
    cfg: &IkConfig,
) -> Result<SeedSet> {
    if n == 0 {
        return Err(Error::Validation("restart count must be at least 1".into()));
    }
    let mut configs = Vec::new();
    let mut failures = 0;
    for i in 0..n {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.sampler_seed);
        rng.set_stream(i as u64);
        let q_init = sample_in_limits(model, &mut rng);
        match solve_ik(model, task, target, &q_init, cfg) {
            Ok(q) => configs.push(q),
            Err(Error::NoConvergence { .. }) => failures += 1,
            Err(e) => return Err(e),
        }
    }
    if configs.is_empty() {
        return Err(Error::AllFailed { attempts: n });
    }
    Ok(SeedSet { configs, failures })
}

/// 2D joint positions of a planar 3R chain at `q`: the three joint points
/// plus the end-effector.
fn planar_points(model: &ChainModel, q: &JointConfig) -> Result<[Vector2<f64>; 4]> {
    let mut iso = nalgebra::Isometry3::identity();
    let mut pts = [Vector2::zeros(); 4];
    for (i, (joint, &value)) in model.joints.iter().zip(q.iter()).enumerate() {
        iso *= joint.origin.isometry();
        pts[i] = Vector2::new(iso.translation.x, iso.translation.y);
        iso *= joint.motion(value);
    }
    let ee = iso * model.tool_isometry();
    pts[3] = Vector2::new(ee.translation.x, ee.translation.y);
    if iso.translation.z.abs() > 1e-9 || ee.translation.z.abs() > 1e-9 {
        return Err(Error::Validation("chain does not stay in the base xy-plane".into()));
    }
    Ok(pts)
}

fn angle_of(v: &Vector2<f64>) -> f64 {
    v.y.atan2(v.x)
}

/// Reflect `p` across the line through `a` and `b`.
fn reflect_across(p: &Vector2<f64>, a: &Vector2<f64>, b: &Vector2<f64>) -> Vector2<f64> {
    let d = (b - a).normalize();
    let ap = p - a;
    a + d * ap.dot(&d) * 2.0 - ap
}

/// Sine of the angle at `p` between the chords to `a` and `b`; near zero the
/// two analytic 2R branches coincide.
fn branch_sine(a: &Vector2<f64>, p: &Vector2<f64>, b: &Vector2<f64>) -> f64 {
    let u = p - a;
    let v = b - p;
    let cross = u.x * v.y - u.y * v.x;
    let denom = u.norm() * v.norm();
    if denom == 0.0 {
        0.0
    } else {
        cross / denom
    }
}

/// Elbow-toggle seed constructor for a planar 3R chain: reflect each of the
/// two interior 2R subchains to its other analytic branch, patching the
/// neighboring joints so the end-effector point is preserved exactly.
///
/// Returns {q0, q1, q2}: the input plus one toggle per elbow. Toggling both
/// elbows adds nothing for component search, so that configuration is not
/// generated.
pub fn toggle_seeds_rrr(model: &ChainModel, q0: &JointConfig) -> Result<SeedSet> {
    if model.n() != 3 || model.joints.iter().any(|j| j.kind != JointKind::Revolute) {
        return Err(Error::Validation("elbow toggling needs a 3-revolute planar chain".into()));
    }
    for joint in &model.joints {
        if (joint.axis - nalgebra::Vector3::z()).norm() > 1e-9 {
            return Err(Error::Validation("elbow toggling needs all joint axes along +z".into()));
        }
    }
    if q0.len() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, got: q0.len() });
    }
    let [p0, p1, p2, pe] = planar_points(model, q0)?;

    // Elbow 1: reflect the joint-2 point across the chord from the base to
    // the joint-3 point; joint 3 keeps its absolute link angle.
    if branch_sine(&p0, &p1, &p2).abs() < 1e-9 {
        return Err(Error::DegenerateToggle);
    }
    let r1 = reflect_across(&p1, &p0, &p2);
    let d_theta1 = wrap_angle(angle_of(&(r1 - p0)) - angle_of(&(p1 - p0)));
    let d_theta2 = wrap_angle(angle_of(&(p2 - r1)) - angle_of(&(p2 - p1)));
    let q1 = DVector::from_column_slice(&[
        wrap_angle(q0[0] + d_theta1),
        wrap_angle(q0[1] + d_theta2 - d_theta1),
        wrap_angle(q0[2] - d_theta2),
    ]);

    // Elbow 2: reflect the joint-3 point across the chord from the joint-2
    // point to the end-effector; joint 1 is untouched.
    if branch_sine(&p1, &p2, &pe).abs() < 1e-9 {
        return Err(Error::DegenerateToggle);
    }
    let r2 = reflect_across(&p2, &p1, &pe);
    let d_theta2b = wrap_angle(angle_of(&(r2 - p1)) - angle_of(&(p2 - p1)));
    let d_theta3b = wrap_angle(angle_of(&(pe - r2)) - angle_of(&(pe - p2)));
    let q2 = DVector::from_column_slice(&[
        q0[0],
        wrap_angle(q0[1] + d_theta2b),
        wrap_angle(q0[2] + d_theta3b - d_theta2b),
    ]);

    Ok(SeedSet { configs: vec![q0.clone(), q1, q2], failures: 0 })
}

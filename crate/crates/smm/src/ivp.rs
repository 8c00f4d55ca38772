//! The directionally regularized kernel ODE and its fixed-step Runge-Kutta
//! integration: trace a one-dimensional self-motion manifold from a seed
//! configuration until it closes on itself, hits a singularity, or runs out
//! of steps.
//!
//! The field at a configuration is the unit kernel vector of the task
//! Jacobian, sign-picked to keep a positive inner product with a reference
//! heading. All stage evaluations within one step share the step's reference;
//! the reference itself is re-regularized once per step against its
//! predecessor, which keeps the traced direction continuous even though the
//! raw kernel sign is arbitrary.

use nalgebra::DVector;

use crate::chain::{ChainModel, TaskSpec};
use crate::error::{Error, Result};
use crate::induced::induced_residual;
use crate::kinematics::{fk, jacobian, JointConfig, Pose};
use crate::nullspace::{induced_kernel, kernel, pinv, task_jacobian, KernelResult};

/// Residual above which a configuration is rejected as a trace seed.
pub const SEED_RESIDUAL_TOL: f64 = 1e-6;

/// An explicit Butcher tableau. Row i of `a` holds the i coefficients
/// feeding stage i+1; `b` are the solution weights, `c` the nodes.
#[derive(Debug, Clone)]
pub struct ButcherTableau {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

impl ButcherTableau {
    /// Fifth-order, six-stage tableau: the fifth-order solution row of the
    /// Dormand-Prince 5(4) pair.
    pub fn rk5() -> Self {
        ButcherTableau {
            a: vec![
                vec![],
                vec![1.0 / 5.0],
                vec![3.0 / 40.0, 9.0 / 40.0],
                vec![44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0],
                vec![19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0],
                vec![
                    9017.0 / 3168.0,
                    -355.0 / 33.0,
                    46732.0 / 5247.0,
                    49.0 / 176.0,
                    -5103.0 / 18656.0,
                ],
            ],
            b: vec![
                35.0 / 384.0,
                0.0,
                500.0 / 1113.0,
                125.0 / 192.0,
                -2187.0 / 6784.0,
                11.0 / 84.0,
            ],
            c: vec![0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0],
        }
    }

    /// Classic fourth-order tableau, kept for step-size experiments.
    pub fn rk4() -> Self {
        ButcherTableau {
            a: vec![vec![], vec![0.5], vec![0.0, 0.5], vec![0.0, 0.0, 1.0]],
            b: vec![1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0],
            c: vec![0.0, 0.5, 0.5, 1.0],
        }
    }

    pub fn stages(&self) -> usize {
        self.b.len()
    }

    pub fn validate(&self) -> Result<()> {
        let s = self.stages();
        if s == 0 || self.a.len() != s || self.c.len() != s {
            return Err(Error::Validation("tableau arrays must share the stage count".into()));
        }
        for (i, row) in self.a.iter().enumerate() {
            if row.len() != i {
                return Err(Error::Validation(format!(
                    "tableau must be explicit: stage {i} has {} coefficients",
                    row.len()
                )));
            }
        }
        let sum: f64 = self.b.iter().sum();
        if (sum - 1.0).abs() > 1e-14 {
            return Err(Error::Validation(format!("tableau weights sum to {sum}, not 1")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct IntegratorConfig {
    /// Joint-space arc length advanced per step.
    pub h: f64,
    pub tableau: ButcherTableau,
    pub max_steps: usize,
    /// Steps to take before the closure test may fire.
    pub min_steps_before_closure: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            h: 0.05,
            tableau: ButcherTableau::rk5(),
            max_steps: 100_000,
            min_steps_before_closure: 10,
        }
    }
}

impl IntegratorConfig {
    pub fn with_h(mut self, h: f64) -> Self {
        self.h = h;
        self
    }

    pub fn with_max_steps(mut self, max_steps: usize) -> Self {
        self.max_steps = max_steps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.h.is_nan() || self.h <= 0.0 {
            return Err(Error::Validation("step size must be positive".into()));
        }
        self.tableau.validate()
    }
}

/// How a trace ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// Returned to within one step of the seed.
    Closed,
    /// Hit a rank-deficient or degenerate configuration mid-trace; the trace
    /// is open and covers both directions from the seed.
    Singular,
    /// Ran out of the step budget.
    StepLimit,
}

/// An ordered sampling of one self-motion manifold component.
#[derive(Debug, Clone)]
pub struct Trace {
    pub samples: Vec<JointConfig>,
    /// Reference direction used at each sample, aligned with traversal order.
    pub refs: Vec<DVector<f64>>,
    pub h: f64,
    pub closed: bool,
    pub termination: Termination,
}

impl Trace {
    /// Total traced length: steps times step size.
    pub fn arc_length(&self) -> f64 {
        (self.samples.len().saturating_sub(1)) as f64 * self.h
    }
}

fn raw_kernel(model: &ChainModel, task: &TaskSpec, q: &JointConfig) -> Result<KernelResult> {
    let jac = jacobian(model, q, task.frame())?;
    match task {
        TaskSpec::Rows(_) => {
            let a = task_jacobian(&jac, task)?;
            kernel(&a)
        }
        TaskSpec::Induced(t) => {
            let n = t.restriction.len();
            let j_sq = nalgebra::DMatrix::from_fn(n, n, |i, j| {
                jac.matrix[(t.restriction[i].index(), j)]
            });
            induced_kernel(&j_sq, &t.direction_unit)
        }
    }
}

/// The directionally regularized field: the unit kernel vector whose sign
/// keeps a positive inner product with `reference`. A zero inner product
/// takes the negative branch.
pub fn regularized_field(
    model: &ChainModel,
    task: &TaskSpec,
    q: &JointConfig,
    reference: &DVector<f64>,
) -> Result<(DVector<f64>, KernelResult)> {
    let k = raw_kernel(model, task, q)?;
    let direction =
        if k.direction.dot(reference) > 0.0 { k.direction.clone() } else { -k.direction.clone() };
    Ok((direction, k))
}

/// Per-step reference update: the regularized field at the current sample,
/// or the raw kernel sign at the very first one.
pub fn update_reference(
    model: &ChainModel,
    task: &TaskSpec,
    q: &JointConfig,
    ref_prev: Option<&DVector<f64>>,
) -> Result<DVector<f64>> {
    match ref_prev {
        Some(r) => Ok(regularized_field(model, task, q, r)?.0),
        None => Ok(raw_kernel(model, task, q)?.direction),
    }
}

/// One explicit Runge-Kutta step of a generic field. `first_stage` supplies a
/// precomputed value of the field at `q` (the autonomous field makes stage 0
/// identical to the step reference when that reference was just evaluated
/// there).
fn rk_step_with<F>(
    field: F,
    q: &JointConfig,
    cfg: &IntegratorConfig,
    first_stage: Option<&DVector<f64>>,
) -> Result<JointConfig>
where
    F: Fn(&JointConfig) -> Result<DVector<f64>>,
{
    let tableau = &cfg.tableau;
    let s = tableau.stages();
    let mut k: Vec<DVector<f64>> = Vec::with_capacity(s);
    for i in 0..s {
        let stage_q = if i == 0 {
            q.clone()
        } else {
            let mut y = q.clone();
            for (j, &a_ij) in tableau.a[i].iter().enumerate() {
                if a_ij != 0.0 {
                    y += cfg.h * a_ij * &k[j];
                }
            }
            y
        };
        let ki = if i == 0 {
            match first_stage {
                Some(f) => f.clone(),
                None => field(&stage_q)
                    .map_err(|e| Error::Stage { stage: i, source: Box::new(e) })?,
            }
        } else {
            field(&stage_q).map_err(|e| Error::Stage { stage: i, source: Box::new(e) })?
        };
        k.push(ki);
    }
    let mut next = q.clone();
    for (i, &b_i) in tableau.b.iter().enumerate() {
        if b_i != 0.0 {
            next += cfg.h * b_i * &k[i];
        }
    }
    Ok(next)
}

/// One Runge-Kutta step of the regularized field. Every stage uses the same
/// reference `ref_n`.
pub fn rk_step(
    model: &ChainModel,
    task: &TaskSpec,
    q: &JointConfig,
    ref_n: &DVector<f64>,
    cfg: &IntegratorConfig,
) -> Result<JointConfig> {
    rk_step_with(
        |y| regularized_field(model, task, y, ref_n).map(|(d, _)| d),
        q,
        cfg,
        None,
    )
}

enum BranchEnd {
    Closed,
    Singular,
    StepLimit,
}

struct Branch {
    samples: Vec<JointConfig>,
    refs: Vec<DVector<f64>>,
    end: BranchEnd,
}

fn integrate_branch(
    model: &ChainModel,
    task: &TaskSpec,
    q0: &JointConfig,
    ref0: DVector<f64>,
    cfg: &IntegratorConfig,
    step_budget: usize,
) -> Result<Branch> {
    let mut samples = vec![q0.clone()];
    let mut refs = vec![ref0];
    let mut end = BranchEnd::StepLimit;
    for step in 0..step_budget {
        let current = &samples[samples.len() - 1];
        let current_ref = &refs[refs.len() - 1];
        let next = match rk_step_with(
            |y| regularized_field(model, task, y, current_ref).map(|(d, _)| d),
            current,
            cfg,
            Some(current_ref),
        ) {
            Ok(next) => next,
            Err(e) if e.is_singular() => {
                end = BranchEnd::Singular;
                break;
            }
            Err(e) => return Err(e),
        };
        // The reference at the new sample doubles as the first stage of the
        // following step; if it cannot be computed the step is not accepted.
        let next_ref = match regularized_field(model, task, &next, current_ref) {
            Ok((r, _)) => r,
            Err(e) if e.is_singular() => {
                end = BranchEnd::Singular;
                break;
            }
            Err(e) => return Err(e),
        };
        samples.push(next);
        refs.push(next_ref);
        if step + 1 >= cfg.min_steps_before_closure
            && model.joint_distance(&samples[samples.len() - 1], q0) < cfg.h
        {
            end = BranchEnd::Closed;
            break;
        }
    }
    Ok(Branch { samples, refs, end })
}

/// Task residual of `q` against a seed pose, measured the way the trace
/// invariants are: selected pose-error rows for a rows task, subspace
/// deviation for an induced task.
pub fn seed_residual(
    model: &ChainModel,
    task: &TaskSpec,
    q: &JointConfig,
    seed_pose: &Pose,
) -> Result<f64> {
    let pose = fk(model, q)?;
    match task {
        TaskSpec::Rows(rows) => {
            let e = crate::kinematics::pose_error(seed_pose, &pose);
            Ok(rows.iter().map(|r| e[r.index()] * e[r.index()]).sum::<f64>().sqrt())
        }
        TaskSpec::Induced(t) => Ok(induced_residual(seed_pose, &pose, t).max()),
    }
}

/// Integrate the self-motion manifold through `q0`, taking the task pose to
/// be the forward kinematics of `q0` itself.
pub fn solve_smm_ivp(
    model: &ChainModel,
    task: &TaskSpec,
    q0: &JointConfig,
    cfg: &IntegratorConfig,
) -> Result<Trace> {
    let seed_pose = fk(model, q0)?;
    solve_smm_ivp_from(model, task, &seed_pose, q0, cfg)
}

/// Integrate the self-motion manifold of `seed_pose` starting from `q0`.
///
/// Returns a closed trace when the integration comes back to within one step
/// of `q0`. A mid-trace singularity triggers a second integration from `q0`
/// with the opposite initial heading; the two branches are concatenated into
/// one open trace that covers both sides of the seed.
pub fn solve_smm_ivp_from(
    model: &ChainModel,
    task: &TaskSpec,
    seed_pose: &Pose,
    q0: &JointConfig,
    cfg: &IntegratorConfig,
) -> Result<Trace> {
    cfg.validate()?;
    task.validate(model)?;
    let residual = seed_residual(model, task, q0, seed_pose)?;
    if residual > SEED_RESIDUAL_TOL {
        return Err(Error::InvalidSeed { residual });
    }
    let start = match raw_kernel(model, task, q0) {
        Ok(k) => k,
        Err(e) if e.is_singular() => return Err(Error::SingularStart(Box::new(e))),
        Err(e) => return Err(e),
    };
    let forward = integrate_branch(model, task, q0, start.direction.clone(), cfg, cfg.max_steps)?;
    match forward.end {
        BranchEnd::Closed => Ok(Trace {
            samples: forward.samples,
            refs: forward.refs,
            h: cfg.h,
            closed: true,
            termination: Termination::Closed,
        }),
        BranchEnd::StepLimit => Ok(Trace {
            samples: forward.samples,
            refs: forward.refs,
            h: cfg.h,
            closed: false,
            termination: Termination::StepLimit,
        }),
        BranchEnd::Singular => {
            let budget = cfg.max_steps.saturating_sub(forward.samples.len() - 1);
            let reverse =
                integrate_branch(model, task, q0, -start.direction, cfg, budget)?;
            // Reverse-branch samples walk away from q0 in the opposite
            // heading; reversing their order (and flipping their references)
            // yields one trace traversed consistently front to back.
            let mut samples: Vec<JointConfig> =
                reverse.samples.into_iter().skip(1).rev().collect();
            let mut refs: Vec<DVector<f64>> =
                reverse.refs.into_iter().skip(1).map(|r| -r).rev().collect();
            samples.extend(forward.samples);
            refs.extend(forward.refs);
            Ok(Trace {
                samples,
                refs,
                h: cfg.h,
                closed: false,
                termination: Termination::Singular,
            })
        }
    }
}

/// Classical Euler-plus-projection update, kept as a drift comparator for the
/// Runge-Kutta tracer: q + gamma*g(q) + pinv(J_task) * (task residual toward
/// the seed pose).
pub fn baseline_step(
    model: &ChainModel,
    task: &TaskSpec,
    seed_pose: &Pose,
    q: &JointConfig,
    reference: &DVector<f64>,
    gamma: f64,
) -> Result<JointConfig> {
    let (g, _) = regularized_field(model, task, q, reference)?;
    let jac = jacobian(model, q, task.frame())?;
    let a = task_jacobian(&jac, task)?;
    let residual = crate::ik::task_residual(model, task, q, seed_pose)?;
    let correction = pinv(&a)? * residual;
    Ok(q + gamma * g + correction)
}

//! Search for disconnected self-motion manifold components: rejection
//! sampling over a seed set with a point-to-set distance guard, plus the
//! joint-limit usability filter and the workspace sweep driver.

use nalgebra::DVector;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::chain::{ChainModel, TaskSpec};
use crate::error::{Error, Result};
use crate::ik::{random_restart_seeds, IkConfig, SeedSet};
use crate::ivp::{solve_smm_ivp_from, IntegratorConfig, Trace};
use crate::kinematics::{fk, jacobian, JointConfig, Pose};
use crate::nullspace::{task_jacobian, SIGMA_TOL_REL};

/// The components found for one task pose, with seed provenance.
#[derive(Debug, Clone)]
pub struct ComponentSet {
    pub components: Vec<Trace>,
    /// Seed that spawned each component, index-aligned with `components`.
    pub seeds_used: Vec<JointConfig>,
    /// Seeds absorbed by the distance test (already on a found component).
    pub seeds_rejected: Vec<JointConfig>,
    /// Seeds whose trace could not start, with the reason.
    pub seeds_failed: Vec<(JointConfig, String)>,
    /// The shared task pose.
    pub pose: Pose,
}

/// Minimum wrapped joint-space distance from `q` to the samples of a trace.
pub fn point_to_set_distance(model: &ChainModel, q: &JointConfig, trace: &Trace) -> Result<f64> {
    if trace.samples.is_empty() {
        return Err(Error::EmptyTrace);
    }
    Ok(trace
        .samples
        .iter()
        .map(|p| model.joint_distance(q, p))
        .fold(f64::INFINITY, f64::min))
}

/// Component search by rejection sampling: the first seed always spawns a
/// trace; each later seed spawns one only when it sits farther than one
/// integration step from every component found so far.
pub fn search_components(
    model: &ChainModel,
    task: &TaskSpec,
    seeds: &SeedSet,
    cfg: &IntegratorConfig,
) -> Result<ComponentSet> {
    if seeds.configs.is_empty() {
        return Err(Error::Validation("seed set must be nonempty".into()));
    }
    let pose = fk(model, &seeds.configs[0])?;
    let mut set = ComponentSet {
        components: Vec::new(),
        seeds_used: Vec::new(),
        seeds_rejected: Vec::new(),
        seeds_failed: Vec::new(),
        pose,
    };
    for (i, q) in seeds.configs.iter().enumerate() {
        if i > 0 {
            let represented = set
                .components
                .iter()
                .any(|t| point_to_set_distance(model, q, t).map(|d| d <= cfg.h).unwrap_or(false));
            if represented {
                set.seeds_rejected.push(q.clone());
                continue;
            }
        }
        match solve_smm_ivp_from(model, task, &set.pose, q, cfg) {
            Ok(trace) => {
                set.components.push(trace);
                set.seeds_used.push(q.clone());
            }
            Err(e @ (Error::SingularStart(_) | Error::InvalidSeed { .. })) => {
                set.seeds_failed.push((q.clone(), e.to_string()));
            }
            Err(e) => return Err(e),
        }
    }
    Ok(set)
}

/// Indices of the components that keep at least one sample inside every
/// joint limit (revolute coordinates taken modulo 2*pi).
pub fn usable_components(set: &ComponentSet, model: &ChainModel) -> Vec<usize> {
    set.components
        .iter()
        .enumerate()
        .filter(|(_, trace)| {
            trace.samples.iter().any(|q| {
                (0..model.n()).all(|i| model.within_limits(i, q[i]))
            })
        })
        .map(|(i, _)| i)
        .collect()
}

/// One row of a workspace sweep.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub pose_id: usize,
    pub component_count: usize,
    pub usable_count: usize,
    pub near_singular: bool,
    pub position: [f64; 3],
    pub rpy: [f64; 3],
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// Poses whose seeding failed outright, with the reason.
    pub failures: Vec<(usize, String)>,
}

/// splitmix64, used to derive independent per-pose seeds.
fn mix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn sweep_one_pose(
    model: &ChainModel,
    task: &TaskSpec,
    pose_id: usize,
    n_restarts: usize,
    ik_cfg: &IkConfig,
    cfg: &IntegratorConfig,
    sampler_seed: u64,
) -> Result<SweepRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(mix(sampler_seed ^ mix(pose_id as u64)));
    let q_sample = DVector::from_iterator(
        model.n(),
        model.joints.iter().map(|j| rng.random_range(j.limits[0]..=j.limits[1])),
    );
    let pose = fk(model, &q_sample)?;
    let ik = IkConfig {
        sampler_seed: mix(sampler_seed ^ mix(pose_id as u64 ^ 0x5eed)),
        ..ik_cfg.clone()
    };
    let seeds = random_restart_seeds(model, task, &pose, n_restarts, &ik)?;

    // Near-singular flag: smallest singular value of the task Jacobian at any
    // seed within a decade of the rank tolerance.
    let mut near_singular = false;
    for q in &seeds.configs {
        let jac = jacobian(model, q, task.frame())?;
        let a = task_jacobian(&jac, task)?;
        let svd = a.svd(false, false);
        let sigma_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
        let sigma_min = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
        if sigma_min < 10.0 * SIGMA_TOL_REL * sigma_max {
            near_singular = true;
            break;
        }
    }

    let set = search_components(model, task, &seeds, cfg)?;
    let usable = usable_components(&set, model);
    let (roll, pitch, yaw) = pose.rotation.euler_angles();
    Ok(SweepRow {
        pose_id,
        component_count: set.components.len(),
        usable_count: usable.len(),
        near_singular,
        position: [pose.translation.x, pose.translation.y, pose.translation.z],
        rpy: [roll, pitch, yaw],
    })
}

/// Sweep `k_poses` random task poses: sample a configuration in limits, take
/// its forward kinematics as the pose, seed with `n_restarts` IK solutions,
/// and count components. Per-pose failures are recorded and the sweep
/// continues. Parallel across poses, deterministic for a fixed seed.
pub fn workspace_sweep(
    model: &ChainModel,
    task: &TaskSpec,
    k_poses: usize,
    n_restarts: usize,
    ik_cfg: &IkConfig,
    cfg: &IntegratorConfig,
    sampler_seed: u64,
) -> Result<SweepResult> {
    if k_poses == 0 || n_restarts == 0 {
        return Err(Error::Validation("sweep needs at least one pose and one restart".into()));
    }
    let outcomes: Vec<(usize, std::result::Result<SweepRow, String>)> = (0..k_poses)
        .into_par_iter()
        .map(|pose_id| {
            let row = sweep_one_pose(model, task, pose_id, n_restarts, ik_cfg, cfg, sampler_seed)
                .map_err(|e| e.to_string());
            (pose_id, row)
        })
        .collect();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (pose_id, outcome) in outcomes {
        match outcome {
            Ok(row) => rows.push(row),
            Err(msg) => failures.push((pose_id, msg)),
        }
    }
    Ok(SweepResult { rows, failures })
}

/// Occurrence histogram of `values`, sorted by value.
pub fn histogram(values: impl Iterator<Item = usize>) -> Vec<(usize, usize)> {
    let mut counts = std::collections::BTreeMap::new();
    for v in values {
        *counts.entry(v).or_insert(0usize) += 1;
    }
    counts.into_iter().collect()
}

//! Reproducible experiment runs: resolve a model, execute one command's worth
//! of work, and write plot-ready CSV files plus a JSON manifest that pins
//! everything needed to replay the run.

use std::io::Write;
use std::path::{Path, PathBuf};

use nalgebra::{DVector, Isometry3, Translation3, UnitQuaternion};
use serde::Serialize;

use crate::chain::{builtin, load_chain, ChainModel, Frame, TaskSpec, TwistRow};
use crate::error::{Error, Result};
use crate::ik::{random_restart_seeds, toggle_seeds_rrr, IkConfig, SeedSet};
use crate::induced::{induced_residual, make_induced_task};
use crate::ivp::{seed_residual, solve_smm_ivp_from, IntegratorConfig, Trace};
use crate::kinematics::{fk, JointConfig, Pose};
use crate::search::{
    histogram, point_to_set_distance, search_components, usable_components, workspace_sweep,
    SweepResult,
};

/// Everything a run needs besides its own inputs.
#[derive(Debug, Clone)]
pub struct CommonArgs {
    /// Builtin model name or chain-file path.
    pub model: String,
    pub h: f64,
    pub max_steps: usize,
    pub sampler_seed: u64,
    pub out_dir: PathBuf,
    /// Command line that produced this run, recorded in the manifest.
    pub argv: Vec<String>,
}

impl CommonArgs {
    pub fn integrator(&self) -> IntegratorConfig {
        IntegratorConfig::default().with_h(self.h).with_max_steps(self.max_steps)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Target {
    pub xyz: [f64; 3],
    pub rpy: [f64; 3],
}

impl Target {
    pub fn pose(&self) -> Pose {
        Isometry3::from_parts(
            Translation3::new(self.xyz[0], self.xyz[1], self.xyz[2]),
            UnitQuaternion::from_euler_angles(self.rpy[0], self.rpy[1], self.rpy[2]),
        )
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Seeder {
    Toggle,
    Restarts(usize),
}

/// Manifest pinning one run; replaying the recorded command reproduces the
/// output files byte for byte.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    pub tool_version: String,
    pub model: String,
    pub task: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q0: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<Vec<f64>>,
    pub h: f64,
    pub max_steps: usize,
    pub sampler_seed: u64,
    pub outputs: Vec<String>,
}

pub fn resolve_model(model_ref: &str) -> Result<(ChainModel, TaskSpec)> {
    if let Some(pair) = builtin(model_ref) {
        return Ok(pair);
    }
    load_chain(model_ref)
}

fn task_description(task: &TaskSpec) -> serde_json::Value {
    match task {
        TaskSpec::Rows(rows) => serde_json::json!({
            "mode": "rows",
            "rows": rows,
        }),
        TaskSpec::Induced(t) => serde_json::json!({
            "mode": "induced",
            "rows": t.restriction,
            "direction": t.direction_raw.iter().copied().collect::<Vec<f64>>(),
            "frame": t.frame,
        }),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(contents.as_bytes())?;
    Ok(())
}

fn trace_csv(trace: &Trace) -> String {
    let n = trace.samples.first().map_or(0, |q| q.len());
    let mut out = String::from("step");
    for i in 0..n {
        out.push_str(&format!(",q{i}"));
    }
    out.push('\n');
    for (step, q) in trace.samples.iter().enumerate() {
        out.push_str(&step.to_string());
        for v in q.iter() {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Serialize)]
struct TraceMeta {
    closed: bool,
    termination: crate::ivp::Termination,
    h: f64,
    arc_length: f64,
    seed: Vec<f64>,
    task: serde_json::Value,
}

fn trace_meta_json(trace: &Trace, q0: &JointConfig, task: &TaskSpec) -> Result<String> {
    let meta = TraceMeta {
        closed: trace.closed,
        termination: trace.termination,
        h: trace.h,
        arc_length: trace.arc_length(),
        seed: q0.iter().copied().collect(),
        task: task_description(task),
    };
    Ok(serde_json::to_string_pretty(&meta)?)
}

/// Per-sample error series in the shape the task's accuracy plots use:
/// `index,error` for rows tasks, `index,delta,gamma` for induced tasks.
fn error_series_csv(
    model: &ChainModel,
    task: &TaskSpec,
    seed_pose: &Pose,
    trace: &Trace,
) -> Result<String> {
    let mut out = String::new();
    match task {
        TaskSpec::Rows(_) => {
            out.push_str("index,error\n");
            for (i, q) in trace.samples.iter().enumerate() {
                let e = seed_residual(model, task, q, seed_pose)?;
                out.push_str(&format!("{i},{e}\n"));
            }
        }
        TaskSpec::Induced(t) => {
            out.push_str("index,delta,gamma\n");
            for (i, q) in trace.samples.iter().enumerate() {
                let r = induced_residual(seed_pose, &fk(model, q)?, t);
                out.push_str(&format!("{i},{},{}\n", r.position, r.angular));
            }
        }
    }
    Ok(out)
}

#[derive(Debug)]
pub struct TraceSummary {
    pub closed: bool,
    pub termination: crate::ivp::Termination,
    pub steps: usize,
    pub arc_length: f64,
    pub max_error: f64,
    pub outputs: Vec<PathBuf>,
}

fn q0_from_input(
    model: &ChainModel,
    task: &TaskSpec,
    q0: Option<Vec<f64>>,
    target: Option<Target>,
    restarts: usize,
    seed: u64,
) -> Result<JointConfig> {
    match (q0, target) {
        (Some(q), None) => {
            if q.len() != model.n() {
                return Err(Error::DimensionMismatch { expected: model.n(), got: q.len() });
            }
            Ok(DVector::from_column_slice(&q))
        }
        (None, Some(t)) => {
            let ik = IkConfig::default().with_seed(seed);
            let seeds = random_restart_seeds(model, task, &t.pose(), restarts, &ik)?;
            Ok(seeds.configs[0].clone())
        }
        _ => Err(Error::Validation("provide exactly one of q0 / target pose".into())),
    }
}

fn finish_trace_run(
    common: &CommonArgs,
    command: &str,
    model: &ChainModel,
    task: &TaskSpec,
    q0: &JointConfig,
    target: Option<Target>,
) -> Result<TraceSummary> {
    let cfg = common.integrator();
    let seed_pose = fk(model, q0)?;
    let trace = solve_smm_ivp_from(model, task, &seed_pose, q0, &cfg)?;

    let csv_path = common.out_dir.join("trace.csv");
    let meta_path = common.out_dir.join("trace.meta.json");
    let err_path = common.out_dir.join("errors.csv");
    write_file(&csv_path, &trace_csv(&trace))?;
    write_file(&meta_path, &trace_meta_json(&trace, q0, task)?)?;
    write_file(&err_path, &error_series_csv(model, task, &seed_pose, &trace)?)?;

    let max_error = trace
        .samples
        .iter()
        .map(|q| seed_residual(model, task, q, &seed_pose).unwrap_or(f64::NAN))
        .fold(0.0, f64::max);

    let outputs = vec![csv_path, meta_path, err_path];
    let manifest = RunManifest {
        command: command.into(),
        argv: common.argv.clone(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        model: common.model.clone(),
        task: task_description(task),
        q0: Some(q0.iter().copied().collect()),
        target: target.map(|t| t.xyz.iter().chain(t.rpy.iter()).copied().collect()),
        h: common.h,
        max_steps: common.max_steps,
        sampler_seed: common.sampler_seed,
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
    };
    write_file(&common.out_dir.join("manifest.json"), &serde_json::to_string_pretty(&manifest)?)?;

    Ok(TraceSummary {
        closed: trace.closed,
        termination: trace.termination,
        steps: trace.samples.len() - 1,
        arc_length: trace.arc_length(),
        max_error,
        outputs,
    })
}

/// Trace one self-motion manifold from a configuration or a target pose.
pub fn run_trace(
    common: &CommonArgs,
    q0: Option<Vec<f64>>,
    target: Option<Target>,
    restarts: usize,
) -> Result<TraceSummary> {
    let (model, task) = resolve_model(&common.model)?;
    let q0 = q0_from_input(&model, &task, q0, target, restarts, common.sampler_seed)?;
    finish_trace_run(common, "trace", &model, &task, &q0, target)
}

/// Trace an induced-redundancy manifold, overriding the model's redundancy
/// direction with `u` (given in the restriction coordinates, or as a full
/// 6-twist when the restriction is the full twist).
pub fn run_induced(
    common: &CommonArgs,
    q0: Vec<f64>,
    u: Vec<f64>,
    frame: Option<Frame>,
) -> Result<TraceSummary> {
    let (model, base_task) = resolve_model(&common.model)?;
    let restriction: Vec<TwistRow> = match &base_task {
        TaskSpec::Induced(t) => t.restriction.clone(),
        TaskSpec::Rows(_) if model.n() == 6 => TwistRow::ALL.to_vec(),
        TaskSpec::Rows(_) => {
            return Err(Error::Validation(
                "model's task is not induced; only 6DOF chains can induce over the full twist"
                    .into(),
            ))
        }
    };
    let frame = frame.unwrap_or(match &base_task {
        TaskSpec::Induced(t) => t.frame,
        TaskSpec::Rows(_) => Frame::Base,
    });
    let u_restricted: Vec<f64> = if u.len() == restriction.len() {
        u
    } else if u.len() == 6 {
        restriction.iter().map(|r| u[r.index()]).collect()
    } else {
        return Err(Error::DimensionMismatch { expected: restriction.len(), got: u.len() });
    };
    let task = TaskSpec::Induced(make_induced_task(&u_restricted, &restriction, frame)?);
    if let TaskSpec::Induced(t) = &task {
        if t.mixed_units() {
            eprintln!("warning: redundancy direction mixes meters and radians");
        }
    }
    let q0 = q0_from_input(&model, &task, Some(q0), None, 1, common.sampler_seed)?;
    finish_trace_run(common, "induced", &model, &task, &q0, None)
}

#[derive(Debug)]
pub struct SearchSummary {
    pub component_count: usize,
    pub usable_count: usize,
    pub seeds_used: usize,
    pub seeds_rejected: usize,
    pub seeds_failed: usize,
    pub validation_max_distance: Option<f64>,
    pub outputs: Vec<PathBuf>,
}

/// Search for all manifold components of one task pose and write one trace
/// file per component. `validate` draws that many fresh IK solutions and
/// reports their point-to-set distance to the found components.
pub fn run_search(
    common: &CommonArgs,
    q0: Option<Vec<f64>>,
    target: Option<Target>,
    seeder: Seeder,
    validate: Option<usize>,
) -> Result<SearchSummary> {
    let (model, task) = resolve_model(&common.model)?;
    let cfg = common.integrator();
    let ik = IkConfig::default().with_seed(common.sampler_seed);
    let q0 = q0_from_input(&model, &task, q0, target, 30, common.sampler_seed)?;
    let pose = fk(&model, &q0)?;

    let seeds: SeedSet = match seeder {
        Seeder::Toggle => toggle_seeds_rrr(&model, &q0)?,
        Seeder::Restarts(n) => random_restart_seeds(&model, &task, &pose, n, &ik)?,
    };
    let set = search_components(&model, &task, &seeds, &cfg)?;
    let usable = usable_components(&set, &model);

    let mut outputs = Vec::new();
    for (i, trace) in set.components.iter().enumerate() {
        let path = common.out_dir.join(format!("component_{i:02}.csv"));
        write_file(&path, &trace_csv(trace))?;
        outputs.push(path);
    }

    // Validation draws fresh IK solutions from streams disjoint with the
    // seeding streams.
    let validation = match validate {
        Some(m) if m > 0 => {
            let ik_fresh = IkConfig::default().with_seed(common.sampler_seed.wrapping_add(1));
            let fresh = random_restart_seeds(&model, &task, &pose, m, &ik_fresh)?;
            let mut max_d = 0.0f64;
            for q in &fresh.configs {
                let d = set
                    .components
                    .iter()
                    .map(|t| point_to_set_distance(&model, q, t).unwrap_or(f64::INFINITY))
                    .fold(f64::INFINITY, f64::min);
                max_d = max_d.max(d);
            }
            Some((fresh.configs.len(), max_d))
        }
        _ => None,
    };

    let (roll, pitch, yaw) = pose.rotation.euler_angles();
    let summary_json = serde_json::json!({
        "pose": {
            "xyz": [pose.translation.x, pose.translation.y, pose.translation.z],
            "rpy": [roll, pitch, yaw],
        },
        "component_count": set.components.len(),
        "usable_components": usable,
        "terminations": set.components.iter().map(|t| t.termination).collect::<Vec<_>>(),
        "seeds_used": set.seeds_used.len(),
        "seeds_rejected": set.seeds_rejected.len(),
        "seeds_failed": set.seeds_failed.iter().map(|(_, e)| e.clone()).collect::<Vec<_>>(),
        "validation": validation.map(|(n, d)| serde_json::json!({
            "fresh_solutions": n,
            "max_distance": d,
            "all_within_h": d < cfg.h,
        })),
    });
    let summary_path = common.out_dir.join("search.json");
    write_file(&summary_path, &serde_json::to_string_pretty(&summary_json)?)?;
    outputs.push(summary_path);

    let manifest = RunManifest {
        command: "search".into(),
        argv: common.argv.clone(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        model: common.model.clone(),
        task: task_description(&task),
        q0: Some(q0.iter().copied().collect()),
        target: target.map(|t| t.xyz.iter().chain(t.rpy.iter()).copied().collect()),
        h: common.h,
        max_steps: common.max_steps,
        sampler_seed: common.sampler_seed,
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
    };
    write_file(&common.out_dir.join("manifest.json"), &serde_json::to_string_pretty(&manifest)?)?;

    Ok(SearchSummary {
        component_count: set.components.len(),
        usable_count: usable.len(),
        seeds_used: set.seeds_used.len(),
        seeds_rejected: set.seeds_rejected.len(),
        seeds_failed: set.seeds_failed.len(),
        validation_max_distance: validation.map(|(_, d)| d),
        outputs,
    })
}

#[derive(Debug)]
pub struct SweepSummary {
    pub completed: usize,
    pub failed: usize,
    pub outputs: Vec<PathBuf>,
}

fn sweep_csv(result: &SweepResult) -> String {
    let mut out = String::from("pose_id,component_count,usable_count,near_singular,px,py,pz,r,p,y\n");
    for row in &result.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            row.pose_id,
            row.component_count,
            row.usable_count,
            row.near_singular as u8,
            row.position[0],
            row.position[1],
            row.position[2],
            row.rpy[0],
            row.rpy[1],
            row.rpy[2],
        ));
    }
    out
}

fn histogram_csv(header: &str, data: &[(usize, usize)]) -> String {
    let mut out = format!("{header},occurrences\n");
    for (value, count) in data {
        out.push_str(&format!("{value},{count}\n"));
    }
    out
}

/// Sweep random task poses and histogram the component counts.
pub fn run_sweep(
    common: &CommonArgs,
    poses: usize,
    restarts: usize,
    jobs: usize,
) -> Result<SweepSummary> {
    let (model, task) = resolve_model(&common.model)?;
    let cfg = common.integrator();
    let ik = IkConfig::default();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Numerical(format!("thread pool: {e}")))?;
    let result = pool.install(|| {
        workspace_sweep(&model, &task, poses, restarts, &ik, &cfg, common.sampler_seed)
    })?;

    let sweep_path = common.out_dir.join("sweep.csv");
    write_file(&sweep_path, &sweep_csv(&result))?;
    let comp_hist = histogram(result.rows.iter().map(|r| r.component_count));
    let usable_hist = histogram(result.rows.iter().map(|r| r.usable_count));
    let comp_path = common.out_dir.join("hist_components.csv");
    let usable_path = common.out_dir.join("hist_usable.csv");
    write_file(&comp_path, &histogram_csv("component_count", &comp_hist))?;
    write_file(&usable_path, &histogram_csv("usable_count", &usable_hist))?;

    let outputs = vec![sweep_path, comp_path, usable_path];
    let manifest = RunManifest {
        command: "sweep".into(),
        argv: common.argv.clone(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        model: common.model.clone(),
        task: task_description(&task),
        q0: None,
        target: None,
        h: common.h,
        max_steps: common.max_steps,
        sampler_seed: common.sampler_seed,
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
    };
    write_file(&common.out_dir.join("manifest.json"), &serde_json::to_string_pretty(&manifest)?)?;

    Ok(SweepSummary { completed: result.rows.len(), failed: result.failures.len(), outputs })
}

#[derive(Debug)]
pub struct IkSummary {
    pub solutions: usize,
    pub failures: usize,
    pub outputs: Vec<PathBuf>,
}

/// Solve IK for a target pose with random restarts and write the solution
/// set.
pub fn run_ik(
    common: &CommonArgs,
    target: Target,
    restarts: usize,
) -> Result<IkSummary> {
    let (model, task) = resolve_model(&common.model)?;
    let ik = IkConfig::default().with_seed(common.sampler_seed);
    let seeds = random_restart_seeds(&model, &task, &target.pose(), restarts, &ik)?;

    let mut csv = String::from("solution");
    for i in 0..model.n() {
        csv.push_str(&format!(",q{i}"));
    }
    csv.push('\n');
    for (i, q) in seeds.configs.iter().enumerate() {
        csv.push_str(&i.to_string());
        for v in q.iter() {
            csv.push_str(&format!(",{v}"));
        }
        csv.push('\n');
    }
    let csv_path = common.out_dir.join("ik_solutions.csv");
    write_file(&csv_path, &csv)?;

    let outputs = vec![csv_path];
    let manifest = RunManifest {
        command: "ik".into(),
        argv: common.argv.clone(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        model: common.model.clone(),
        task: task_description(&task),
        q0: None,
        target: Some(target.xyz.iter().chain(target.rpy.iter()).copied().collect()),
        h: common.h,
        max_steps: common.max_steps,
        sampler_seed: common.sampler_seed,
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
    };
    write_file(&common.out_dir.join("manifest.json"), &serde_json::to_string_pretty(&manifest)?)?;

    Ok(IkSummary { solutions: seeds.configs.len(), failures: seeds.failures, outputs })
}

//! Serial kinematic chain descriptions: joints, limits, task specifications,
//! the JSON chain-file format, and the builtin test models.
//!
//! A chain is an ordered list of revolute/prismatic joints, each with a fixed
//! origin transform (xyz translation + roll-pitch-yaw rotation, URDF-style)
//! and a unit axis in its local frame, followed by a tool transform. Lengths
//! are meters, angles radians.

use std::path::Path;

use nalgebra::{Isometry3, Translation3, Unit, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::induced::{make_induced_task, InducedTask};

pub const UNIT_AXIS_TOL: f64 = 1e-12;

/// Default joint limits when a chain file omits them.
pub const DEFAULT_REVOLUTE_LIMITS: [f64; 2] = [-std::f64::consts::PI, std::f64::consts::PI];
pub const DEFAULT_PRISMATIC_LIMITS: [f64; 2] = [-1.0, 1.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JointKind {
    Revolute,
    Prismatic,
}

/// One of the six twist components (linear velocity, then angular velocity).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TwistRow {
    Vx,
    Vy,
    Vz,
    Wx,
    Wy,
    Wz,
}

impl TwistRow {
    pub const ALL: [TwistRow; 6] = [
        TwistRow::Vx,
        TwistRow::Vy,
        TwistRow::Vz,
        TwistRow::Wx,
        TwistRow::Wy,
        TwistRow::Wz,
    ];

    /// Row index in a 6xn geometric Jacobian.
    pub fn index(self) -> usize {
        match self {
            TwistRow::Vx => 0,
            TwistRow::Vy => 1,
            TwistRow::Vz => 2,
            TwistRow::Wx => 3,
            TwistRow::Wy => 4,
            TwistRow::Wz => 5,
        }
    }

    pub fn is_angular(self) -> bool {
        self.index() >= 3
    }
}

/// Frame in which a Jacobian or redundancy direction is expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    Base,
    Tool,
}

/// A rigid transform given as translation plus roll-pitch-yaw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OriginSpec {
    #[serde(default)]
    pub xyz: [f64; 3],
    #[serde(default)]
    pub rpy: [f64; 3],
}

impl OriginSpec {
    pub fn identity() -> Self {
        OriginSpec { xyz: [0.0; 3], rpy: [0.0; 3] }
    }

    pub fn from_xyz(x: f64, y: f64, z: f64) -> Self {
        OriginSpec { xyz: [x, y, z], rpy: [0.0; 3] }
    }

    pub fn isometry(&self) -> Isometry3<f64> {
        Isometry3::from_parts(
            Translation3::new(self.xyz[0], self.xyz[1], self.xyz[2]),
            UnitQuaternion::from_euler_angles(self.rpy[0], self.rpy[1], self.rpy[2]),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointSpec {
    pub kind: JointKind,
    pub origin: OriginSpec,
    /// Unit axis in the joint's local frame.
    pub axis: Vector3<f64>,
    /// Closed position interval, rad (revolute) or m (prismatic).
    pub limits: [f64; 2],
}

impl JointSpec {
    pub fn new(kind: JointKind, origin: OriginSpec, axis: Vector3<f64>, limits: [f64; 2]) -> Self {
        JointSpec { kind, origin, axis, limits }
    }

    pub fn validate(&self) -> Result<()> {
        if (self.axis.norm() - 1.0).abs() > UNIT_AXIS_TOL {
            return Err(Error::Validation(format!(
                "joint axis must be unit length, got norm {}",
                self.axis.norm()
            )));
        }
        if self.limits[0] > self.limits[1] {
            return Err(Error::Validation(format!(
                "joint limits out of order: [{}, {}]",
                self.limits[0], self.limits[1]
            )));
        }
        if !self.origin.xyz.iter().chain(self.origin.rpy.iter()).all(|v| v.is_finite()) {
            return Err(Error::Validation("joint origin must be finite".into()));
        }
        Ok(())
    }

    /// Transform contributed by the joint variable `value`.
    pub fn motion(&self, value: f64) -> Isometry3<f64> {
        let axis = Unit::new_normalize(self.axis);
        match self.kind {
            JointKind::Revolute => Isometry3::from_parts(
                Translation3::identity(),
                UnitQuaternion::from_axis_angle(&axis, value),
            ),
            JointKind::Prismatic => Isometry3::from_parts(
                Translation3::from(axis.into_inner() * value),
                UnitQuaternion::identity(),
            ),
        }
    }
}

/// An immutable serial chain: ordered joints plus a tool transform.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainModel {
    pub name: String,
    pub joints: Vec<JointSpec>,
    pub tool: OriginSpec,
}

impl ChainModel {
    pub fn new(name: impl Into<String>, joints: Vec<JointSpec>, tool: OriginSpec) -> Result<Self> {
        let model = ChainModel { name: name.into(), joints, tool };
        model.validate()?;
        Ok(model)
    }

    /// Number of joints, i.e. the dimension of the configuration space.
    pub fn n(&self) -> usize {
        self.joints.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.joints.is_empty() {
            return Err(Error::Validation("chain must have at least one joint".into()));
        }
        for joint in &self.joints {
            joint.validate()?;
        }
        Ok(())
    }

    pub fn tool_isometry(&self) -> Isometry3<f64> {
        self.tool.isometry()
    }

    /// Difference of two configurations in the wrapped joint metric:
    /// revolute coordinates wrapped to (-pi, pi], prismatic raw.
    pub fn joint_difference(&self, a: &nalgebra::DVector<f64>, b: &nalgebra::DVector<f64>) -> nalgebra::DVector<f64> {
        let mut d = a - b;
        for (i, joint) in self.joints.iter().enumerate() {
            if joint.kind == JointKind::Revolute {
                d[i] = wrap_angle(d[i]);
            }
        }
        d
    }

    /// Wrapped Euclidean distance between two configurations.
    pub fn joint_distance(&self, a: &nalgebra::DVector<f64>, b: &nalgebra::DVector<f64>) -> f64 {
        self.joint_difference(a, b).norm()
    }

    /// Whether `value` for joint `i` lies within its limits, treating
    /// revolute coordinates modulo 2*pi.
    pub fn within_limits(&self, i: usize, value: f64) -> bool {
        let [lo, hi] = self.joints[i].limits;
        match self.joints[i].kind {
            JointKind::Prismatic => lo <= value && value <= hi,
            JointKind::Revolute => {
                let span = hi - lo;
                if span >= std::f64::consts::TAU {
                    return true;
                }
                (value - lo).rem_euclid(std::f64::consts::TAU) <= span
            }
        }
    }
}

/// Wrap an angle to (-pi, pi].
pub fn wrap_angle(x: f64) -> f64 {
    let r = x.rem_euclid(std::f64::consts::TAU);
    if r > std::f64::consts::PI {
        r - std::f64::consts::TAU
    } else {
        r
    }
}

/// Which twist components constitute the task.
///
/// `Rows` selects a subset of the six twist components with one degree of
/// redundancy (n - m = 1). `Induced` turns a square-Jacobian chain into a
/// degree-1 redundant one by projecting out a symmetry direction.
#[derive(Debug, Clone, PartialEq)]
pub enum TaskSpec {
    Rows(Vec<TwistRow>),
    Induced(InducedTask),
}

impl TaskSpec {
    pub fn se3() -> Self {
        TaskSpec::Rows(TwistRow::ALL.to_vec())
    }

    pub fn planar_position() -> Self {
        TaskSpec::Rows(vec![TwistRow::Vx, TwistRow::Vy])
    }

    /// Task dimension m (number of scalar constraints before projection).
    pub fn rows(&self) -> &[TwistRow] {
        match self {
            TaskSpec::Rows(rows) => rows,
            TaskSpec::Induced(task) => &task.restriction,
        }
    }

    pub fn frame(&self) -> Frame {
        match self {
            TaskSpec::Rows(_) => Frame::Base,
            TaskSpec::Induced(task) => task.frame,
        }
    }

    pub fn validate(&self, model: &ChainModel) -> Result<()> {
        let n = model.n();
        match self {
            TaskSpec::Rows(rows) => {
                if rows.is_empty() {
                    return Err(Error::Validation("task must select at least one row".into()));
                }
                let mut seen = [false; 6];
                for row in rows {
                    if seen[row.index()] {
                        return Err(Error::Validation("duplicate task row".into()));
                    }
                    seen[row.index()] = true;
                }
                if n != rows.len() + 1 {
                    return Err(Error::Validation(format!(
                        "rows task needs one degree of redundancy: n={} but m={}",
                        n,
                        rows.len()
                    )));
                }
            }
            TaskSpec::Induced(task) => {
                if task.restriction.len() != n {
                    return Err(Error::Validation(format!(
                        "induced task needs a square twist restriction: n={} but restriction has {} rows",
                        n,
                        task.restriction.len()
                    )));
                }
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Chain-file format
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct ChainFile {
    name: String,
    joints: Vec<JointFile>,
    tool: OriginSpec,
    task: TaskFile,
}

#[derive(Debug, Serialize, Deserialize)]
struct JointFile {
    kind: JointKind,
    origin: OriginSpec,
    axis: [f64; 3],
    #[serde(skip_serializing_if = "Option::is_none")]
    limits: Option<[f64; 2]>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TaskFile {
    mode: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    rows: Option<Vec<TwistRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    direction: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    frame: Option<Frame>,
}

fn chain_from_file(file: ChainFile) -> Result<(ChainModel, TaskSpec)> {
    let joints = file
        .joints
        .into_iter()
        .map(|j| {
            let limits = j.limits.unwrap_or(match j.kind {
                JointKind::Revolute => DEFAULT_REVOLUTE_LIMITS,
                JointKind::Prismatic => DEFAULT_PRISMATIC_LIMITS,
            });
            JointSpec::new(j.kind, j.origin, Vector3::from(j.axis), limits)
        })
        .collect();
    let model = ChainModel::new(file.name, joints, file.tool)?;
    let task = match file.task.mode.as_str() {
        "rows" => {
            let rows = file
                .task
                .rows
                .ok_or_else(|| Error::Validation("rows task requires a rows list".into()))?;
            TaskSpec::Rows(rows)
        }
        "induced" => {
            let direction = file
                .task
                .direction
                .ok_or_else(|| Error::Validation("induced task requires a direction".into()))?;
            let frame = file.task.frame.unwrap_or(Frame::Base);
            let restriction = match file.task.rows {
                Some(rows) => rows,
                None if model.n() == 6 => TwistRow::ALL.to_vec(),
                None => {
                    return Err(Error::Validation(
                        "induced task on a non-6DOF chain requires rows naming its square twist restriction"
                            .into(),
                    ))
                }
            };
            if direction.len() != restriction.len() {
                return Err(Error::Validation(format!(
                    "induced direction has {} entries but the twist restriction has {}",
                    direction.len(),
                    restriction.len()
                )));
            }
            TaskSpec::Induced(make_induced_task(&direction, &restriction, frame)?)
        }
        other => return Err(Error::Validation(format!("unknown task mode {other:?}"))),
    };
    task.validate(&model)?;
    Ok((model, task))
}

fn chain_to_file(model: &ChainModel, task: &TaskSpec) -> ChainFile {
    let joints = model
        .joints
        .iter()
        .map(|j| JointFile {
            kind: j.kind,
            origin: j.origin.clone(),
            axis: [j.axis.x, j.axis.y, j.axis.z],
            limits: Some(j.limits),
        })
        .collect();
    let task = match task {
        TaskSpec::Rows(rows) => TaskFile {
            mode: "rows".into(),
            rows: Some(rows.clone()),
            direction: None,
            frame: None,
        },
        TaskSpec::Induced(t) => TaskFile {
            mode: "induced".into(),
            rows: Some(t.restriction.clone()),
            direction: Some(t.direction_raw.iter().copied().collect()),
            frame: Some(t.frame),
        },
    };
    ChainFile { name: model.name.clone(), joints, tool: model.tool.clone(), task }
}

/// Parse and validate a chain from its JSON text.
pub fn parse_chain(text: &str) -> Result<(ChainModel, TaskSpec)> {
    let file: ChainFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("chain file: {e}")))?;
    chain_from_file(file)
}

/// Load and validate a chain file from disk.
pub fn load_chain(path: impl AsRef<Path>) -> Result<(ChainModel, TaskSpec)> {
    let text = std::fs::read_to_string(path)?;
    parse_chain(&text)
}

/// Serialize a model back to the chain-file JSON format. Parsing the output
/// reproduces the model field for field.
pub fn serialize_chain(model: &ChainModel, task: &TaskSpec) -> Result<String> {
    Ok(serde_json::to_string_pretty(&chain_to_file(model, task))?)
}

// ---------------------------------------------------------------------------
// Builtin models
// ---------------------------------------------------------------------------

fn revolute_z(origin: OriginSpec, limits: [f64; 2]) -> JointSpec {
    JointSpec::new(JointKind::Revolute, origin, Vector3::z(), limits)
}

fn planar_chain(name: &str, lengths: &[f64]) -> ChainModel {
    let mut joints = Vec::with_capacity(lengths.len());
    joints.push(revolute_z(OriginSpec::identity(), DEFAULT_REVOLUTE_LIMITS));
    for &len in &lengths[..lengths.len() - 1] {
        joints.push(revolute_z(OriginSpec::from_xyz(len, 0.0, 0.0), DEFAULT_REVOLUTE_LIMITS));
    }
    let tool = OriginSpec::from_xyz(lengths[lengths.len() - 1], 0.0, 0.0);
    ChainModel { name: name.into(), joints, tool }
}

fn prr_chain() -> ChainModel {
    let joints = vec![
        JointSpec::new(
            JointKind::Prismatic,
            OriginSpec::identity(),
            Vector3::x(),
            DEFAULT_PRISMATIC_LIMITS,
        ),
        revolute_z(OriginSpec::identity(), DEFAULT_REVOLUTE_LIMITS),
        revolute_z(OriginSpec::from_xyz(1.0, 0.0, 0.0), DEFAULT_REVOLUTE_LIMITS),
    ];
    ChainModel { name: "PRR".into(), joints, tool: OriginSpec::from_xyz(1.0, 0.0, 0.0) }
}

fn spatial_joint(axis: Vector3<f64>, xyz: [f64; 3], limit: f64) -> JointSpec {
    JointSpec::new(
        JointKind::Revolute,
        OriginSpec { xyz, rpy: [0.0; 3] },
        axis,
        [-limit, limit],
    )
}

/// Generic 6DOF spatial arm. Stands in for vendor arms whose exact kinematic
/// parameters ship separately as chain files.
fn arm6_chain() -> ChainModel {
    let joints = vec![
        spatial_joint(Vector3::z(), [0.0, 0.0, 0.27], 2.9),
        spatial_joint(Vector3::y(), [0.0, 0.0, 0.0], 2.0),
        spatial_joint(Vector3::y(), [0.06, 0.0, 0.29], 2.8),
        spatial_joint(Vector3::x(), [0.30, 0.0, 0.0], 3.15),
        spatial_joint(Vector3::y(), [0.09, 0.0, 0.0], 1.8),
        spatial_joint(Vector3::x(), [0.08, 0.0, 0.0], 3.15),
    ];
    ChainModel { name: "arm6".into(), joints, tool: OriginSpec::from_xyz(0.07, 0.0, 0.0) }
}

/// Generic 7DOF spatial arm with a spherical-shoulder / spherical-wrist layout.
fn arm7_chain() -> ChainModel {
    let joints = vec![
        spatial_joint(Vector3::z(), [0.0, 0.0, 0.30], 2.9),
        spatial_joint(Vector3::y(), [0.0, 0.0, 0.0], 2.0),
        spatial_joint(Vector3::z(), [0.0, 0.0, 0.36], 2.9),
        spatial_joint(Vector3::y(), [0.0, 0.0, 0.0], 2.0),
        spatial_joint(Vector3::z(), [0.0, 0.0, 0.34], 2.9),
        spatial_joint(Vector3::y(), [0.0, 0.0, 0.0], 1.9),
        spatial_joint(Vector3::z(), [0.0, 0.0, 0.14], 3.0),
    ];
    ChainModel { name: "arm7".into(), joints, tool: OriginSpec::from_xyz(0.0, 0.0, 0.10) }
}

/// The 6DOF arm mounted on a y-axis linear rail.
fn rail6_chain() -> ChainModel {
    let arm = arm6_chain();
    let mut joints = vec![JointSpec::new(
        JointKind::Prismatic,
        OriginSpec::identity(),
        Vector3::y(),
        DEFAULT_PRISMATIC_LIMITS,
    )];
    joints.extend(arm.joints);
    ChainModel { name: "rail6".into(), joints, tool: arm.tool }
}

/// Look up a builtin model by name (case-insensitive).
pub fn builtin(name: &str) -> Option<(ChainModel, TaskSpec)> {
    let key = name.to_ascii_lowercase();
    let pair = match key.as_str() {
        "rrr" => (planar_chain("RRR", &[1.0, 1.0, 1.0]), TaskSpec::planar_position()),
        "rrr-0.9-0.8" => {
            (planar_chain("RRR-0.9-0.8", &[1.0, 0.9, 0.8]), TaskSpec::planar_position())
        }
        "rr" => {
            let task = make_induced_task(&[1.0, 0.5], &[TwistRow::Vx, TwistRow::Vy], Frame::Base)
                .expect("builtin direction is nonzero");
            (planar_chain("RR", &[1.0, 1.0]), TaskSpec::Induced(task))
        }
        "prr" => (prr_chain(), TaskSpec::planar_position()),
        "arm6" => {
            let task =
                make_induced_task(&[0.0, 0.0, 0.0, 0.0, 1.0, 0.0], &TwistRow::ALL, Frame::Tool)
                    .expect("builtin direction is nonzero");
            (arm6_chain(), TaskSpec::Induced(task))
        }
        "arm7" => (arm7_chain(), TaskSpec::se3()),
        "rail6" => (rail6_chain(), TaskSpec::se3()),
        _ => return None,
    };
    Some(pair)
}

/// All builtin models with their default tasks.
pub fn builtin_models() -> Vec<(ChainModel, TaskSpec)> {
    ["RRR", "RRR-0.9-0.8", "RR", "PRR", "arm6", "arm7", "rail6"]
        .iter()
        .map(|name| builtin(name).expect("builtin exists"))
        .collect()
}

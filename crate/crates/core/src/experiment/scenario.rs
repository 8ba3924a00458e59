//! JSON scenario files.
//!
//! Positions of the source, target, markers and obstacles are in grid units
//! and are scaled by `unit_scale` (meters per grid unit) when a run starts.
//! Planner, execution, noise, standoff and arm-base values are in meters.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use nalgebra::{Quaternion, UnitQuaternion};
use serde::Deserialize;
use thiserror::Error;

use crate::geometry::{Cuboid, Pose, Vec3};
use crate::kinematics::ArmModel;
use crate::perception::{Marker, NoiseModel};
use crate::planner::PlannerConfig;
use crate::sim::ExecutionConfig;

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_UNIT_SCALE: f64 = 0.4;
pub const DEFAULT_REPETITIONS: usize = 10;
pub const DEFAULT_HALF_EXTENT: f64 = 0.05;
pub const DEFAULT_STANDOFF: f64 = 0.02;
pub const DEFAULT_SEED: u64 = 1;
/// Arm base placement keeping the default scene inside the dexterous workspace.
pub const DEFAULT_ARM_BASE: [f64; 3] = [0.2, -0.5, 0.0];
/// Base yaw (rad) turning the home pose towards the default scene.
pub const DEFAULT_ARM_YAW: f64 = -std::f64::consts::FRAC_PI_2;

pub fn default_arm_base() -> Pose {
    Pose::new(
        Vec3::from(DEFAULT_ARM_BASE),
        UnitQuaternion::from_euler_angles(0.0, 0.0, DEFAULT_ARM_YAW),
    )
}

/// The preset arm at the default base placement.
pub fn default_arm() -> ArmModel {
    ArmModel::ur5e().with_base(default_arm_base())
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid value for `{field}`: {message}")]
    Validation { field: String, message: String },
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Validation {
        field: field.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub unit_scale: f64,
    pub source: Vec3,
    pub target: Vec3,
    pub markers: Vec<Marker>,
    pub desired_marker_id: u32,
    pub obstacles: Vec<Cuboid>,
    pub seed: u64,
    pub repetitions: usize,
    pub standoff: f64,
    pub planner: PlannerConfig,
    pub execution: ExecutionConfig,
    pub noise: NoiseModel,
    pub arm: ArmModel,
}

impl Scenario {
    pub fn source_m(&self) -> Vec3 {
        self.source * self.unit_scale
    }

    pub fn target_m(&self) -> Vec3 {
        self.target * self.unit_scale
    }

    pub fn obstacles_m(&self) -> Vec<Cuboid> {
        self.obstacles.iter().map(|o| o.scaled(self.unit_scale)).collect()
    }

    pub fn markers_m(&self) -> Vec<Marker> {
        self.markers
            .iter()
            .map(|m| Marker {
                id: m.id,
                pose: Pose::new(m.pose.position * self.unit_scale, m.pose.orientation),
            })
            .collect()
    }

    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let file: ScenarioFile = serde_json::from_str(text)?;
        file.into_scenario()
    }
}

/// Reads and validates one scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    Scenario::from_json(&read(path.as_ref())?)
}

/// Loads a benchmark suite from a suite file, a single scenario file, or a
/// directory of scenario files (sorted by file name).
pub fn load_suite(path: impl AsRef<Path>) -> Result<Vec<Scenario>, ScenarioError> {
    let path = path.as_ref();
    if path.is_dir() {
        let mut files: Vec<_> = fs::read_dir(path)
            .map_err(|source| ScenarioError::Io {
                path: path.display().to_string(),
                source,
            })?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|e| e == "json"))
            .collect();
        files.sort();
        let mut out = Vec::new();
        for f in files {
            out.extend(suite_from_json(&read(&f)?)?);
        }
        return Ok(out);
    }
    suite_from_json(&read(path)?)
}

/// A document with a top-level `scenarios` array is a suite; anything else is
/// a single scenario.
pub fn suite_from_json(text: &str) -> Result<Vec<Scenario>, ScenarioError> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    if value.get("scenarios").is_some() {
        let suite: SuiteFile = serde_json::from_value(value)?;
        check_schema(suite.schema)?;
        if suite.scenarios.is_empty() {
            return Err(invalid("scenarios", "suite contains no scenarios"));
        }
        suite
            .scenarios
            .into_iter()
            .enumerate()
            .map(|(i, s)| {
                s.into_scenario().map_err(|e| match e {
                    ScenarioError::Validation { field, message } => {
                        invalid(format!("scenarios[{i}].{field}"), message)
                    }
                    other => other,
                })
            })
            .collect()
    } else {
        let file: ScenarioFile = serde_json::from_value(value)?;
        Ok(vec![file.into_scenario()?])
    }
}

fn read(path: &Path) -> Result<String, ScenarioError> {
    fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn check_schema(schema: Option<u32>) -> Result<(), ScenarioError> {
    match schema {
        None | Some(SCHEMA_VERSION) => Ok(()),
        Some(v) => Err(invalid(
            "schema",
            format!("unsupported version {v}, expected {SCHEMA_VERSION}"),
        )),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SuiteFile {
    schema: Option<u32>,
    #[serde(default)]
    #[allow(dead_code)]
    name: Option<String>,
    scenarios: Vec<ScenarioFile>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    schema: Option<u32>,
    name: Option<String>,
    unit_scale: Option<f64>,
    source: [f64; 3],
    target: [f64; 3],
    #[serde(default)]
    markers: Vec<MarkerFile>,
    desired_marker_id: Option<u32>,
    #[serde(default)]
    obstacles: Vec<ObstacleFile>,
    seed: Option<u64>,
    repetitions: Option<i64>,
    standoff: Option<f64>,
    #[serde(default)]
    planner: PlannerFile,
    #[serde(default)]
    execution: ExecutionFile,
    #[serde(default)]
    noise: NoiseFile,
    #[serde(default)]
    arm: ArmFile,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MarkerFile {
    id: u32,
    position: [f64; 3],
    /// (w, x, y, z)
    orientation: Option<[f64; 4]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObstacleFile {
    center: [f64; 3],
    half_extents: Option<[f64; 3]>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoxFile {
    center: [f64; 3],
    half_extents: [f64; 3],
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlannerFile {
    clearance: Option<f64>,
    n_check: Option<usize>,
    step: Option<f64>,
    max_iters: Option<usize>,
    workspace: Option<BoxFile>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExecutionFile {
    n_waypoints: Option<usize>,
    speed: Option<f64>,
    delay_max: Option<f64>,
    jitter_sigma: Option<f64>,
    collision_clearance: Option<f64>,
    pos_tol: Option<f64>,
    max_retries: Option<usize>,
    detour_offset: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct NoiseFile {
    sigma_pos: Option<f64>,
    sigma_rot: Option<f64>,
    detection_prob: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ArmFile {
    preset: Option<String>,
    base_position: Option<[f64; 3]>,
    /// (w, x, y, z)
    base_orientation: Option<[f64; 4]>,
}

fn vec3(field: &str, v: [f64; 3]) -> Result<Vec3, ScenarioError> {
    if v.iter().all(|c| c.is_finite()) {
        Ok(Vec3::from(v))
    } else {
        Err(invalid(field, "coordinates must be finite"))
    }
}

fn quaternion(field: &str, q: Option<[f64; 4]>) -> Result<UnitQuaternion<f64>, ScenarioError> {
    let Some([w, x, y, z]) = q else {
        return Ok(UnitQuaternion::identity());
    };
    unit_quaternion(field, [w, x, y, z])
}

fn unit_quaternion(field: &str, [w, x, y, z]: [f64; 4]) -> Result<UnitQuaternion<f64>, ScenarioError> {
    let q = Quaternion::new(w, x, y, z);
    let norm = q.norm();
    if !norm.is_finite() || norm < 1e-9 {
        return Err(invalid(field, "quaternion must be finite and non-zero"));
    }
    Ok(UnitQuaternion::from_quaternion(q))
}

fn positive(field: &str, v: f64) -> Result<f64, ScenarioError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(field, format!("must be > 0, got {v}")))
    }
}

fn non_negative(field: &str, v: f64) -> Result<f64, ScenarioError> {
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(field, format!("must be >= 0, got {v}")))
    }
}

impl ScenarioFile {
    fn into_scenario(self) -> Result<Scenario, ScenarioError> {
        check_schema(self.schema)?;
        let name = self.name.unwrap_or_else(|| "scenario".to_string());
        if name.is_empty() {
            return Err(invalid("name", "must not be empty"));
        }
        let unit_scale = positive("unit_scale", self.unit_scale.unwrap_or(DEFAULT_UNIT_SCALE))?;
        let source = vec3("source", self.source)?;
        let target = vec3("target", self.target)?;
        if source == target {
            return Err(invalid("target", "source and target coincide"));
        }
        let repetitions = match self.repetitions {
            None => DEFAULT_REPETITIONS,
            Some(r) if r >= 1 => r as usize,
            Some(r) => return Err(invalid("repetitions", format!("must be >= 1, got {r}"))),
        };
        let desired_marker_id = self.desired_marker_id.unwrap_or(0);

        let mut markers = Vec::with_capacity(self.markers.len());
        let mut ids = HashSet::new();
        for (i, m) in self.markers.into_iter().enumerate() {
            if !ids.insert(m.id) {
                return Err(invalid(format!("markers[{i}].id"), format!("duplicate id {}", m.id)));
            }
            markers.push(Marker {
                id: m.id,
                pose: Pose::new(
                    vec3(&format!("markers[{i}].position"), m.position)?,
                    quaternion(&format!("markers[{i}].orientation"), m.orientation)?,
                ),
            });
        }
        if markers.is_empty() {
            // The target itself is the only marker.
            markers.push(Marker {
                id: desired_marker_id,
                pose: Pose::from_position(target),
            });
        }

        let obstacles = self
            .obstacles
            .into_iter()
            .enumerate()
            .map(|(i, o)| {
                let half = o.half_extents.unwrap_or([DEFAULT_HALF_EXTENT; 3]);
                Cuboid::new(
                    vec3(&format!("obstacles[{i}].center"), o.center)?,
                    vec3(&format!("obstacles[{i}].half_extents"), half)?,
                )
                .map_err(|e| invalid(format!("obstacles[{i}].half_extents"), e.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;

        let d = PlannerConfig::default();
        let p = self.planner;
        let workspace = match p.workspace {
            None => d.workspace,
            Some(w) => Cuboid::new(
                vec3("planner.workspace.center", w.center)?,
                vec3("planner.workspace.half_extents", w.half_extents)?,
            )
            .map_err(|e| invalid("planner.workspace.half_extents", e.to_string()))?,
        };
        let planner = PlannerConfig {
            clearance: non_negative("planner.clearance", p.clearance.unwrap_or(d.clearance))?,
            n_check: p.n_check.unwrap_or(d.n_check),
            step: positive("planner.step", p.step.unwrap_or(d.step))?,
            max_iters: p.max_iters.unwrap_or(d.max_iters),
            workspace,
        };
        if planner.n_check < 2 {
            return Err(invalid("planner.n_check", "must be >= 2"));
        }
        if planner.max_iters < 1 {
            return Err(invalid("planner.max_iters", "must be >= 1"));
        }

        let d = ExecutionConfig::default();
        let e = self.execution;
        let execution = ExecutionConfig {
            n_waypoints: e.n_waypoints.unwrap_or(d.n_waypoints),
            speed: positive("execution.speed", e.speed.unwrap_or(d.speed))?,
            delay_max: non_negative("execution.delay_max", e.delay_max.unwrap_or(d.delay_max))?,
            jitter_sigma: non_negative(
                "execution.jitter_sigma",
                e.jitter_sigma.unwrap_or(d.jitter_sigma),
            )?,
            collision_clearance: non_negative(
                "execution.collision_clearance",
                e.collision_clearance.unwrap_or(d.collision_clearance),
            )?,
            pos_tol: non_negative("execution.pos_tol", e.pos_tol.unwrap_or(d.pos_tol))?,
            max_retries: e.max_retries.unwrap_or(d.max_retries),
            detour_offset: non_negative(
                "execution.detour_offset",
                e.detour_offset.unwrap_or(d.detour_offset),
            )?,
        };
        if execution.n_waypoints < 2 {
            return Err(invalid("execution.n_waypoints", "must be >= 2"));
        }

        let d = NoiseModel::default();
        let n = self.noise;
        let noise = NoiseModel {
            sigma_pos: non_negative("noise.sigma_pos", n.sigma_pos.unwrap_or(d.sigma_pos))?,
            sigma_rot: non_negative("noise.sigma_rot", n.sigma_rot.unwrap_or(d.sigma_rot))?,
            detection_prob: n.detection_prob.unwrap_or(d.detection_prob),
        };
        if !(0.0..=1.0).contains(&noise.detection_prob) {
            return Err(invalid("noise.detection_prob", "must be in [0, 1]"));
        }

        let preset = self.arm.preset.as_deref().unwrap_or("ur5e");
        let default_base = default_arm_base();
        let arm = ArmModel::preset(preset)
            .ok_or_else(|| invalid("arm.preset", format!("unknown preset `{preset}`")))?
            .with_base(Pose::new(
                match self.arm.base_position {
                    Some(p) => vec3("arm.base_position", p)?,
                    None => default_base.position,
                },
                match self.arm.base_orientation {
                    Some(q) => unit_quaternion("arm.base_orientation", q)?,
                    None => default_base.orientation,
                },
            ));

        Ok(Scenario {
            name,
            unit_scale,
            source,
            target,
            markers,
            desired_marker_id,
            obstacles,
            seed: self.seed.unwrap_or(DEFAULT_SEED),
            repetitions,
            standoff: non_negative("standoff", self.standoff.unwrap_or(DEFAULT_STANDOFF))?,
            planner,
            execution,
            noise,
            arm,
        })
    }
}

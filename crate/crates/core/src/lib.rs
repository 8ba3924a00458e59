//! Obstacle-aware cubic Bezier path planning for a robotic ultrasound arm.
//!
//! The crate plans a collision-free cubic Bezier path from the probe's start
//! position to a perceived fiducial target, executes it on a simulated 6-DoF
//! arm with random control delays and actuation jitter, and measures success
//! rate and moving time with and without planning.
//!
//! Modules, bottom up:
//! - [`geometry`]: vectors, poses, cubic Bezier curves, cuboid obstacles
//! - [`kinematics`]: DH arm model, forward and damped-least-squares inverse kinematics
//! - [`planner`]: control-point repulsion planner and straight-line baseline path
//! - [`perception`]: synthetic marker pose oracle and target selection
//! - [`sim`]: waypoint execution with delays, jitter and reactive detours
//! - [`experiment`]: scenario files, benchmark protocol, CSV/table output

// Negated comparisons are used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod experiment;
pub mod geometry;
pub mod kinematics;
pub mod perception;
pub mod planner;
pub mod sim;

pub use geometry::{CubicBezier, Cuboid, Pose, Vec3};
pub use kinematics::{ArmModel, JointConfig};
pub use planner::{plan_path, PlannerConfig};
pub use sim::{ExecutionConfig, FailureReason, RunResult};

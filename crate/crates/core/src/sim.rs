//! Discrete-time execution of a sampled path on the kinematic arm.
//!
//! Each commanded waypoint is perturbed by Gaussian actuation jitter, checked
//! against the obstacles along the segment from the previous position, and
//! solved with IK seeded from the previous joint configuration. Moving time is
//! travel distance over speed plus a uniform random control delay per move.
//!
//! Two executors are provided: [`execute_trajectory`] follows a planned curve
//! and fails on the first problem, while [`execute_reactive_baseline`] moves
//! along the straight line with guarded stops and tries random lateral detours
//! when the next step would touch an obstacle.

use nalgebra::UnitQuaternion;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::geometry::{segment_clearance, CubicBezier, Cuboid, Pose, Vec3};
use crate::kinematics::{ArmModel, IkConfig, JointConfig};
use crate::perception::gaussian3;
use crate::planner::straight_line_path;

/// Sub-samples per straight move for the collision check.
pub const SEGMENT_SUBSAMPLES: usize = 20;

const START_IK: IkConfig = IkConfig {
    tol_pos: 1e-6,
    tol_rot: 1e-6,
    max_iters: 2000,
    damping: 0.01,
    max_step: 0.3,
};

const TRACK_IK: IkConfig = IkConfig {
    tol_pos: 1e-6,
    tol_rot: 1e-6,
    max_iters: 200,
    damping: 0.01,
    max_step: 0.3,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid execution configuration: {0}")]
    InvalidConfig(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExecutionConfig {
    pub n_waypoints: usize,
    /// End-effector speed (m/s).
    pub speed: f64,
    /// Upper bound of the uniform per-move control delay (s).
    pub delay_max: f64,
    /// Per-axis standard deviation of waypoint jitter (m).
    pub jitter_sigma: f64,
    /// A move collides when it comes this close to an obstacle (m).
    pub collision_clearance: f64,
    /// Final end-effector tolerance around the path target (m).
    pub pos_tol: f64,
    /// Detours the reactive baseline may attempt before giving up.
    pub max_retries: usize,
    /// Lateral sidestep length of one reactive detour (m).
    pub detour_offset: f64,
}

impl Default for ExecutionConfig {
    fn default() -> Self {
        Self {
            n_waypoints: 50,
            speed: 0.1,
            delay_max: 0.3,
            jitter_sigma: 0.005,
            collision_clearance: 0.0,
            pos_tol: 0.005,
            max_retries: 5,
            detour_offset: 0.05,
        }
    }
}

impl ExecutionConfig {
    pub fn noiseless() -> Self {
        Self {
            delay_max: 0.0,
            jitter_sigma: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.n_waypoints < 2 {
            return Err(SimError::InvalidConfig("n_waypoints must be >= 2"));
        }
        if !(self.speed > 0.0 && self.speed.is_finite()) {
            return Err(SimError::InvalidConfig("speed must be > 0"));
        }
        let non_negative = [
            (self.delay_max, "delay_max must be >= 0"),
            (self.jitter_sigma, "jitter_sigma must be >= 0"),
            (self.collision_clearance, "collision_clearance must be >= 0"),
            (self.pos_tol, "pos_tol must be >= 0"),
            (self.detour_offset, "detour_offset must be >= 0"),
        ];
        for (v, msg) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(SimError::InvalidConfig(msg));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum FailureReason {
    None,
    Collision,
    RangeOfMotion,
    TargetMiss,
    PerceptionFailure,
    PlanningFailed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunResult {
    pub success: bool,
    /// Simulated elapsed time (s), up to completion or failure.
    pub moving_time: f64,
    pub failure_reason: FailureReason,
    /// Reactive detours taken (always 0 for planned execution).
    pub retries: usize,
}

impl RunResult {
    pub fn failed(reason: FailureReason, moving_time: f64) -> Self {
        Self {
            success: false,
            moving_time,
            failure_reason: reason,
            retries: 0,
        }
    }
}

struct Executor<'a> {
    arm: &'a ArmModel,
    obstacles: &'a [Cuboid],
    cfg: &'a ExecutionConfig,
    tool: UnitQuaternion<f64>,
    rng: ChaCha8Rng,
    /// Visited (position, joints), current last.
    history: Vec<(Vec3, JointConfig)>,
    time: f64,
}

impl<'a> Executor<'a> {
    fn start(
        arm: &'a ArmModel,
        obstacles: &'a [Cuboid],
        cfg: &'a ExecutionConfig,
        tool: UnitQuaternion<f64>,
        source: Vec3,
        rng_seed: u64,
    ) -> Result<Self, FailureReason> {
        let sol = arm
            .inverse_kinematics(&Pose::new(source, tool), &arm.home, &START_IK)
            .map_err(|_| FailureReason::RangeOfMotion)?;
        Ok(Self {
            arm,
            obstacles,
            cfg,
            tool,
            rng: ChaCha8Rng::seed_from_u64(rng_seed),
            history: vec![(source, sol.q)],
            time: 0.0,
        })
    }

    fn position(&self) -> Vec3 {
        self.history.last().expect("history is never empty").0
    }

    fn joints(&self) -> JointConfig {
        self.history.last().expect("history is never empty").1
    }

    fn jitter(&mut self) -> Vec3 {
        gaussian3(&mut self.rng) * self.cfg.jitter_sigma
    }

    fn delay(&mut self) -> f64 {
        let u: f64 = self.rng.random();
        u * self.cfg.delay_max
    }

    fn collides(&self, from: &Vec3, to: &Vec3) -> bool {
        self.obstacles.iter().any(|o| {
            segment_clearance(from, to, o, SEGMENT_SUBSAMPLES).expect("subsample count >= 2")
                <= self.cfg.collision_clearance
        })
    }

    fn solve(&self, p: &Vec3) -> Result<JointConfig, FailureReason> {
        self.arm
            .inverse_kinematics(&Pose::new(*p, self.tool), &self.joints(), &TRACK_IK)
            .map(|s| s.q)
            .map_err(|_| FailureReason::RangeOfMotion)
    }

    /// Moves to `p` if the straight move is clear and `p` is reachable.
    fn advance(&mut self, p: Vec3, delay: f64) -> Result<(), FailureReason> {
        let from = self.position();
        if self.collides(&from, &p) {
            return Err(FailureReason::Collision);
        }
        let q = self.solve(&p)?;
        self.time += (p - from).norm() / self.cfg.speed + delay;
        self.history.push((p, q));
        Ok(())
    }

    fn finish(&self, target: &Vec3, retries: usize) -> RunResult {
        let reached = self.arm.forward_kinematics(&self.joints()).position;
        let ok = (reached - target).norm() <= self.cfg.pos_tol;
        RunResult {
            success: ok,
            moving_time: self.time,
            failure_reason: if ok {
                FailureReason::None
            } else {
                FailureReason::TargetMiss
            },
            retries,
        }
    }

    fn fail(&self, reason: FailureReason, retries: usize) -> RunResult {
        RunResult {
            success: false,
            moving_time: self.time,
            failure_reason: reason,
            retries,
        }
    }

    /// Unit vector perpendicular to `heading` at a random angle.
    fn random_perpendicular(&mut self, heading: &Vec3) -> Vec3 {
        let angle: f64 = self.rng.random::<f64>() * std::f64::consts::TAU;
        let h = heading
            .try_normalize(1e-12)
            .unwrap_or_else(Vec3::x);
        let helper = if h.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
        let e1 = h.cross(&helper).normalize();
        let e2 = h.cross(&e1);
        e1 * angle.cos() + e2 * angle.sin()
    }
}

/// Executes the uniformly sampled `curve` with the tool held at `tool`.
///
/// Intermediate waypoints are jittered; the final waypoint is commanded at
/// `curve.p3` exactly.
pub fn execute_trajectory(
    curve: &CubicBezier,
    tool: &UnitQuaternion<f64>,
    arm: &ArmModel,
    obstacles: &[Cuboid],
    cfg: &ExecutionConfig,
    rng_seed: u64,
) -> Result<RunResult, SimError> {
    cfg.validate()?;
    let waypoints = curve
        .sample_uniform(cfg.n_waypoints)
        .expect("validated n_waypoints >= 2");
    let mut exec = match Executor::start(arm, obstacles, cfg, *tool, curve.p0, rng_seed) {
        Ok(e) => e,
        Err(reason) => return Ok(RunResult::failed(reason, 0.0)),
    };
    let last = waypoints.len() - 1;
    for (i, wp) in waypoints.iter().enumerate().skip(1) {
        let jitter = exec.jitter();
        let delay = exec.delay();
        let commanded = if i < last { wp + jitter } else { *wp };
        if let Err(reason) = exec.advance(commanded, delay) {
            return Ok(exec.fail(reason, 0));
        }
    }
    Ok(exec.finish(&curve.p3, 0))
}

/// Straight-line mover without a plan.
///
/// The mover stops before every step to check it (one extra delay draw per
/// step). If the jittered next step would touch an obstacle it backs off one
/// waypoint, sidesteps `detour_offset` in a random direction perpendicular to
/// the heading, and re-aims at the target with the remaining step budget plus
/// one. After `max_retries` detours a blocked step is a collision.
pub fn execute_reactive_baseline(
    source: Vec3,
    target: Vec3,
    tool: &UnitQuaternion<f64>,
    arm: &ArmModel,
    obstacles: &[Cuboid],
    cfg: &ExecutionConfig,
    rng_seed: u64,
) -> Result<RunResult, SimError> {
    cfg.validate()?;
    let Ok(line) = straight_line_path(source, target) else {
        return Ok(RunResult::failed(FailureReason::TargetMiss, 0.0));
    };
    let mut path = line
        .sample_uniform(cfg.n_waypoints)
        .expect("validated n_waypoints >= 2");
    let mut exec = match Executor::start(arm, obstacles, cfg, *tool, source, rng_seed) {
        Ok(e) => e,
        Err(reason) => return Ok(RunResult::failed(reason, 0.0)),
    };
    let mut retries = 0;
    let mut i = 1;
    while i < path.len() {
        let jitter = exec.jitter();
        let delay = exec.delay();
        let check_dwell = exec.delay();
        let commanded = if i + 1 < path.len() {
            path[i] + jitter
        } else {
            path[i]
        };
        exec.time += check_dwell;

        let from = exec.position();
        if !exec.collides(&from, &commanded) {
            if let Err(reason) = exec.advance(commanded, delay) {
                return Ok(exec.fail(reason, retries));
            }
            i += 1;
            continue;
        }

        if retries >= cfg.max_retries {
            return Ok(exec.fail(FailureReason::Collision, retries));
        }
        retries += 1;
        // The blocked step is not taken; its delay is the stop.
        exec.time += delay;
        let remaining_steps = path.len() - i;
        if exec.history.len() > 1 {
            let current = exec.history.pop().expect("len > 1");
            let (back, _) = *exec.history.last().expect("len >= 1");
            exec.time += (current.0 - back).norm() / cfg.speed + exec.delay();
        }
        let back = exec.position();
        let side = back + exec.random_perpendicular(&(target - back)) * cfg.detour_offset;
        let side_delay = exec.delay();
        // A blocked sidestep leaves the arm where it backed off to.
        let _ = exec.advance(side, side_delay);

        let here = exec.position();
        let steps = remaining_steps + 1;
        path = match straight_line_path(here, target) {
            Ok(line) => line.sample_uniform(steps + 1).expect("steps >= 1"),
            Err(_) => vec![here, target],
        };
        i = 1;
    }
    Ok(exec.finish(&target, retries))
}

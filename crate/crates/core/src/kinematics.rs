//! Serial 6-DoF arm described by standard Denavit-Hartenberg rows, with
//! forward kinematics and damped-least-squares inverse kinematics.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{Isometry3, Matrix6, Translation3, UnitQuaternion, Vector3, Vector6};
use thiserror::Error;

use crate::geometry::Pose;

pub const JOINTS: usize = 6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KinematicsError {
    #[error("joint {joint}: lower limit {lo} must be below upper limit {hi}")]
    InvalidLimits { joint: usize, lo: f64, hi: f64 },
    #[error("non-finite arm parameter: {0}")]
    NonFinite(&'static str),
    #[error("IK tolerances must be positive")]
    InvalidTolerance,
    #[error("target at {distance:.3} m is beyond the arm reach of {reach:.3} m")]
    Unreachable { distance: f64, reach: f64 },
    #[error(
        "IK did not converge after {iterations} iterations (position error {pos_err:.3e} m, rotation error {rot_err:.3e} rad)"
    )]
    NotConverged {
        iterations: usize,
        pos_err: f64,
        rot_err: f64,
    },
}

/// One standard DH row: `Rz(theta) * Tz(d) * Tx(a) * Rx(alpha)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DhRow {
    pub a: f64,
    pub d: f64,
    pub alpha: f64,
    pub theta_offset: f64,
}

impl DhRow {
    pub const fn new(a: f64, d: f64, alpha: f64, theta_offset: f64) -> Self {
        Self {
            a,
            d,
            alpha,
            theta_offset,
        }
    }

    pub fn transform(&self, q: f64) -> Isometry3<f64> {
        let rot_z = Isometry3::from_parts(
            Translation3::new(0.0, 0.0, self.d),
            UnitQuaternion::from_axis_angle(&Vector3::z_axis(), q + self.theta_offset),
        );
        let rot_x = Isometry3::from_parts(
            Translation3::new(self.a, 0.0, 0.0),
            UnitQuaternion::from_axis_angle(&Vector3::x_axis(), self.alpha),
        );
        rot_z * rot_x
    }

    fn reach(&self) -> f64 {
        self.a.hypot(self.d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointLimit {
    pub lo: f64,
    pub hi: f64,
}

impl JointLimit {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, q: f64) -> bool {
        self.lo <= q && q <= self.hi
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// Joint angles in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointConfig(pub [f64; JOINTS]);

impl JointConfig {
    pub const fn zeros() -> Self {
        Self([0.0; JOINTS])
    }

    pub fn as_vector(&self) -> Vector6<f64> {
        Vector6::from_row_slice(&self.0)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|q| q.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArmModel {
    pub name: String,
    pub dh: [DhRow; JOINTS],
    pub limits: [JointLimit; JOINTS],
    pub base: Pose,
    /// Configuration used to seed the first IK solve of a run.
    pub home: JointConfig,
}

impl ArmModel {
    pub fn new(
        name: impl Into<String>,
        dh: [DhRow; JOINTS],
        limits: [JointLimit; JOINTS],
        base: Pose,
        home: JointConfig,
    ) -> Result<Self, KinematicsError> {
        let finite_dh = dh
            .iter()
            .all(|r| [r.a, r.d, r.alpha, r.theta_offset].iter().all(|v| v.is_finite()));
        if !finite_dh {
            return Err(KinematicsError::NonFinite("DH row"));
        }
        for (joint, l) in limits.iter().enumerate() {
            if !(l.lo.is_finite() && l.hi.is_finite()) {
                return Err(KinematicsError::NonFinite("joint limit"));
            }
            if l.lo >= l.hi {
                return Err(KinematicsError::InvalidLimits {
                    joint,
                    lo: l.lo,
                    hi: l.hi,
                });
            }
        }
        if !crate::geometry::is_finite(&base.position) || !home.is_finite() {
            return Err(KinematicsError::NonFinite("base pose or home configuration"));
        }
        Ok(Self {
            name: name.into(),
            dh,
            limits,
            base,
            home,
        })
    }

    /// Universal Robots UR5e nominal DH parameters (manufacturer values).
    pub fn ur5e() -> Self {
        let full = JointLimit::new(-2.0 * PI, 2.0 * PI);
        Self::new(
            "ur5e",
            [
                DhRow::new(0.0, 0.1625, FRAC_PI_2, 0.0),
                DhRow::new(-0.425, 0.0, 0.0, 0.0),
                DhRow::new(-0.3922, 0.0, 0.0, 0.0),
                DhRow::new(0.0, 0.1333, FRAC_PI_2, 0.0),
                DhRow::new(0.0, 0.0997, -FRAC_PI_2, 0.0),
                DhRow::new(0.0, 0.0996, 0.0, 0.0),
            ],
            [full, full, JointLimit::new(-PI, PI), full, full, full],
            Pose::identity(),
            JointConfig([0.0, -FRAC_PI_2, FRAC_PI_2, -FRAC_PI_2, -FRAC_PI_2, 0.0]),
        )
        .expect("preset is valid")
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "ur5e" => Some(Self::ur5e()),
            _ => None,
        }
    }

    pub fn with_base(mut self, base: Pose) -> Self {
        self.base = base;
        self
    }

    /// Upper bound on the distance from the base origin to the flange.
    pub fn reach(&self) -> f64 {
        self.dh.iter().map(DhRow::reach).sum()
    }

    pub fn base_isometry(&self) -> Isometry3<f64> {
        Isometry3::from_parts(self.base.position.into(), self.base.orientation)
    }

    /// Base frame followed by the frame after each joint (7 frames).
    pub fn frames(&self, q: &JointConfig) -> [Isometry3<f64>; JOINTS + 1] {
        let mut frames = [Isometry3::identity(); JOINTS + 1];
        frames[0] = self.base_isometry();
        for i in 0..JOINTS {
            frames[i + 1] = frames[i] * self.dh[i].transform(q.0[i]);
        }
        frames
    }

    pub fn forward_kinematics(&self, q: &JointConfig) -> Pose {
        let flange = self.frames(q)[JOINTS];
        Pose::new(flange.translation.vector, flange.rotation)
    }

    pub fn within_limits(&self, q: &JointConfig) -> bool {
        q.0.iter().zip(&self.limits).all(|(q, l)| l.contains(*q))
    }

    pub fn clamp_to_limits(&self, q: &mut JointConfig) {
        for (q, l) in q.0.iter_mut().zip(&self.limits) {
            *q = q.clamp(l.lo, l.hi);
        }
    }

    /// Geometric Jacobian in the world frame; rows are (linear, angular).
    pub fn jacobian(&self, q: &JointConfig) -> Matrix6<f64> {
        let frames = self.frames(q);
        let tip = frames[JOINTS].translation.vector;
        let mut jac = Matrix6::zeros();
        for i in 0..JOINTS {
            let z = frames[i].rotation * Vector3::z();
            let o = frames[i].translation.vector;
            let linear = z.cross(&(tip - o));
            jac.fixed_view_mut::<3, 1>(0, i).copy_from(&linear);
            jac.fixed_view_mut::<3, 1>(3, i).copy_from(&z);
        }
        jac
    }

    pub fn inverse_kinematics(
        &self,
        target: &Pose,
        seed: &JointConfig,
        cfg: &IkConfig,
    ) -> Result<IkSolution, KinematicsError> {
        inverse_kinematics(self, target, seed, cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IkConfig {
    pub tol_pos: f64,
    pub tol_rot: f64,
    pub max_iters: usize,
    /// Initial damping factor lambda; the normal equations use lambda^2.
    pub damping: f64,
    /// Largest per-iteration change of any joint (rad).
    pub max_step: f64,
}

impl Default for IkConfig {
    fn default() -> Self {
        Self {
            tol_pos: 1e-6,
            tol_rot: 1e-6,
            max_iters: 500,
            damping: 0.01,
            max_step: 0.3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IkSolution {
    pub q: JointConfig,
    pub iterations: usize,
    pub pos_err: f64,
    pub rot_err: f64,
}

/// 6-vector pose error: position difference then rotation vector, world frame.
fn pose_error(current: &Pose, target: &Pose) -> Vector6<f64> {
    let dp = target.position - current.position;
    let dr = (target.orientation * current.orientation.inverse()).scaled_axis();
    Vector6::new(dp.x, dp.y, dp.z, dr.x, dr.y, dr.z)
}

/// Damped least squares that keeps every iterate inside the joint limits.
///
/// The damping starts at `cfg.damping` and follows a Levenberg-Marquardt
/// schedule: it halves after a step that lowers the pose error and grows
/// fourfold after a rejected one. A fixed damping stalls near singular
/// configurations, where the smallest singular value falls below it.
///
/// Solutions within a few hundredths of a radian of a joint limit can trap
/// the first descent in a local minimum, so a failed attempt is repeated from
/// the same seed with 10x and then 100x the initial damping. Each attempt has
/// its own budget of `cfg.max_iters` iterations.
///
/// A returned configuration always reproduces `target` within the requested
/// tolerances and lies inside the joint limits.
pub fn inverse_kinematics(
    arm: &ArmModel,
    target: &Pose,
    seed: &JointConfig,
    cfg: &IkConfig,
) -> Result<IkSolution, KinematicsError> {
    if !(cfg.tol_pos > 0.0 && cfg.tol_rot > 0.0) {
        return Err(KinematicsError::InvalidTolerance);
    }
    if !(cfg.damping > 0.0 && cfg.damping.is_finite()) {
        return Err(KinematicsError::NonFinite("damping"));
    }
    let distance = (target.position - arm.base.position).norm();
    let reach = arm.reach();
    if !(distance <= reach) {
        return Err(KinematicsError::Unreachable { distance, reach });
    }

    let mut spent = 0;
    let (mut best_pos, mut best_rot) = (f64::INFINITY, f64::INFINITY);
    for scale in [1.0, 10.0, 100.0] {
        match descend(arm, target, seed, cfg, cfg.damping * scale) {
            Ok(mut sol) => {
                sol.iterations += spent;
                return Ok(sol);
            }
            Err((iterations, pos_err, rot_err)) => {
                spent += iterations;
                if pos_err + rot_err < best_pos + best_rot {
                    (best_pos, best_rot) = (pos_err, rot_err);
                }
            }
        }
    }
    Err(KinematicsError::NotConverged {
        iterations: spent,
        pos_err: best_pos,
        rot_err: best_rot,
    })
}

/// One Levenberg-Marquardt descent; errors carry (iterations, pos_err, rot_err).
fn descend(
    arm: &ArmModel,
    target: &Pose,
    seed: &JointConfig,
    cfg: &IkConfig,
    initial_damping: f64,
) -> Result<IkSolution, (usize, f64, f64)> {
    const MIN_DAMPING: f64 = 1e-9;
    const MAX_DAMPING: f64 = 1e3;
    let mut damping = initial_damping;
    let mut q = *seed;
    arm.clamp_to_limits(&mut q);
    let mut current = arm.forward_kinematics(&q);
    let mut err = pose_error(&current, target);
    let mut iterations = 0;
    loop {
        let (pos_err, rot_err) = current.error_to(target);
        if pos_err <= cfg.tol_pos && rot_err <= cfg.tol_rot {
            return Ok(IkSolution {
                q,
                iterations,
                pos_err,
                rot_err,
            });
        }
        let not_converged = (iterations, pos_err, rot_err);
        if iterations >= cfg.max_iters {
            return Err(not_converged);
        }

        let jac = arm.jacobian(&q);
        let jjt = jac * jac.transpose() + Matrix6::identity() * (damping * damping);
        let Some(chol) = jjt.cholesky() else {
            return Err(not_converged);
        };
        let mut dq = jac.transpose() * chol.solve(&err);
        let largest = dq.amax();
        if largest > cfg.max_step {
            dq *= cfg.max_step / largest;
        }
        let mut trial = q;
        for ((qi, dqi), limit) in trial.0.iter_mut().zip(dq.iter()).zip(&arm.limits) {
            // A joint that would overshoot moves halfway to its limit instead.
            // Clamping onto the limit can park the elbow on its straight
            // singularity, where the update has no component along it.
            let next = *qi + dqi;
            *qi = if next > limit.hi {
                0.5 * (*qi + limit.hi)
            } else if next < limit.lo {
                0.5 * (*qi + limit.lo)
            } else {
                next
            };
        }
        iterations += 1;

        let trial_pose = arm.forward_kinematics(&trial);
        let trial_err = pose_error(&trial_pose, target);
        if trial_err.norm() < err.norm() {
            q = trial;
            current = trial_pose;
            err = trial_err;
            damping = (damping * 0.5).max(MIN_DAMPING);
        } else if damping < MAX_DAMPING {
            damping *= 4.0;
        } else {
            return Err((iterations, pos_err, rot_err));
        }
    }
}

/// Free-function form of [`ArmModel::forward_kinematics`].
pub fn forward_kinematics(arm: &ArmModel, q: &JointConfig) -> Pose {
    arm.forward_kinematics(q)
}

pub fn within_limits(arm: &ArmModel, q: &JointConfig) -> bool {
    arm.within_limits(q)
}

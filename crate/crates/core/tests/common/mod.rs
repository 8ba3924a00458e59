//! Shared fixtures for the integration tests.

#![allow(dead_code)]

use appruss::geometry::{nearest_obstacle_distance, CubicBezier, Cuboid, Vec3};
use appruss::planner::PlannerConfig;
use appruss::geometry::Pose;
use appruss::kinematics::{ArmModel, JointConfig};
use rand::Rng;

/// Independent de Casteljau evaluator.
pub fn de_casteljau(points: [Vec3; 4], t: f64) -> Vec3 {
    let mut pts = points.to_vec();
    while pts.len() > 1 {
        pts = pts.windows(2).map(|w| w[0] * (1.0 - t) + w[1] * t).collect();
    }
    pts[0]
}

pub fn random_vec<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> Vec3 {
    Vec3::new(
        rng.random_range(lo..hi),
        rng.random_range(lo..hi),
        rng.random_range(lo..hi),
    )
}

pub fn random_curve<R: Rng>(rng: &mut R) -> CubicBezier {
    CubicBezier::new(
        random_vec(rng, -2.0, 2.0),
        random_vec(rng, -2.0, 2.0),
        random_vec(rng, -2.0, 2.0),
        random_vec(rng, -2.0, 2.0),
    )
    .unwrap()
}

/// A planning problem in meters, placed in front of the default arm.
#[derive(Debug, Clone)]
pub struct Problem {
    pub source: Vec3,
    pub target: Vec3,
    pub obstacles: Vec<Cuboid>,
}

/// Random source/target with 1 to 4 boxes scattered around the segment; both
/// endpoints keep at least `clearance` from every box.
pub fn random_problem<R: Rng>(rng: &mut R, clearance: f64) -> Problem {
    let cfg = PlannerConfig::default();
    loop {
        let source = Vec3::new(
            rng.random_range(-0.1..0.5),
            rng.random_range(-0.2..0.2),
            rng.random_range(0.05..0.5),
        );
        let target = Vec3::new(
            rng.random_range(-0.1..0.5),
            rng.random_range(-0.2..0.2),
            rng.random_range(0.05..0.5),
        );
        if (target - source).norm() < 0.2 {
            continue;
        }
        let n = rng.random_range(1..=4);
        let obstacles: Vec<Cuboid> = (0..n)
            .map(|_| {
                let along = source.lerp(&target, rng.random_range(0.2..0.8));
                let center = along + random_vec(rng, -0.06, 0.06);
                let half = Vec3::new(
                    rng.random_range(0.01..0.05),
                    rng.random_range(0.01..0.05),
                    rng.random_range(0.01..0.05),
                );
                Cuboid::new(center, half).unwrap()
            })
            .collect();
        let feasible = [source, target].iter().all(|p| {
            cfg.workspace.contains(p) && nearest_obstacle_distance(p, &obstacles) >= clearance
        });
        if feasible {
            return Problem {
                source,
                target,
                obstacles,
            };
        }
    }
}

/// Tool pointing straight down, as when facing an upright marker.
pub fn tool_down() -> nalgebra::UnitQuaternion<f64> {
    appruss::perception::facing_orientation(&appruss::geometry::Pose::identity())
}

/// Success predicted for a noiseless run of `curve`: every waypoint and every
/// straight move between waypoints stays clear, each waypoint is solvable by
/// IK seeded from the previous solution, and the final pose is within
/// tolerance of the curve end.
pub fn zero_noise_oracle(
    curve: &CubicBezier,
    tool: &nalgebra::UnitQuaternion<f64>,
    arm: &appruss::kinematics::ArmModel,
    obstacles: &[Cuboid],
    cfg: &appruss::sim::ExecutionConfig,
) -> bool {
    use appruss::geometry::{segment_clearance, Pose};
    use appruss::kinematics::IkConfig;
    use appruss::planner::validate_curve;

    let n = cfg.n_waypoints;
    if validate_curve(curve, obstacles, n) <= cfg.collision_clearance {
        return false;
    }
    let waypoints = curve.sample_uniform(n).unwrap();
    let chords_clear = waypoints.windows(2).all(|w| {
        obstacles
            .iter()
            .all(|o| segment_clearance(&w[0], &w[1], o, 20).unwrap() > cfg.collision_clearance)
    });
    if !chords_clear {
        return false;
    }
    let ik = |iters| IkConfig {
        max_iters: iters,
        ..IkConfig::default()
    };
    let mut q = arm.home;
    for (i, wp) in waypoints.iter().enumerate() {
        let iters = if i == 0 { 2000 } else { 200 };
        match arm.inverse_kinematics(&Pose::new(*wp, *tool), &q, &ik(iters)) {
            Ok(sol) if arm.within_limits(&sol.q) => q = sol.q,
            _ => return false,
        }
    }
    (arm.forward_kinematics(&q).position - curve.p3).norm() <= cfg.pos_tol
}

pub type Mat4 = [[f64; 4]; 4];

pub fn matmul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

/// Textbook standard DH link matrix.
pub fn dh_matrix(a: f64, d: f64, alpha: f64, theta: f64) -> Mat4 {
    let (st, ct) = theta.sin_cos();
    let (sa, ca) = alpha.sin_cos();
    [
        [ct, -st * ca, st * sa, a * ct],
        [st, ct * ca, -ct * sa, a * st],
        [0.0, sa, ca, d],
        [0.0, 0.0, 0.0, 1.0],
    ]
}

pub fn pose_matrix(p: &Pose) -> Mat4 {
    let r = p.orientation.to_rotation_matrix();
    let mut m = [[0.0; 4]; 4];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = r[(i, j)];
        }
        m[i][3] = p.position[i];
    }
    m[3][3] = 1.0;
    m
}

pub fn oracle_fk(arm: &ArmModel, q: &JointConfig) -> Mat4 {
    arm.dh.iter().zip(q.0).fold(pose_matrix(&arm.base), |acc, (row, qi)| {
        matmul(&acc, &dh_matrix(row.a, row.d, row.alpha, qi + row.theta_offset))
    })
}

pub fn random_config<R: Rng>(rng: &mut R, arm: &ArmModel) -> JointConfig {
    JointConfig(std::array::from_fn(|i| {
        rng.random_range(arm.limits[i].lo..=arm.limits[i].hi)
    }))
}

/// Position distance and largest rotation-matrix entry difference.
pub fn fk_disagreement(arm: &ArmModel, q: &JointConfig) -> (f64, f64) {
    let m = oracle_fk(arm, q);
    let got = pose_matrix(&arm.forward_kinematics(q));
    let pos = (0..3).map(|i| (m[i][3] - got[i][3]).powi(2)).sum::<f64>().sqrt();
    let rot = (0..3)
        .flat_map(|i| (0..3).map(move |j| (i, j)))
        .map(|(i, j)| (m[i][j] - got[i][j]).abs())
        .fold(0.0, f64::max);
    (pos, rot)
}

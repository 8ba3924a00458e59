mod common;

use appruss::experiment::default_arm;
use appruss::geometry::{Pose, Vec3};
use appruss::kinematics::{ArmModel, IkConfig, JointConfig, KinematicsError};
use common::{fk_disagreement, random_config};
use nalgebra::UnitQuaternion;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn fk_matches_matrix_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for arm in [ArmModel::ur5e(), default_arm()] {
        for _ in 0..1000 {
            let q = random_config(&mut rng, &arm);
            let (pos, rot) = fk_disagreement(&arm, &q);
            assert!(pos < 1e-9 && rot < 1e-9, "q={q:?} pos={pos} rot={rot}");
        }
    }
}

#[test]
fn ur5e_zero_pose_is_frozen() {
    // Flange at q = 0 with the base at the origin: (a2 + a3, -(d4 + d6), d1 - d5),
    // tool z axis along -y.
    let pose = ArmModel::ur5e().forward_kinematics(&JointConfig::zeros());
    let expected = Vec3::new(-0.8172, -0.2329, 0.0628);
    assert!((pose.position - expected).norm() < 1e-12, "{:?}", pose.position);
    let z = pose.orientation * Vec3::z();
    assert!((z - Vec3::new(0.0, -1.0, 0.0)).norm() < 1e-12, "{z:?}");
}

#[test]
fn ik_round_trip_on_reachable_poses() {
    let arm = default_arm();
    let cfg = IkConfig {
        tol_pos: 1e-7,
        tol_rot: 1e-7,
        max_iters: 1000,
        ..IkConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..500 {
        let truth = random_config(&mut rng, &arm);
        let target = arm.forward_kinematics(&truth);
        // Perturbed seed, reflected rather than clamped at the limits so it
        // never starts on the straight-elbow singularity at the elbow limit.
        let mut seed = truth;
        for (q, limit) in seed.0.iter_mut().zip(&arm.limits) {
            let delta = rng.random_range(-0.2..0.2);
            *q += if limit.contains(*q + delta) { delta } else { -delta };
        }
        let sol = arm.inverse_kinematics(&target, &seed, &cfg).unwrap();
        let (dp, dr) = arm.forward_kinematics(&sol.q).error_to(&target);
        assert!(dp < 1e-6 && dr < 1e-6, "dp={dp} dr={dr}");
        assert!(arm.within_limits(&sol.q));
    }
}

#[test]
fn ik_returns_are_always_sound() {
    // Seeds from home: some fail, but anything returned must meet the tolerances.
    let arm = default_arm();
    let cfg = IkConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut solved = 0;
    for _ in 0..200 {
        let target = Pose::new(
            Vec3::new(
                rng.random_range(-0.6..0.8),
                rng.random_range(-1.2..0.4),
                rng.random_range(-0.2..0.9),
            ),
            UnitQuaternion::from_euler_angles(
                rng.random_range(-3.0..3.0),
                rng.random_range(-1.5..1.5),
                rng.random_range(-3.0..3.0),
            ),
        );
        match arm.inverse_kinematics(&target, &arm.home, &cfg) {
            Ok(sol) => {
                let (dp, dr) = arm.forward_kinematics(&sol.q).error_to(&target);
                assert!(dp <= cfg.tol_pos && dr <= cfg.tol_rot);
                assert!(arm.within_limits(&sol.q));
                solved += 1;
            }
            Err(KinematicsError::NotConverged { .. } | KinematicsError::Unreachable { .. }) => {}
            Err(e) => panic!("unexpected error {e}"),
        }
    }
    assert!(solved > 0);
}

#[test]
fn ik_is_deterministic() {
    let arm = default_arm();
    let target = Pose::new(
        Vec3::new(0.3, 0.0, 0.3),
        UnitQuaternion::from_axis_angle(&Vec3::x_axis(), std::f64::consts::PI),
    );
    let a = arm.inverse_kinematics(&target, &arm.home, &IkConfig::default());
    let b = arm.inverse_kinematics(&target, &arm.home, &IkConfig::default());
    assert_eq!(a, b);
}

//! Synthetic fiducial-marker pose oracle.
//!
//! Stands in for camera-based marker detection: ground-truth marker poses are
//! perturbed with Gaussian position noise and a small random rotation, and
//! each marker is independently dropped with probability `1 - detection_prob`.

use nalgebra::UnitQuaternion;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::geometry::{Pose, Vec3};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PerceptionError {
    #[error("marker {0} was not observed")]
    TargetNotFound(u32),
    #[error("invalid noise model: {0}")]
    InvalidNoise(&'static str),
}

/// A fiducial marker; its +z axis is the surface normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Marker {
    pub id: u32,
    pub pose: Pose,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub sigma_pos: f64,
    pub sigma_rot: f64,
    pub detection_prob: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            sigma_pos: 0.002,
            sigma_rot: 0.01,
            detection_prob: 1.0,
        }
    }
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        Self {
            sigma_pos: 0.0,
            sigma_rot: 0.0,
            detection_prob: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), PerceptionError> {
        if !(self.sigma_pos >= 0.0 && self.sigma_pos.is_finite()) {
            return Err(PerceptionError::InvalidNoise("sigma_pos must be >= 0"));
        }
        if !(self.sigma_rot >= 0.0 && self.sigma_rot.is_finite()) {
            return Err(PerceptionError::InvalidNoise("sigma_rot must be >= 0"));
        }
        if !(0.0..=1.0).contains(&self.detection_prob) {
            return Err(PerceptionError::InvalidNoise("detection_prob must be in [0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub id: u32,
    pub pose: Pose,
}

/// Noisy observations of `markers`, in input order, deterministic in `rng_seed`.
///
/// Every marker consumes the same number of random draws whether or not it is
/// detected, so changing `detection_prob` does not shift the noise of the
/// other markers.
pub fn observe_markers(
    markers: &[Marker],
    noise: &NoiseModel,
    rng_seed: u64,
) -> Result<Vec<Observation>, PerceptionError> {
    noise.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut out = Vec::with_capacity(markers.len());
    for marker in markers {
        let detect: f64 = rng.random();
        let dp = gaussian3(&mut rng) * noise.sigma_pos;
        let dr = gaussian3(&mut rng) * noise.sigma_rot;
        if detect < noise.detection_prob {
            let pose = Pose::new(
                marker.pose.position + dp,
                UnitQuaternion::from_scaled_axis(dr) * marker.pose.orientation,
            );
            out.push(Observation {
                id: marker.id,
                pose,
            });
        }
    }
    Ok(out)
}

pub(crate) fn gaussian3<R: Rng>(rng: &mut R) -> Vec3 {
    Vec3::new(
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
    )
}

pub fn select_target(observations: &[Observation], desired_id: u32) -> Result<Pose, PerceptionError> {
    observations
        .iter()
        .find(|o| o.id == desired_id)
        .map(|o| o.pose)
        .ok_or(PerceptionError::TargetNotFound(desired_id))
}

/// Point `standoff` meters along the marker normal.
pub fn approach_point(target: &Pose, standoff: f64) -> Vec3 {
    target.position + target.orientation * Vec3::new(0.0, 0.0, standoff)
}

/// Tool orientation facing the marker: tool +z opposite the marker normal.
pub fn facing_orientation(target: &Pose) -> UnitQuaternion<f64> {
    target.orientation * UnitQuaternion::from_axis_angle(&Vec3::x_axis(), std::f64::consts::PI)
}

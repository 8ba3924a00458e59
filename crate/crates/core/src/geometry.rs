//! Vector and pose primitives, cubic Bezier curves, and axis-aligned cuboid
//! obstacles with the distance queries the planner and simulator share.

use nalgebra::{UnitQuaternion, Vector3};
use thiserror::Error;

pub type Vec3 = Vector3<f64>;

/// Chord samples used by [`CubicBezier::arc_length_default`].
pub const DEFAULT_ARC_LENGTH_SAMPLES: usize = 1000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("curve parameter t = {0} is outside [0, 1]")]
    ParameterOutOfRange(f64),
    #[error("at least {min} samples are required, got {got}")]
    TooFewSamples { min: usize, got: usize },
    #[error("non-finite coordinate in {0}")]
    NonFinite(&'static str),
    #[error("cuboid half-extents must be strictly positive, got {0:?}")]
    NonPositiveExtent([f64; 3]),
}

pub fn is_finite(v: &Vec3) -> bool {
    v.iter().all(|c| c.is_finite())
}

/// Rigid-body pose: position in meters plus a unit-quaternion orientation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub position: Vec3,
    pub orientation: UnitQuaternion<f64>,
}

impl Pose {
    pub fn new(position: Vec3, orientation: UnitQuaternion<f64>) -> Self {
        Self {
            position,
            orientation,
        }
    }

    pub fn from_position(position: Vec3) -> Self {
        Self::new(position, UnitQuaternion::identity())
    }

    pub fn identity() -> Self {
        Self::from_position(Vec3::zeros())
    }

    /// Position distance and rotation angle (axis-angle magnitude) to `other`.
    pub fn error_to(&self, other: &Pose) -> (f64, f64) {
        (
            (self.position - other.position).norm(),
            self.orientation.angle_to(&other.orientation),
        )
    }
}

/// Cubic Bezier curve through `p0` and `p3`, shaped by `p1` and `p2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicBezier {
    pub p0: Vec3,
    pub p1: Vec3,
    pub p2: Vec3,
    pub p3: Vec3,
}

impl CubicBezier {
    pub fn new(p0: Vec3, p1: Vec3, p2: Vec3, p3: Vec3) -> Result<Self, GeometryError> {
        if [p0, p1, p2, p3].iter().all(is_finite) {
            Ok(Self { p0, p1, p2, p3 })
        } else {
            Err(GeometryError::NonFinite("bezier control point"))
        }
    }

    pub fn control_points(&self) -> [Vec3; 4] {
        [self.p0, self.p1, self.p2, self.p3]
    }

    pub fn reversed(&self) -> Self {
        Self {
            p0: self.p3,
            p1: self.p2,
            p2: self.p1,
            p3: self.p0,
        }
    }

    /// Evaluates the curve at `t` in `[0, 1]`.
    pub fn eval(&self, t: f64) -> Result<Vec3, GeometryError> {
        if !(0.0..=1.0).contains(&t) {
            return Err(GeometryError::ParameterOutOfRange(t));
        }
        Ok(self.point_at(t))
    }

    /// Bernstein-form evaluation without the range check.
    pub(crate) fn point_at(&self, t: f64) -> Vec3 {
        let u = 1.0 - t;
        let b0 = u * u * u;
        let b1 = 3.0 * u * u * t;
        let b2 = 3.0 * u * t * t;
        let b3 = t * t * t;
        self.p0 * b0 + self.p1 * b1 + self.p2 * b2 + self.p3 * b3
    }

    /// `n` points at `t_i = i / (n - 1)`. The first is `p0` and the last `p3`.
    pub fn sample_uniform(&self, n: usize) -> Result<Vec<Vec3>, GeometryError> {
        check_samples(n)?;
        let last = (n - 1) as f64;
        Ok((0..n).map(|i| self.point_at(i as f64 / last)).collect())
    }

    /// Chordal arc length over `n` uniform samples.
    pub fn arc_length(&self, n: usize) -> Result<f64, GeometryError> {
        Ok(polyline_length(&self.sample_uniform(n)?))
    }

    pub fn arc_length_default(&self) -> f64 {
        polyline_length(
            &self
                .sample_uniform(DEFAULT_ARC_LENGTH_SAMPLES)
                .expect("default sample count is valid"),
        )
    }
}

pub fn polyline_length(points: &[Vec3]) -> f64 {
    points.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
}

fn check_samples(n: usize) -> Result<(), GeometryError> {
    if n < 2 {
        Err(GeometryError::TooFewSamples { min: 2, got: n })
    } else {
        Ok(())
    }
}

/// Axis-aligned box obstacle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cuboid {
    pub center: Vec3,
    pub half_extents: Vec3,
}

impl Cuboid {
    pub fn new(center: Vec3, half_extents: Vec3) -> Result<Self, GeometryError> {
        if !is_finite(&center) || !is_finite(&half_extents) {
            return Err(GeometryError::NonFinite("cuboid"));
        }
        if half_extents.iter().any(|h| *h <= 0.0) {
            return Err(GeometryError::NonPositiveExtent([
                half_extents.x,
                half_extents.y,
                half_extents.z,
            ]));
        }
        Ok(Self {
            center,
            half_extents,
        })
    }

    pub fn min(&self) -> Vec3 {
        self.center - self.half_extents
    }

    pub fn max(&self) -> Vec3 {
        self.center + self.half_extents
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        let d = (p - self.center).abs();
        d.iter().zip(self.half_extents.iter()).all(|(d, h)| d <= h)
    }

    /// Closest point of the (solid) box to `p`.
    pub fn clamp_point(&self, p: &Vec3) -> Vec3 {
        let (lo, hi) = (self.min(), self.max());
        Vec3::new(
            p.x.clamp(lo.x, hi.x),
            p.y.clamp(lo.y, hi.y),
            p.z.clamp(lo.z, hi.z),
        )
    }

    /// Uniform scaling about the origin.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            center: self.center * factor,
            half_extents: self.half_extents * factor,
        }
    }
}

/// Euclidean distance from `p` to the box; zero inside or on the boundary.
pub fn point_cuboid_distance(p: &Vec3, cuboid: &Cuboid) -> f64 {
    let excess = (p - cuboid.center).abs() - cuboid.half_extents;
    excess.map(|e| e.max(0.0)).norm()
}

/// Minimum box distance over `n` uniform samples of the segment `a`-`b`.
pub fn segment_clearance(
    a: &Vec3,
    b: &Vec3,
    cuboid: &Cuboid,
    n: usize,
) -> Result<f64, GeometryError> {
    check_samples(n)?;
    let last = (n - 1) as f64;
    Ok((0..n)
        .map(|i| {
            let t = i as f64 / last;
            point_cuboid_distance(&a.lerp(b, t), cuboid)
        })
        .fold(f64::INFINITY, f64::min))
}

/// Minimum distance from `p` to any of `obstacles`, or infinity if there are none.
pub fn nearest_obstacle_distance(p: &Vec3, obstacles: &[Cuboid]) -> f64 {
    obstacles
        .iter()
        .map(|o| point_cuboid_distance(p, o))
        .fold(f64::INFINITY, f64::min)
}

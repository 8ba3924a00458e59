//! Obstacle-aware cubic Bezier planning.
//!
//! The planner starts from the straight segment (control points at its thirds)
//! and repels the two inner control points away from the obstacle nearest to
//! the worst clearance violation until every sampled point keeps the required
//! clearance. Control points are kept inside an axis-aligned workspace box.

use thiserror::Error;

use crate::geometry::{nearest_obstacle_distance, point_cuboid_distance, CubicBezier, Cuboid, Vec3};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error("invalid endpoints: {0}")]
    InvalidEndpoints(String),
    #[error("planning failed after {iterations} iterations (clearance {achieved:.4} m < {required:.4} m)")]
    PlanningFailed {
        iterations: usize,
        achieved: f64,
        required: f64,
    },
    #[error("invalid planner configuration: {0}")]
    InvalidConfig(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannerConfig {
    /// Minimum distance from any sampled path point to any obstacle (m).
    pub clearance: f64,
    /// Samples per candidate curve used for collision checks.
    pub n_check: usize,
    /// Control-point displacement per repulsion iteration (m).
    pub step: f64,
    pub max_iters: usize,
    /// Region the control points must stay inside.
    pub workspace: Cuboid,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            clearance: 0.05,
            n_check: 200,
            step: 0.05,
            max_iters: 100,
            workspace: Cuboid {
                center: Vec3::new(0.0, 0.0, 0.5),
                half_extents: Vec3::new(1.5, 1.5, 1.0),
            },
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<(), PlanError> {
        if !(self.clearance >= 0.0) {
            return Err(PlanError::InvalidConfig("clearance must be >= 0"));
        }
        if self.n_check < 2 {
            return Err(PlanError::InvalidConfig("n_check must be >= 2"));
        }
        if !(self.step > 0.0) {
            return Err(PlanError::InvalidConfig("step must be > 0"));
        }
        if self.max_iters < 1 {
            return Err(PlanError::InvalidConfig("max_iters must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanResult {
    pub curve: CubicBezier,
    pub iterations_used: usize,
    /// Smallest obstacle distance over the planner's samples; infinite without obstacles.
    pub min_clearance_achieved: f64,
}

/// Collinear cubic from `source` to `target` with inner points at the thirds.
pub fn straight_line_path(source: Vec3, target: Vec3) -> Result<CubicBezier, PlanError> {
    if source == target {
        return Err(PlanError::InvalidEndpoints(
            "source and target coincide".into(),
        ));
    }
    CubicBezier::new(
        source,
        source.lerp(&target, 1.0 / 3.0),
        source.lerp(&target, 2.0 / 3.0),
        target,
    )
    .map_err(|e| PlanError::InvalidEndpoints(e.to_string()))
}

/// Smallest distance from `n` uniform curve samples to any obstacle.
///
/// Returns `f64::INFINITY` when there are no obstacles.
pub fn validate_curve(curve: &CubicBezier, obstacles: &[Cuboid], n: usize) -> f64 {
    let n = n.max(2);
    let last = (n - 1) as f64;
    (0..n)
        .map(|i| nearest_obstacle_distance(&curve.point_at(i as f64 / last), obstacles))
        .fold(f64::INFINITY, f64::min)
}

pub fn plan_path(
    source: Vec3,
    target: Vec3,
    obstacles: &[Cuboid],
    cfg: &PlannerConfig,
) -> Result<PlanResult, PlanError> {
    cfg.validate()?;
    let mut curve = straight_line_path(source, target)?;
    for (name, p) in [("source", &source), ("target", &target)] {
        if !cfg.workspace.contains(p) {
            return Err(PlanError::InvalidEndpoints(format!(
                "{name} lies outside the workspace"
            )));
        }
        let d = nearest_obstacle_distance(p, obstacles);
        if d < cfg.clearance {
            return Err(PlanError::InvalidEndpoints(format!(
                "{name} is {d:.4} m from an obstacle, closer than the clearance {:.4} m",
                cfg.clearance
            )));
        }
    }
    // Thirds of a segment between workspace points are inside the (convex) workspace.

    let axis = (target - source).normalize();
    let last = (cfg.n_check - 1) as f64;
    let mut iterations = 0;
    loop {
        let worst = (0..cfg.n_check)
            .map(|i| {
                let p = curve.point_at(i as f64 / last);
                (p, nearest_obstacle_distance(&p, obstacles))
            })
            .fold(None, |best: Option<(Vec3, f64)>, (p, d)| match best {
                Some((_, bd)) if bd <= d => best,
                _ => Some((p, d)),
            });
        let (sample, achieved) = worst.expect("n_check >= 2");
        if achieved >= cfg.clearance {
            return Ok(PlanResult {
                curve,
                iterations_used: iterations,
                min_clearance_achieved: achieved,
            });
        }
        if iterations >= cfg.max_iters {
            return Err(PlanError::PlanningFailed {
                iterations,
                achieved,
                required: cfg.clearance,
            });
        }

        let direction = repulsion_direction(&sample, obstacles, &axis);
        let p1 = cfg.workspace.clamp_point(&(curve.p1 + direction * cfg.step));
        let p2 = cfg.workspace.clamp_point(&(curve.p2 + direction * cfg.step));
        iterations += 1;
        if p1 == curve.p1 && p2 == curve.p2 {
            return Err(PlanError::PlanningFailed {
                iterations,
                achieved,
                required: cfg.clearance,
            });
        }
        curve.p1 = p1;
        curve.p2 = p2;
    }
}

/// Unit push direction away from the obstacle nearest to `sample`,
/// perpendicular to the source-target `axis`.
fn repulsion_direction(sample: &Vec3, obstacles: &[Cuboid], axis: &Vec3) -> Vec3 {
    const DEGENERATE: f64 = 1e-12;
    let nearest = obstacles
        .iter()
        .map(|o| (o, point_cuboid_distance(sample, o)))
        .fold(None, |best: Option<(&Cuboid, f64)>, (o, d)| match best {
            Some((_, bd)) if bd <= d => best,
            _ => Some((o, d)),
        })
        .map(|(o, _)| o)
        .expect("a violation implies at least one obstacle");
    let perpendicular = |v: Vec3| v - axis * axis.dot(&v);
    let away = perpendicular(sample - nearest.center);
    if away.norm() > DEGENERATE {
        return away.normalize();
    }
    let up = perpendicular(Vec3::z());
    if up.norm() > DEGENERATE {
        up.normalize()
    } else {
        perpendicular(Vec3::x()).normalize()
    }
}

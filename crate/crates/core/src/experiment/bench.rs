//! Repetition protocol: every scenario is executed `repetitions` times with
//! and without planning, each repetition on its own RNG stream.

use std::fmt;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::experiment::Scenario;
use crate::geometry::{CubicBezier, Vec3};
use crate::perception::{approach_point, facing_orientation, observe_markers, select_target};
use crate::planner::{plan_path, PlanError, PlanResult};
use crate::sim::{execute_reactive_baseline, execute_trajectory, FailureReason, RunResult};

pub const AGGREGATE_NAME: &str = "AGGREGATE";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Condition {
    WithPlanning,
    WithoutPlanning,
}

impl Condition {
    pub const ALL: [Condition; 2] = [Condition::WithPlanning, Condition::WithoutPlanning];

    pub fn as_str(&self) -> &'static str {
        match self {
            Condition::WithPlanning => "WithPlanning",
            Condition::WithoutPlanning => "WithoutPlanning",
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Condition::WithPlanning => "With Planning",
            Condition::WithoutPlanning => "Without Planning",
        }
    }

    fn stream_id(&self) -> u64 {
        match self {
            Condition::WithPlanning => 1,
            Condition::WithoutPlanning => 2,
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Condition {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "WithPlanning" | "with" => Ok(Condition::WithPlanning),
            "WithoutPlanning" | "without" => Ok(Condition::WithoutPlanning),
            other => Err(format!("unknown condition `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub scenario_name: String,
    pub condition: Condition,
    /// Percent of successful repetitions.
    pub success_rate: f64,
    /// Mean over successful runs only; `None` when nothing succeeded.
    pub mean_moving_time: Option<f64>,
    pub n_success: usize,
    pub n_total: usize,
}

impl MetricsRow {
    pub fn from_runs(scenario_name: &str, condition: Condition, runs: &[RunResult]) -> Self {
        let times: Vec<f64> = runs
            .iter()
            .filter(|r| r.success)
            .map(|r| r.moving_time)
            .collect();
        Self::from_counts(
            scenario_name,
            condition,
            times.len(),
            runs.len(),
            mean(&times),
        )
    }

    fn from_counts(
        scenario_name: &str,
        condition: Condition,
        n_success: usize,
        n_total: usize,
        mean_moving_time: Option<f64>,
    ) -> Self {
        Self {
            scenario_name: scenario_name.to_string(),
            condition,
            success_rate: success_rate(n_success, n_total),
            mean_moving_time,
            n_success,
            n_total,
        }
    }
}

pub fn success_rate(n_success: usize, n_total: usize) -> f64 {
    if n_total == 0 {
        0.0
    } else {
        100.0 * n_success as f64 / n_total as f64
    }
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

/// Seeds for one repetition: (perception, execution).
pub fn repetition_seeds(scenario_seed: u64, condition: Condition, repetition: usize) -> (u64, u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(scenario_seed);
    rng.set_stream((condition.stream_id() << 32) | repetition as u64);
    (rng.next_u64(), rng.next_u64())
}

/// Where the perceived target puts the path end, and how the tool is held.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerceivedTarget {
    pub point: Vec3,
    pub tool: nalgebra::UnitQuaternion<f64>,
}

pub fn perceive(scenario: &Scenario, perception_seed: u64) -> Option<PerceivedTarget> {
    let observations =
        observe_markers(&scenario.markers_m(), &scenario.noise, perception_seed).ok()?;
    let pose = select_target(&observations, scenario.desired_marker_id).ok()?;
    Some(PerceivedTarget {
        point: approach_point(&pose, scenario.standoff),
        tool: facing_orientation(&pose),
    })
}

/// Plans from the scenario source to a perceived target.
pub fn plan_for(scenario: &Scenario, target: &PerceivedTarget) -> Result<PlanResult, PlanError> {
    plan_path(
        scenario.source_m(),
        target.point,
        &scenario.obstacles_m(),
        &scenario.planner,
    )
}

/// Runs one repetition. Planning and perception failures become failed runs.
pub fn run_repetition(scenario: &Scenario, condition: Condition, repetition: usize) -> RunResult {
    let (perception_seed, exec_seed) = repetition_seeds(scenario.seed, condition, repetition);
    run_with_seeds(scenario, condition, perception_seed, exec_seed)
}

pub fn run_with_seeds(
    scenario: &Scenario,
    condition: Condition,
    perception_seed: u64,
    exec_seed: u64,
) -> RunResult {
    let Some(target) = perceive(scenario, perception_seed) else {
        return RunResult::failed(FailureReason::PerceptionFailure, 0.0);
    };
    let obstacles = scenario.obstacles_m();
    let result = match condition {
        Condition::WithPlanning => {
            let curve: CubicBezier = match plan_for(scenario, &target) {
                Ok(plan) => plan.curve,
                Err(_) => return RunResult::failed(FailureReason::PlanningFailed, 0.0),
            };
            execute_trajectory(
                &curve,
                &target.tool,
                &scenario.arm,
                &obstacles,
                &scenario.execution,
                exec_seed,
            )
        }
        Condition::WithoutPlanning => execute_reactive_baseline(
            scenario.source_m(),
            target.point,
            &target.tool,
            &scenario.arm,
            &obstacles,
            &scenario.execution,
            exec_seed,
        ),
    };
    result.expect("scenario execution config is validated on load")
}

pub fn run_condition(scenario: &Scenario, condition: Condition) -> Vec<RunResult> {
    (0..scenario.repetitions)
        .into_par_iter()
        .map(|i| run_repetition(scenario, condition, i))
        .collect()
}

/// Full protocol. Rows come in scenario order, with planning first; when there
/// is more than one scenario an `AGGREGATE` row per condition pools all runs.
pub fn run_benchmark(scenarios: &[Scenario]) -> Vec<MetricsRow> {
    let mut rows = Vec::with_capacity(2 * scenarios.len() + 2);
    let mut pooled: Vec<(Condition, Vec<RunResult>)> =
        Condition::ALL.iter().map(|c| (*c, Vec::new())).collect();
    for scenario in scenarios {
        for (condition, pool) in pooled.iter_mut() {
            let runs = run_condition(scenario, *condition);
            rows.push(MetricsRow::from_runs(&scenario.name, *condition, &runs));
            pool.extend(runs);
        }
    }
    if scenarios.len() > 1 {
        for (condition, runs) in &pooled {
            rows.push(MetricsRow::from_runs(AGGREGATE_NAME, *condition, runs));
        }
    }
    rows
}

/// Replaces every scenario seed, e.g. from the `APPRUSS_SEED` variable.
pub fn override_seeds(scenarios: &mut [Scenario], seed: Option<u64>) {
    if let Some(seed) = seed {
        for s in scenarios {
            s.seed = seed;
        }
    }
}

pub const SEED_ENV: &str = "APPRUSS_SEED";

pub fn seed_from_env() -> Result<Option<u64>, String> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| format!("{SEED_ENV} must be an unsigned integer, got `{v}`")),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(format!("{SEED_ENV}: {e}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_arithmetic() {
        assert_eq!(success_rate(9, 10), 90.0);
        assert_eq!(success_rate(0, 0), 0.0);
        let runs = [
            RunResult::failed(FailureReason::Collision, 3.0),
            RunResult {
                success: true,
                moving_time: 2.0,
                failure_reason: FailureReason::None,
                retries: 0,
            },
            RunResult {
                success: true,
                moving_time: 4.0,
                failure_reason: FailureReason::None,
                retries: 1,
            },
        ];
        let row = MetricsRow::from_runs("x", Condition::WithPlanning, &runs);
        assert_eq!(row.n_success, 2);
        assert_eq!(row.n_total, 3);
        assert_eq!(row.mean_moving_time, Some(3.0));
        assert_eq!(row.success_rate, 100.0 * 2.0 / 3.0);
        let none = MetricsRow::from_runs("x", Condition::WithPlanning, &runs[..1]);
        assert_eq!(none.mean_moving_time, None);
    }

    #[test]
    fn seeds_differ_by_condition_and_repetition() {
        let a = repetition_seeds(7, Condition::WithPlanning, 0);
        assert_eq!(a, repetition_seeds(7, Condition::WithPlanning, 0));
        assert_ne!(a, repetition_seeds(7, Condition::WithoutPlanning, 0));
        assert_ne!(a, repetition_seeds(7, Condition::WithPlanning, 1));
        assert_ne!(a, repetition_seeds(8, Condition::WithPlanning, 0));
    }

    #[test]
    fn condition_parsing() {
        assert_eq!("with".parse::<Condition>(), Ok(Condition::WithPlanning));
        assert_eq!(
            "WithoutPlanning".parse::<Condition>(),
            Ok(Condition::WithoutPlanning)
        );
        assert!("sometimes".parse::<Condition>().is_err());
    }

    #[test]
    fn missing_marker_is_a_perception_failure() {
        let mut s = Scenario::from_json(r#"{"source": [1, 0, 0], "target": [0, 0, 1]}"#).unwrap();
        s.desired_marker_id = 99;
        let r = run_repetition(&s, Condition::WithPlanning, 0);
        assert_eq!(r.failure_reason, FailureReason::PerceptionFailure);
    }
}

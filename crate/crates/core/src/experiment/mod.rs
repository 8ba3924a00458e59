//! Scenario loading, the with/without-planning benchmark, and result output.

pub mod bench;
pub mod report;
pub mod scenario;

pub use bench::{run_benchmark, Condition, MetricsRow};
pub use report::{emit_results, parse_csv, OutputFormat};
pub use scenario::{default_arm, load_scenario, load_suite, Scenario, ScenarioError};

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand};

use appruss::experiment::bench::{self, perceive, plan_for, run_with_seeds, Condition};
use appruss::experiment::{emit_results, load_scenario, load_suite, OutputFormat, Scenario, ScenarioError};

#[derive(Parser)]
#[command(name = "appruss", version, about = "Bezier path planning benchmark for a simulated ultrasound arm")]
struct Cli {
    /// Override the number of repetitions of every scenario.
    #[arg(long, global = true)]
    reps: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan a path and write the sampled curve as x,y,z rows.
    Plan {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Execute a single run and print its result as JSON.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, value_parser = parse_condition)]
        condition: Condition,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the full with/without planning protocol over a suite.
    Bench {
        #[arg(long)]
        suite: PathBuf,
        #[arg(long, default_value = "table", value_parser = parse_format)]
        format: OutputFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_condition(s: &str) -> Result<Condition, String> {
    s.parse()
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    s.parse()
}

fn prepare(mut scenarios: Vec<Scenario>, reps: Option<usize>) -> Result<Vec<Scenario>> {
    let seed = bench::seed_from_env().map_err(|e| anyhow!(e))?;
    bench::override_seeds(&mut scenarios, seed);
    if let Some(reps) = reps {
        if reps == 0 {
            return Err(ScenarioError::Validation {
                field: "reps".into(),
                message: "must be >= 1".into(),
            }
            .into());
        }
        for s in &mut scenarios {
            s.repetitions = reps;
        }
    }
    Ok(scenarios)
}

fn write_output(text: &str, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Plan { scenario, out } => {
            let s = prepare(vec![load_scenario(&scenario)?], cli.reps)?.remove(0);
            let (perception_seed, _) = bench::repetition_seeds(s.seed, Condition::WithPlanning, 0);
            let target = perceive(&s, perception_seed)
                .ok_or_else(|| anyhow!("marker {} was not observed", s.desired_marker_id))?;
            let plan = plan_for(&s, &target)?;
            let mut text = String::from("x,y,z\n");
            for p in plan.curve.sample_uniform(s.execution.n_waypoints)? {
                text.push_str(&format!("{:?},{:?},{:?}\n", p.x, p.y, p.z));
            }
            write_output(&text, out.as_ref())
        }
        Command::Run {
            scenario,
            condition,
            seed,
        } => {
            let mut s = prepare(vec![load_scenario(&scenario)?], cli.reps)?.remove(0);
            if let Some(seed) = seed {
                s.seed = seed;
            }
            let (perception_seed, exec_seed) = bench::repetition_seeds(s.seed, condition, 0);
            let result = run_with_seeds(&s, condition, perception_seed, exec_seed);
            let text = serde_json::to_string_pretty(&result)? + "\n";
            write_output(&text, None)
        }
        Command::Bench { suite, format, out } => {
            let scenarios = prepare(load_suite(&suite)?, cli.reps)?;
            let rows = bench::run_benchmark(&scenarios);
            write_output(&emit_results(&rows, format), out.as_ref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ScenarioError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

//! CSV and plain-text rendering of benchmark rows.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::experiment::bench::{success_rate, Condition, MetricsRow};

pub const CSV_HEADER: [&str; 6] = [
    "scenario",
    "condition",
    "success_rate_pct",
    "mean_moving_time_s",
    "n_success",
    "n_total",
];

const FOOTNOTE: &str = "Mean moving time averages successful runs only; '-' marks no successes.";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Table,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "table" => Ok(OutputFormat::Table),
            other => Err(format!("unknown format `{other}` (expected csv or table)")),
        }
    }
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
}

pub fn emit_results(rows: &[MetricsRow], format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => to_csv(rows),
        OutputFormat::Table => to_table(rows),
    }
}

/// Floats use Rust's shortest round-trip formatting, so parsing the CSV
/// back reproduces the rows exactly.
pub fn to_csv(rows: &[MetricsRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("writing to memory");
    for r in rows {
        let mean = r.mean_moving_time.map(|t| format!("{t:?}")).unwrap_or_default();
        w.write_record([
            r.scenario_name.as_str(),
            r.condition.as_str(),
            &format!("{:?}", r.success_rate),
            &mean,
            &r.n_success.to_string(),
            &r.n_total.to_string(),
        ])
        .expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

pub fn parse_csv(text: &str) -> Result<Vec<MetricsRow>, ReportError> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers()?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(ReportError::Malformed {
            line: 1,
            message: format!("unexpected header {header:?}"),
        });
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let line = i + 2;
        let bad = |message: String| ReportError::Malformed { line, message };
        let field = |k: usize| record.get(k).unwrap_or("");
        let condition: Condition = field(1).parse().map_err(bad)?;
        let success_rate: f64 = field(2)
            .parse()
            .map_err(|_| bad(format!("bad success rate `{}`", field(2))))?;
        let mean_moving_time = match field(3) {
            "" => None,
            t => Some(t.parse().map_err(|_| bad(format!("bad mean time `{t}`")))?),
        };
        let n_success: usize = field(4)
            .parse()
            .map_err(|_| bad(format!("bad n_success `{}`", field(4))))?;
        let n_total: usize = field(5)
            .parse()
            .map_err(|_| bad(format!("bad n_total `{}`", field(5))))?;
        if n_success > n_total {
            return Err(bad("n_success exceeds n_total".into()));
        }
        rows.push(MetricsRow {
            scenario_name: field(0).to_string(),
            condition,
            success_rate,
            mean_moving_time,
            n_success,
            n_total,
        });
    }
    Ok(rows)
}

fn cell(row: Option<&MetricsRow>) -> String {
    let Some(r) = row else {
        return "n/a".to_string();
    };
    let rate = success_rate(r.n_success, r.n_total);
    let rate = if rate.fract() == 0.0 {
        format!("{rate:.0}%")
    } else {
        format!("{rate:.1}%")
    };
    match r.mean_moving_time {
        Some(t) => format!("{rate}/{t:.1}s"),
        None => format!("{rate}/-"),
    }
}

/// One line per scenario with both conditions side by side.
pub fn to_table(rows: &[MetricsRow]) -> String {
    let mut order: Vec<&str> = Vec::new();
    let mut by_name: BTreeMap<&str, [Option<&MetricsRow>; 2]> = BTreeMap::new();
    for r in rows {
        let slot = by_name.entry(&r.scenario_name).or_insert_with(|| {
            order.push(&r.scenario_name);
            [None, None]
        });
        let k = match r.condition {
            Condition::WithPlanning => 0,
            Condition::WithoutPlanning => 1,
        };
        slot[k] = Some(r);
    }
    let lines: Vec<[String; 3]> = order
        .iter()
        .map(|name| {
            let [with, without] = by_name[name];
            [name.to_string(), cell(with), cell(without)]
        })
        .collect();
    let header = [
        "Scenario".to_string(),
        Condition::WithPlanning.label().to_string(),
        Condition::WithoutPlanning.label().to_string(),
    ];
    let mut widths = header.clone().map(|h| h.len());
    for l in &lines {
        for (w, c) in widths.iter_mut().zip(l) {
            *w = (*w).max(c.len());
        }
    }
    let mut out = String::new();
    for l in std::iter::once(&header).chain(&lines) {
        let _ = writeln!(
            out,
            "{:<w0$}  {:<w1$}  {}",
            l[0],
            l[1],
            l[2],
            w0 = widths[0],
            w1 = widths[1]
        );
    }
    let _ = writeln!(out, "\n{FOOTNOTE}");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(name: &str, condition: Condition, n_success: usize, mean: Option<f64>) -> MetricsRow {
        MetricsRow {
            scenario_name: name.into(),
            condition,
            success_rate: success_rate(n_success, 10),
            mean_moving_time: mean,
            n_success,
            n_total: 10,
        }
    }

    #[test]
    fn empty_csv_is_header_only() {
        assert_eq!(
            to_csv(&[]),
            "scenario,condition,success_rate_pct,mean_moving_time_s,n_success,n_total\n"
        );
    }

    #[test]
    fn nine_of_ten() {
        let csv = to_csv(&[row("obstacle_1", Condition::WithPlanning, 9, Some(31.25))]);
        let line = csv.lines().nth(1).unwrap();
        assert_eq!(line, "obstacle_1,WithPlanning,90.0,31.25,9,10");
    }

    #[test]
    fn csv_round_trip() {
        let rows = vec![
            row("no obstacles", Condition::WithPlanning, 10, Some(29.2)),
            row("no obstacles", Condition::WithoutPlanning, 0, None),
            MetricsRow {
                scenario_name: "odd, name".into(),
                condition: Condition::WithoutPlanning,
                success_rate: success_rate(1, 3),
                mean_moving_time: Some(1.0 / 3.0),
                n_success: 1,
                n_total: 3,
            },
        ];
        assert_eq!(parse_csv(&to_csv(&rows)).unwrap(), rows);
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(parse_csv("a,b\n1,2\n").is_err());
        let text = "scenario,condition,success_rate_pct,mean_moving_time_s,n_success,n_total\nx,Maybe,1,,1,1\n";
        assert!(parse_csv(text).is_err());
    }

    #[test]
    fn table_layout() {
        let rows = vec![
            row("No Obstacles", Condition::WithPlanning, 10, Some(29.2)),
            row("No Obstacles", Condition::WithoutPlanning, 9, Some(58.14)),
            row("Obstacle #1", Condition::WithPlanning, 10, Some(30.06)),
            row("Obstacle #1", Condition::WithoutPlanning, 0, None),
        ];
        let table = to_table(&rows);
        let lines: Vec<&str> = table.lines().collect();
        assert!(lines[0].starts_with("Scenario"));
        assert!(lines[0].contains("With Planning") && lines[0].contains("Without Planning"));
        assert!(lines[1].contains("100%/29.2s") && lines[1].contains("90%/58.1s"));
        assert!(lines[2].contains("100%/30.1s") && lines[2].contains("0%/-"));
        assert!(table.contains("successful runs only"));
        // columns align
        assert_eq!(lines[1].find("100%"), lines[2].find("100%"));
    }
}

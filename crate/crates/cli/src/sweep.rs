//! Cartesian parameter sweeps over any other command.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::commands::{self, CommandOutput};
use crate::config::{eval_expression, parse_table, set_path, CommandName, LoadedConfig};
use crate::error::CliError;
use crate::output::{format_float, Cell, Ext, Infinite, Table, TaskStatus};

/// A JSON scalar that survives a round trip with its type intact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Int(i64),
    Float(f64),
    Marker(Infinite),
    Bool(bool),
    Text(String),
}

impl From<&Cell> for Scalar {
    fn from(c: &Cell) -> Self {
        match c {
            Cell::Int(i) => Scalar::Int(*i),
            Cell::Float(x) | Cell::Ext(Ext::Finite(x)) => Scalar::Float(*x),
            Cell::Ext(Ext::Marker(m)) => Scalar::Marker(*m),
            Cell::Text(s) if s == "true" => Scalar::Bool(true),
            Cell::Text(s) if s == "false" => Scalar::Bool(false),
            Cell::Text(s) => Scalar::Text(s.clone()),
            Cell::Empty => Scalar::Text(String::new()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisValue {
    pub path: String,
    pub value: Scalar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub name: String,
    pub value: Scalar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub point: usize,
    pub axes: Vec<AxisValue>,
    pub status: String,
    pub metrics: Vec<Metric>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub command: CommandName,
    pub points: Vec<SweepPoint>,
    pub failed: usize,
}

pub struct SweepOutcome {
    pub report: SweepReport,
    pub table: Table,
    pub tasks: Vec<TaskStatus>,
    pub warnings: Vec<String>,
}

/// Resolved value of a sweep entry: numbers and expressions become `f64`.
fn axis_scalar(v: &toml::Value) -> Scalar {
    match v {
        toml::Value::Integer(i) => Scalar::Float(*i as f64),
        toml::Value::Float(x) => Scalar::Float(*x),
        toml::Value::Boolean(b) => Scalar::Bool(*b),
        toml::Value::String(s) => match eval_expression(s) {
            Ok(x) => Scalar::Float(x),
            Err(_) => Scalar::Text(s.clone()),
        },
        other => Scalar::Text(other.to_string()),
    }
}

fn scalar_cell(s: &Scalar) -> Cell {
    match s {
        Scalar::Int(i) => Cell::Int(*i),
        Scalar::Float(x) => Cell::Float(*x),
        Scalar::Marker(m) => Cell::Ext(Ext::Marker(*m)),
        Scalar::Bool(b) => Cell::from(*b),
        Scalar::Text(t) => Cell::Text(t.clone()),
    }
}

/// Every combination of axis values, first axis slowest.
fn grid(axes: &[Vec<toml::Value>]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for axis in axes {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..axis.len()).map(move |i| {
                    let mut p = prefix.clone();
                    p.push(i);
                    p
                })
            })
            .collect();
    }
    out
}

fn run_point(loaded: &LoadedConfig, command: CommandName, paths: &[String], values: &[toml::Value], strict: bool) -> Result<CommandOutput, CliError> {
    let mut raw = loaded.raw.clone();
    raw.remove("sweep");
    for (p, v) in paths.iter().zip(values) {
        set_path(&mut raw, p, v.clone())?;
    }
    let cfg = parse_table(&raw)?;
    let out = commands::run(command, &cfg)?;
    if strict && !out.gate_failures.is_empty() {
        return Err(CliError::Validation(out.gate_failures.join("; ")));
    }
    Ok(out)
}

pub fn run(loaded: &LoadedConfig, threads: usize, strict: bool) -> Result<SweepOutcome, CliError> {
    let sweep = loaded.config.sweep.as_ref().ok_or_else(|| CliError::Config("sweep needs a [sweep] block".into()))?;
    let paths: Vec<String> = sweep.axis.iter().map(|a| a.path.clone()).collect();
    let axes: Vec<Vec<toml::Value>> = sweep.axis.iter().map(|a| a.values.clone()).collect();
    let size = axes.iter().try_fold(1usize, |acc, a| acc.checked_mul(a.len())).unwrap_or(usize::MAX);
    if size > sweep.max_points {
        return Err(CliError::Config(format!("[sweep]: {size} points exceed max_points = {}", sweep.max_points)));
    }
    let points = grid(&axes);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))?;
    // `collect` on an indexed parallel iterator keeps input order.
    let results: Vec<Result<CommandOutput, CliError>> = pool.install(|| {
        points
            .par_iter()
            .map(|idx| {
                let values: Vec<toml::Value> = idx.iter().zip(&axes).map(|(&i, a)| a[i].clone()).collect();
                run_point(loaded, sweep.command, &paths, &values, strict)
            })
            .collect()
    });

    let mut columns: Vec<&str> = vec!["point"];
    columns.extend(paths.iter().map(String::as_str));
    columns.extend(["status", "row", "metric", "value"]);
    let mut table = Table::new(&columns);
    let mut report = SweepReport { command: sweep.command, points: Vec::with_capacity(points.len()), failed: 0 };
    let mut tasks = Vec::with_capacity(points.len());
    let mut warnings = Vec::new();
    for (k, (idx, res)) in points.iter().zip(results).enumerate() {
        let axis_values: Vec<AxisValue> = idx
            .iter()
            .zip(&axes)
            .zip(&paths)
            .map(|((&i, a), p)| AxisValue { path: p.clone(), value: axis_scalar(&a[i]) })
            .collect();
        let prefix: Vec<Cell> = std::iter::once(Cell::from(k)).chain(axis_values.iter().map(|a| scalar_cell(&a.value))).collect();
        let row = |status: &str, r: Cell, metric: Cell, value: Cell| -> Vec<Cell> {
            let mut v = prefix.clone();
            v.extend([Cell::from(status), r, metric, value]);
            v
        };
        match res {
            Ok(out) => {
                for w in out.gate_failures.iter().chain(&out.warnings) {
                    warnings.push(format!("point {k}: {w}"));
                }
                let mut metrics = Vec::new();
                for (name, cell) in &out.headline {
                    table.push(row("ok", Cell::Empty, name.as_str().into(), cell.clone()));
                    metrics.push(Metric { name: name.clone(), value: cell.into() });
                }
                for (i, r) in out.table.rows.iter().enumerate() {
                    for (col, cell) in out.table.columns.iter().zip(r) {
                        table.push(row("ok", Cell::from(i), col.as_str().into(), cell.clone()));
                    }
                }
                tasks.push(TaskStatus { task: format!("point {k}"), status: "ok".into() });
                report.points.push(SweepPoint { point: k, axes: axis_values, status: "ok".into(), metrics });
            }
            Err(e) => {
                let status = format!("failed: {e}");
                table.push(row(&status, Cell::Empty, Cell::Empty, Cell::Empty));
                tasks.push(TaskStatus { task: format!("point {k}"), status: status.clone() });
                report.failed += 1;
                report.points.push(SweepPoint { point: k, axes: axis_values, status, metrics: Vec::new() });
            }
        }
    }
    Ok(SweepOutcome { report, table, tasks, warnings })
}

/// Human summary: one line per point.
pub fn summary(report: &SweepReport) -> String {
    let mut out = String::new();
    for p in &report.points {
        let axes: Vec<String> = p
            .axes
            .iter()
            .map(|a| {
                let v = match &a.value {
                    Scalar::Float(x) => format_float(*x),
                    other => format!("{other:?}"),
                };
                format!("{}={v}", a.path)
            })
            .collect();
        out += &format!("{:>5}  {}  {}\n", p.point, axes.join(" "), p.status);
    }
    out += &format!("{} point(s), {} failed\n", report.points.len(), report.failed);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_order_first_axis_slowest() {
        let axes = vec![vec![toml::Value::Integer(0); 2], vec![toml::Value::Integer(0); 3]];
        let g = grid(&axes);
        assert_eq!(g.len(), 6);
        assert_eq!(g[0], vec![0, 0]);
        assert_eq!(g[1], vec![0, 1]);
        assert_eq!(g[3], vec![1, 0]);
    }

    #[test]
    fn scalar_json_round_trip() {
        let v = vec![Scalar::Int(2), Scalar::Float(2.0), Scalar::Marker(Infinite::Infinite), Scalar::Bool(true), Scalar::Text("x".into())];
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(serde_json::from_str::<Vec<Scalar>>(&s).unwrap(), v);
    }
}

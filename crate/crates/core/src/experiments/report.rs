use std::fmt::{self, Write as _};

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};

use super::config::Mode;

/// One CSV cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(v) => Some(*v as f64),
            Cell::Float(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Cell::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Cell::Text(s) => Some(s),
            _ => None,
        }
    }

    /// Inverse of `Display`: integers, floats and booleans are recognised, anything else is text.
    pub fn parse(s: &str) -> Cell {
        if let Ok(v) = s.parse::<i64>() {
            return Cell::Int(v);
        }
        if s.contains(['e', '.']) || s == "inf" || s == "NaN" {
            if let Ok(v) = s.parse::<f64>() {
                return Cell::Float(v);
            }
        }
        match s {
            "true" => Cell::Bool(true),
            "false" => Cell::Bool(false),
            _ => Cell::Text(s.to_string()),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Float(v) => json!(v),
            Cell::Bool(b) => json!(b),
            Cell::Text(s) => json!(s),
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Float(v) => write!(f, "{v:.16e}"),
            Cell::Bool(b) => write!(f, "{b}"),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentReport {
    pub mode: Mode,
    /// Echoed configuration, in key order.
    pub metadata: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub summary: Vec<(String, Cell)>,
}

const MAGIC: &str = "# bfl report v1";

impl ExperimentReport {
    pub fn new(mode: Mode, metadata: Vec<(String, String)>, columns: &[&str], rows: Vec<Vec<Cell>>) -> Result<Self> {
        let columns: Vec<String> = columns.iter().map(|c| c.to_string()).collect();
        if let Some(bad) = rows.iter().position(|r| r.len() != columns.len()) {
            return Err(Error::Report(format!("row {bad} has {} cells, expected {}", rows[bad].len(), columns.len())));
        }
        let mut report = ExperimentReport {
            mode,
            metadata,
            columns,
            rows,
            summary: Vec::new(),
        };
        report.summary = summarize(&report)?;
        Ok(report)
    }

    pub fn column(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::Report(format!("missing column `{name}`")))
    }

    /// Values of a numeric column, row by row.
    pub fn floats(&self, name: &str) -> Result<Vec<f64>> {
        let k = self.column(name)?;
        self.rows
            .iter()
            .map(|r| r[k].as_f64().ok_or_else(|| Error::Report(format!("non-numeric `{name}` cell `{}`", r[k]))))
            .collect()
    }

    pub fn summary_value(&self, key: &str) -> Option<&Cell> {
        self.summary.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{MAGIC}");
        let _ = writeln!(s, "# mode,{}", self.mode);
        for (k, v) in &self.metadata {
            let _ = writeln!(s, "# config,{k},{v}");
        }
        let _ = writeln!(s, "{}", self.columns.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::to_string).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        for (k, v) in &self.summary {
            let _ = writeln!(s, "# summary,{k},{v}");
        }
        s
    }

    pub fn to_json(&self) -> String {
        let metadata: Map<String, Value> = self.metadata.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Array(r.iter().map(Cell::to_json).collect()))
            .collect();
        let summary: Map<String, Value> = self.summary.iter().map(|(k, v)| (k.clone(), v.to_json())).collect();
        let doc = json!({
            "mode": self.mode.as_str(),
            "config": metadata,
            "columns": self.columns,
            "rows": rows,
            "summary": summary,
        });
        let mut out = serde_json::to_string_pretty(&doc).expect("report serializes");
        out.push('\n');
        out
    }

    /// Parses CSV text written by `to_csv`, keeping the embedded summary as written.
    pub fn parse_csv(text: &str) -> Result<Self> {
        let bad = |msg: &str| Error::Report(msg.to_string());
        let mut lines = text.lines();
        if lines.next() != Some(MAGIC) {
            return Err(bad("not a bfl report"));
        }
        let mode = lines
            .next()
            .and_then(|l| l.strip_prefix("# mode,"))
            .ok_or_else(|| bad("missing mode line"))?
            .parse::<Mode>()
            .map_err(|e| Error::Report(e.to_string()))?;
        let mut metadata = Vec::new();
        let mut columns = None;
        let mut rows = Vec::new();
        let mut summary = Vec::new();
        for line in lines {
            if let Some(rest) = line.strip_prefix("# config,") {
                let (k, v) = rest.split_once(',').ok_or_else(|| bad("malformed config line"))?;
                metadata.push((k.to_string(), v.to_string()));
            } else if let Some(rest) = line.strip_prefix("# summary,") {
                let (k, v) = rest.split_once(',').ok_or_else(|| bad("malformed summary line"))?;
                summary.push((k.to_string(), Cell::parse(v)));
            } else if columns.is_none() {
                columns = Some(line.split(',').map(str::to_string).collect::<Vec<_>>());
            } else {
                rows.push(line.split(',').map(Cell::parse).collect::<Vec<_>>());
            }
        }
        let columns = columns.ok_or_else(|| bad("missing header"))?;
        if rows.iter().any(|r| r.len() != columns.len()) {
            return Err(bad("row width does not match header"));
        }
        Ok(ExperimentReport {
            mode,
            metadata,
            columns,
            rows,
            summary,
        })
    }

    /// Recomputes the summary from the rows and compares it with the embedded one.
    pub fn verify_summary(&self) -> Result<()> {
        let fresh = summarize(self)?;
        let render = |s: &[(String, Cell)]| s.iter().map(|(k, v)| format!("{k},{v}")).collect::<Vec<_>>();
        let (a, b) = (render(&self.summary), render(&fresh));
        if a == b {
            return Ok(());
        }
        for (x, y) in a.iter().zip(&b) {
            if x != y {
                return Err(Error::Report(format!("summary mismatch: embedded `{x}`, recomputed `{y}`")));
            }
        }
        Err(Error::Report(format!("summary has {} entries, recomputed {}", a.len(), b.len())))
    }
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

/// |b/a − 1|, or 0 when both are 0.
pub fn relative_change(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (b / a - 1.0).abs()
    }
}

/// Distinct values of a numeric column in order of first appearance.
fn levels(report: &ExperimentReport, column: &str) -> Result<Vec<f64>> {
    let mut out: Vec<f64> = Vec::new();
    for v in report.floats(column)? {
        if !out.contains(&v) {
            out.push(v);
        }
    }
    Ok(out)
}

/// Max of `value` over rows, grouped by `cells`, restricted to rows where `keep` holds.
fn max_by_cells<F>(report: &ExperimentReport, value: &str, keep: F) -> Result<Vec<(f64, f64)>>
where
    F: Fn(&[Cell]) -> bool,
{
    let cells = report.floats("cells")?;
    let vals = report.floats(value)?;
    Ok(levels(report, "cells")?
        .into_iter()
        .map(|c| {
            let m = max_of((0..vals.len()).filter(|&k| cells[k] == c && keep(&report.rows[k])).map(|k| vals[k]));
            (c, m)
        })
        .collect())
}

fn push_refinement(summary: &mut Vec<(String, Cell)>, name: &str, per_level: &[(f64, f64)]) {
    for &(c, m) in per_level {
        summary.push((format!("{name}@{c}"), Cell::Float(m)));
    }
    let change = match per_level {
        [.., (_, a), (_, b)] => relative_change(*a, *b),
        _ => 0.0,
    };
    summary.push((format!("{name}_refinement_change"), Cell::Float(change)));
    summary.push((format!("{name}_refinement_factor"), Cell::Float(match per_level {
        [.., (_, a), (_, b)] if *a > 0.0 => b / a,
        _ => 1.0,
    })));
}

fn bool_column(report: &ExperimentReport, name: &str) -> Result<Vec<bool>> {
    let k = report.column(name)?;
    report
        .rows
        .iter()
        .map(|r| r[k].as_bool().ok_or_else(|| Error::Report(format!("non-boolean `{name}` cell"))))
        .collect()
}

/// Summary entries derived from the rows alone.
pub fn summarize(report: &ExperimentReport) -> Result<Vec<(String, Cell)>> {
    let mut s: Vec<(String, Cell)> = Vec::new();
    let rows = report.rows.len();
    match report.mode {
        Mode::TheoremOne | Mode::TheoremA => {
            let accepted = bool_column(report, "accepted")?;
            let ka = report.column("accepted")?;
            let ratios = report.floats("ratio")?;
            s.push(("rows".into(), rows.into()));
            s.push(("rejected".into(), accepted.iter().filter(|a| !**a).count().into()));
            s.push((
                "max_ratio".into(),
                max_of((0..rows).filter(|&k| accepted[k]).map(|k| ratios[k])).into(),
            ));
            let per = max_by_cells(report, "ratio", |r| r[ka] == Cell::Bool(true))?;
            push_refinement(&mut s, "max_ratio", &per);
        }
        Mode::GfBound => {
            let c = report.floats("ratio")?;
            s.push(("rows".into(), rows.into()));
            s.push(("max_c".into(), max_of(c).into()));
            s.push(("max_fubini_residual".into(), max_of(report.floats("fubini_residual")?).into()));
            let per = max_by_cells(report, "ratio", |_| true)?;
            push_refinement(&mut s, "max_c", &per);
        }
        Mode::Counterexample => {
            let a = report.floats("a_pq")?;
            let r = report.floats("proxy")?;
            let ctl = report.floats("proxy_control")?;
            let last_change = |v: &[f64]| match v {
                [.., x, y] => relative_change(*x, *y),
                _ => 0.0,
            };
            let spread = |v: &[f64]| {
                let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = max_of(v.iter().copied());
                if v.is_empty() || lo == hi {
                    0.0
                } else {
                    hi / lo - 1.0
                }
            };
            s.push(("rows".into(), rows.into()));
            s.push(("a_pq_last_change".into(), last_change(&a).into()));
            s.push(("proxy_strictly_increasing".into(), r.windows(2).all(|w| w[1] > w[0]).into()));
            s.push(("proxy_growth".into(), (if r.first().is_some_and(|&x| x > 0.0) { r[r.len() - 1] / r[0] } else { 0.0 }).into()));
            s.push(("proxy_control_spread".into(), spread(&ctl).into()));
        }
        Mode::HedbergSweep => {
            let kc = report.column("case")?;
            let kd = report.column("degenerate")?;
            let degenerate = bool_column(report, "degenerate")?;
            let constants = report.floats("measured_constant")?;
            let case = |k: usize| report.rows[k][kc].as_str().unwrap_or("").to_string();
            let count = |name: &str| (0..rows).filter(|&k| !degenerate[k] && case(k) == name).count();
            s.push(("rows".into(), rows.into()));
            s.push(("degenerate_rows".into(), degenerate.iter().filter(|d| **d).count().into()));
            s.push(("case_one_count".into(), count("one").into()));
            s.push(("case_two_count".into(), count("two").into()));
            s.push((
                "max_partition_residual".into(),
                max_of(report.floats("partition_residual")?).into(),
            ));
            for name in ["one", "two"] {
                s.push((
                    format!("max_constant_{name}"),
                    max_of((0..rows).filter(|&k| !degenerate[k] && case(k) == name).map(|k| constants[k])).into(),
                ));
            }
            for name in ["one", "two"] {
                let per = max_by_cells(report, "measured_constant", |r| {
                    r[kc].as_str() == Some(name) && r[kd] == Cell::Bool(false)
                })?;
                push_refinement(&mut s, &format!("max_constant_{name}"), &per);
            }
        }
    }
    Ok(s)
}

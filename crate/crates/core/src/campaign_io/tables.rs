use std::io::{BufRead, Write};

use super::{assignment, fmt_f64, parse_f64, Lines, ParseError};
use crate::error::{Error, Result};
use crate::geometry::Scenario;
use crate::pl_models::{ModelFamily, ModelParams, VariableMask};

const SLOT_NAMES: [&str; 5] = ["alpha", "beta1", "beta2", "lambda1", "lambda2"];

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    /// Single token, e.g. `fi-free-space`.
    pub label: String,
    pub values: Vec<f64>,
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultsTable {
    pub title: String,
    pub scenario: Option<Scenario>,
    /// Subset of `alpha beta1 beta2 lambda1 lambda2`; FI and CI rows share
    /// columns (α doubles as the CI reference, β as n, λ as μ).
    pub columns: Vec<String>,
    pub rows: Vec<TableRow>,
    pub provenance: String,
}

impl ResultsTable {
    pub fn validate(&self) -> Result<()> {
        for c in &self.columns {
            if !SLOT_NAMES.contains(&c.as_str()) {
                return Err(Error::InvalidInput(format!("unknown table column `{c}`")));
            }
        }
        for r in &self.rows {
            if r.values.len() != self.columns.len() {
                return Err(Error::Invariant {
                    name: "fixed column count",
                    detail: format!("row `{}` has {} values for {} columns", r.label, r.values.len(), self.columns.len()),
                });
            }
            if r.label.is_empty() || r.label.chars().any(char::is_whitespace) {
                return Err(Error::InvalidInput(format!("row label `{}` must be a single token", r.label)));
            }
        }
        Ok(())
    }

    pub fn row(&self, label: &str) -> Option<&TableRow> {
        self.rows.iter().find(|r| r.label == label)
    }

    pub fn mask(&self) -> VariableMask {
        let has = |n: &str| self.columns.iter().any(|c| c == n);
        VariableMask { d1: has("beta1"), d2: has("beta2"), theta_t: has("lambda1"), theta_r: has("lambda2") }
    }

    /// Expands a row into a full five-slot vector; absent columns are zero.
    pub fn expand(&self, row: &TableRow) -> [f64; 5] {
        let mut v = [0.0; 5];
        for (c, x) in self.columns.iter().zip(&row.values) {
            if let Some(i) = SLOT_NAMES.iter().position(|n| n == c) {
                v[i] = *x;
            }
        }
        v
    }

    /// Model parameters of a row, if the label names a family (`fi-...`/`ci-...`).
    pub fn params(&self, label: &str) -> Option<ModelParams> {
        let row = self.row(label)?;
        let family = if label.starts_with("fi") {
            ModelFamily::FiRis
        } else if label.starts_with("ci") {
            ModelFamily::CiRis
        } else {
            return None;
        };
        Some(ModelParams::new(family, 0.0, (0.0, 0.0), (0.0, 0.0)).with_mask(self.mask()).with_vector(self.expand(row)))
    }
}

pub fn save_table<W: Write>(mut w: W, table: &ResultsTable) -> Result<()> {
    table.validate()?;
    for s in [&table.title, &table.provenance] {
        if s.contains('\n') {
            return Err(Error::InvalidInput("table title and provenance must be single lines".into()));
        }
    }
    writeln!(w, "rischan-table {}", super::FORMAT_VERSION)?;
    writeln!(w, "title = {}", table.title)?;
    writeln!(w, "scenario = {}", table.scenario.map(|s| s.as_str()).unwrap_or("none"))?;
    writeln!(w, "provenance = {}", table.provenance)?;
    writeln!(w, "columns = {}", table.columns.join(" "))?;
    for r in &table.rows {
        let vals: Vec<String> = r.values.iter().map(|x| fmt_f64(*x)).collect();
        let sigma = r.sigma.map(fmt_f64).unwrap_or_else(|| "-".into());
        writeln!(w, "row {} {} {}", r.label, vals.join(" "), sigma)?;
    }
    writeln!(w, "end")?;
    w.flush()?;
    Ok(())
}

pub fn load_table<R: BufRead>(reader: R) -> Result<ResultsTable> {
    let mut lines = Lines::new(reader);
    lines.header("table")?;
    let mut header = |key: &str| -> std::result::Result<(String, usize), ParseError> {
        let l = lines.expect_line(key)?.to_string();
        let (k, v) = assignment(&l, lines.line())?;
        if k != key {
            return Err(lines.err(format!("expected `{key} = ...`, found `{l}`")));
        }
        Ok((v.to_string(), lines.line()))
    };
    let (title, _) = header("title")?;
    let (scenario, sl) = header("scenario")?;
    let (provenance, _) = header("provenance")?;
    let (columns, _) = header("columns")?;
    let scenario = match scenario.as_str() {
        "none" => None,
        s => Some(s.parse::<Scenario>().map_err(|e| ParseError::new(sl, e.to_string()))?),
    };
    let columns: Vec<String> = columns.split_whitespace().map(String::from).collect();
    let mut table = ResultsTable { title, scenario, columns, rows: Vec::new(), provenance };
    loop {
        let l = lines.expect_line("row or end")?.to_string();
        let ln = lines.line();
        if l == "end" {
            break;
        }
        let idx = table.rows.len();
        let t: Vec<&str> = l.split_whitespace().collect();
        if t.first() != Some(&"row") || t.len() != table.columns.len() + 3 {
            return Err(ParseError::new(
                ln,
                format!("expected `row <label> <{} values> <sigma|->`, found `{l}`", table.columns.len()),
            )
            .in_record(idx)
            .into());
        }
        let values = t[2..t.len() - 1]
            .iter()
            .map(|x| parse_f64(x, ln, "value"))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| e.in_record(idx))?;
        let sigma = match t[t.len() - 1] {
            "-" => None,
            s => Some(parse_f64(s, ln, "sigma").map_err(|e| e.in_record(idx))?),
        };
        table.rows.push(TableRow { label: t[1].to_string(), values, sigma });
    }
    if let Err(e) = table.validate() {
        return Err(ParseError::new(lines.line(), e.to_string()).into());
    }
    Ok(table)
}

fn reference_table(scenario: Scenario, title: &str, columns: &[&str], rows: [(&str, &[f64]); 4]) -> ResultsTable {
    ResultsTable {
        title: title.to_string(),
        scenario: Some(scenario),
        columns: columns.iter().map(|c| c.to_string()).collect(),
        rows: rows
            .iter()
            .map(|(label, v)| TableRow { label: label.to_string(), values: v.to_vec(), sigma: None })
            .collect(),
        provenance: "published fitting results (measurement and free-space rows)".into(),
    }
}

/// Published FI/CI rows for the three scenarios, for diffing.
pub fn embed_reference_tables() -> Vec<ResultsTable> {
    vec![
        reference_table(
            Scenario::Outdoor,
            "Fitting results for outdoor measurement",
            &SLOT_NAMES,
            [
                ("fi-measurement", &[20.08, 2.29, 1.88, 1.21, 0.65]),
                ("fi-free-space", &[24.52, 2.05, 1.95, 1.15, 0.79]),
                ("ci-measurement", &[21.38, 2.22, 1.82, 1.21, 0.64]),
                ("ci-free-space", &[21.38, 2.21, 2.08, 1.14, 0.81]),
            ],
        ),
        reference_table(
            Scenario::Indoor,
            "Fitting results for indoor measurement",
            &["alpha", "beta1", "beta2"],
            [
                ("fi-measurement", &[28.16, 1.9, 1.68]),
                ("fi-free-space", &[28.7, 1.96, 1.96]),
                ("ci-measurement", &[26.97, 1.95, 1.74]),
                ("ci-free-space", &[26.97, 2.04, 2.04]),
            ],
        ),
        reference_table(
            Scenario::O2i,
            "Fitting results for O2I measurement",
            &["alpha", "beta2"],
            [
                ("fi-measurement", &[46.11, 1.51]),
                ("fi-free-space", &[47.64, 1.8]),
                ("ci-measurement", &[46.06, 1.52]),
                ("ci-free-space", &[46.06, 2.0]),
            ],
        ),
    ]
}

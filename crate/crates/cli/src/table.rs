//! Result tables with byte-stable CSV and JSON writers.
//!
//! Floats are written with 17 significant digits so that downstream diffs
//! remain meaningful at 1e-12 tolerances.

use std::io::Write;

use crate::spec::ExperimentSpec;
use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Empty,
}

impl Cell {
    pub fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_float(*v),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Int(v) => serde_json::json!(v),
            Cell::Float(v) if v.is_infinite() => serde_json::json!("inf"),
            Cell::Float(v) if v.is_nan() => serde_json::json!("nan"),
            Cell::Float(v) => serde_json::json!(v),
            Cell::Text(s) => serde_json::json!(s),
            Cell::Empty => serde_json::Value::Null,
        }
    }
}

pub fn format_float(v: f64) -> String {
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v.is_nan() {
        return "nan".into();
    }
    format!("{v:.16e}")
}

#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// One-line result digest for stderr (max residuals and the like).
    pub note: String,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: vec![],
            note: String::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn summary(&self) -> String {
        if self.note.is_empty() {
            format!("{} rows", self.rows.len())
        } else {
            format!("{} rows; {}", self.rows.len(), self.note)
        }
    }

    pub fn write_csv(
        &self,
        out: &mut dyn Write,
        version: &str,
        spec_echo: &str,
    ) -> Result<(), CliError> {
        writeln!(out, "# uptorus {version}")?;
        writeln!(out, "# spec {spec_echo}")?;
        writeln!(out, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        Ok(())
    }

    pub fn write_json(
        &self,
        out: &mut dyn Write,
        version: &str,
        spec: &ExperimentSpec,
    ) -> Result<(), CliError> {
        let rows: Vec<Vec<serde_json::Value>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(Cell::json).collect())
            .collect();
        let doc = serde_json::json!({
            "version": version,
            "spec": spec,
            "columns": self.columns,
            "rows": rows,
        });
        writeln!(out, "{}", serde_json::to_string(&doc).expect("json"))?;
        Ok(())
    }
}

/// A parsed CSV table: comment lines are kept separate from the schema.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedCsv {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

pub fn parse_csv(text: &str) -> Result<ParsedCsv, CliError> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines
        .next()
        .ok_or_else(|| CliError::Validation("empty table".into()))?;
    let columns: Vec<String> = header.split(',').map(|s| s.to_string()).collect();
    let mut rows = vec![];
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let cells: Vec<String> = line.split(',').map(|s| s.to_string()).collect();
        if cells.len() != columns.len() {
            return Err(CliError::Validation(format!(
                "row has {} cells, header has {}",
                cells.len(),
                columns.len()
            )));
        }
        rows.push(cells);
    }
    Ok(ParsedCsv { columns, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![Cell::Int(1), Cell::Float(0.5)]);
        t.push(vec![Cell::Text("x".into()), Cell::Float(f64::INFINITY)]);
        let mut buf = vec![];
        t.write_csv(&mut buf, "0.0.0", "{}").unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(
            s,
            "# uptorus 0.0.0\n# spec {}\na,b\n1,5.0000000000000000e-1\nx,inf\n"
        );
        let parsed = parse_csv(&s).unwrap();
        assert_eq!(parsed.columns, vec!["a", "b"]);
        assert_eq!(parsed.rows.len(), 2);
    }

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(format_float(1.0 / 3.0), "3.3333333333333331e-1");
        let v: f64 = format_float(0.1).parse().unwrap();
        assert_eq!(v, 0.1);
    }
}

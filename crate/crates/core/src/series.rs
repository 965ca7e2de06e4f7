//! Tabular observable records with deterministic CSV/JSON rendering.

use std::io::Write;

use serde_json::{Map, Value};

/// Floats are written with 12 significant digits so identical runs produce
/// byte-identical files.
pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        // normalizes -0.0
        return "0.00000000000e0".to_string();
    }
    format!("{x:.11e}")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
}

impl Cell {
    pub fn as_f64(&self) -> f64 {
        match *self {
            Cell::Float(x) => x,
            Cell::Int(i) => i as f64,
        }
    }

    fn render(&self) -> String {
        match *self {
            Cell::Float(x) => format_float(x),
            Cell::Int(i) => i.to_string(),
        }
    }

    fn to_json(self) -> Value {
        match self {
            Cell::Float(x) => serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number),
            Cell::Int(i) => Value::from(i),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<i64> for Cell {
    fn from(i: i64) -> Self {
        Cell::Int(i)
    }
}

/// Time-indexed (or parameter-indexed) rows for one observable.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSeries {
    observable: String,
    columns: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl ObservableSeries {
    pub fn new<S: Into<String>>(observable: S, columns: &[&str]) -> Self {
        Self {
            observable: observable.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn observable(&self) -> &str {
        &self.observable
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width for '{}'", self.observable);
        self.rows.push(row);
    }

    pub fn extend(&mut self, other: ObservableSeries) {
        assert_eq!(self.columns, other.columns);
        self.rows.extend(other.rows);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[idx].as_f64()).collect())
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::render).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv is ascii")
    }

    pub fn to_json(&self) -> Value {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .cloned()
                    .zip(row.iter().map(|c| c.to_json()))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        serde_json::json!({ "observable": self.observable, "rows": Value::Array(rows) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_float_format() {
        assert_eq!(format_float(1.0), "1.00000000000e0");
        assert_eq!(format_float(-0.0), format_float(0.0));
        assert_eq!(format_float(0.123456789012345), "1.23456789012e-1");
    }

    #[test]
    fn csv_layout() {
        let mut s = ObservableSeries::new("autocorrelation", &["t", "autocorrelation"]);
        s.push(vec![0.0.into(), 1.0.into()]);
        s.push(vec![0.5.into(), 0.25.into()]);
        let csv = s.to_csv_string();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,autocorrelation");
        assert_eq!(lines[2], "5.00000000000e-1,2.50000000000e-1");
        assert_eq!(s.column("autocorrelation").unwrap(), vec![1.0, 0.25]);
        let json = s.to_json();
        assert_eq!(json["rows"][1]["t"], 0.5);
    }

    #[test]
    fn integer_cells() {
        let mut s = ObservableSeries::new("probability", &["t", "probability", "site"]);
        s.push(vec![0.0.into(), 1.0.into(), 7usize.into()]);
        assert!(s.to_csv_string().ends_with(",7\n"));
    }
}

//! Row tables rendered as CSV or JSON lines with fixed float formatting.

use clap::ValueEnum;
use heckelab::numerics::fmt_sig15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    /// One JSON object per line, keys in column order.
    Json,
}

#[derive(Debug, Clone)]
pub enum Cell {
    Int(i128),
    Float(f64),
    Text(String),
    Bool(bool),
    Empty,
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i128)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as i128)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i128)
    }
}

impl From<i128> for Cell {
    fn from(v: i128) -> Self {
        Cell::Int(v)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
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

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => fmt_sig15(*v),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) if v.is_finite() => fmt_sig15(*v),
            Cell::Float(_) | Cell::Empty => "null".into(),
            Cell::Text(s) => serde_json::to_string(s).expect("strings always serialize"),
            Cell::Bool(b) => b.to_string(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&self.columns).expect("in-memory write");
                for row in &self.rows {
                    w.write_record(row.iter().map(Cell::csv)).expect("in-memory write");
                }
                String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
            }
            Format::Json => {
                let mut out = String::new();
                for row in &self.rows {
                    let fields: Vec<String> = self
                        .columns
                        .iter()
                        .zip(row)
                        .map(|(k, v)| format!("{}:{}", serde_json::to_string(k).expect("key"), v.json()))
                        .collect();
                    out.push('{');
                    out.push_str(&fields.join(","));
                    out.push_str("}\n");
                }
                out
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(&["name", "x", "v", "ok", "missing"]);
        t.push(vec!["a,b".into(), 3u64.into(), 0.1.into(), true.into(), Cell::Empty]);
        t.push(vec!["c".into(), 4u64.into(), f64::NAN.into(), false.into(), None::<f64>.into()]);
        t
    }

    #[test]
    fn csv_quotes_and_formats() {
        let s = sample().render(Format::Csv);
        assert_eq!(s, "name,x,v,ok,missing\n\"a,b\",3,1.00000000000000e-1,true,\nc,4,NaN,false,\n");
    }

    #[test]
    fn json_lines_parse_back() {
        let s = sample().render(Format::Json);
        let rows: Vec<serde_json::Value> = s.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0]["name"], "a,b");
        assert_eq!(rows[0]["v"].as_f64(), Some(0.1));
        assert!(rows[1]["v"].is_null());
        assert!(rows[1]["missing"].is_null());
    }
}

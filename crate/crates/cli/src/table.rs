//! Column tables and their CSV / JSON renderings.

use serde_json::{json, Value};

use crate::config::Format;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i128),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i128)
    }
}

impl From<u128> for Cell {
    fn from(v: u128) -> Self {
        Cell::Int(v as i128)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl Cell {
    /// 17 significant digits for floats.
    fn csv(&self) -> String {
        match self {
            Cell::Float(v) if v.is_finite() => format!("{v:.16e}"),
            Cell::Float(v) if v.is_nan() => "NaN".into(),
            Cell::Float(v) => if *v > 0.0 { "inf" } else { "-inf" }.into(),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Float(v) => json!(v),
            Cell::Int(v) => json!(*v as i64),
            Cell::Text(s) => json!(s),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Float(v) => Some(*v),
            Cell::Int(v) => Some(*v as f64),
            Cell::Text(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Columns (0-based) the gnuplot header plots against each other.
    pub plot: (usize, usize),
    pub log_y: bool,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            plot: (0, 1.min(columns.len().saturating_sub(1))),
            log_y: false,
        }
    }

    pub fn with_plot(mut self, x: usize, y: usize, log_y: bool) -> Self {
        self.plot = (x, y);
        self.log_y = log_y;
        self
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// `{"columns": [...], "rows": [[...], ...]}`; non-finite floats become null.
    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Array(r.iter().map(Cell::json).collect()))
            .collect();
        let doc = json!({ "columns": self.columns, "rows": rows });
        let mut text = serde_json::to_string_pretty(&doc).expect("table serializes");
        text.push('\n');
        text
    }

    /// CSV wrapped in a gnuplot script: `gnuplot -p file.csv` plots it.
    pub fn to_gnuplot(&self, title: &str) -> String {
        let (x, y) = self.plot;
        let mut out = String::new();
        out.push_str("set datafile separator \",\"\n");
        out.push_str(&format!("set title \"{title}\"\n"));
        out.push_str(&format!("set xlabel \"{}\"\n", self.columns[x]));
        out.push_str(&format!("set ylabel \"{}\"\n", self.columns[y]));
        if self.log_y {
            out.push_str("set logscale y\n");
        }
        out.push_str("$data << EOD\n");
        out.push_str(&self.to_csv());
        out.push_str("EOD\n");
        out.push_str(&format!(
            "plot $data using {}:{} skip 1 with linespoints notitle\n",
            x + 1,
            y + 1
        ));
        out
    }

    pub fn render(&self, format: Format, gnuplot: bool, title: &str) -> String {
        match (format, gnuplot) {
            (Format::Json, _) => self.to_json(),
            (Format::Csv, true) => self.to_gnuplot(title),
            (Format::Csv, false) => self.to_csv(),
        }
    }
}

/// Parse CSV produced by [`Table::to_csv`] back into header and rows.
pub fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header = lines
        .next()
        .map(|l| l.split(',').map(str::to_string).collect())
        .unwrap_or_default();
    let rows = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    (header, rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut t = Table::new(&["a", "b", "c"]);
        t.push(vec![0.1.into(), 3usize.into(), "x".into()]);
        t.push(vec![f64::NAN.into(), 0usize.into(), "y".into()]);
        let csv = t.to_csv();
        assert_eq!(csv, "a,b,c\n1.0000000000000001e-1,3,x\nNaN,0,y\n");
        assert!(!csv.contains('\r'));
        let (h, rows) = parse_csv(&csv);
        assert_eq!(h, ["a", "b", "c"]);
        assert_eq!(rows[0][0].parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [1.0 / 3.0, -2.5e-300, 6.02214076e23, std::f64::consts::PI] {
            let s = Cell::Float(v).csv();
            assert_eq!(s.parse::<f64>().unwrap(), v);
            let mantissa = s.split('e').next().unwrap().replace(['-', '.'], "");
            assert_eq!(mantissa.len(), 17);
        }
    }

    #[test]
    fn json_and_gnuplot() {
        let mut t = Table::new(&["x", "y"]).with_plot(0, 1, true);
        t.push(vec![1.0.into(), 2.0.into()]);
        let v: Value = serde_json::from_str(&t.to_json()).unwrap();
        assert_eq!(v["columns"][1], "y");
        assert_eq!(v["rows"][0][1], 2.0);
        let g = t.to_gnuplot("demo");
        assert!(g.starts_with("set datafile separator"));
        assert!(g.contains("set logscale y\n"));
        assert!(g.contains("x,y\n1.0000000000000000e0,2.0000000000000000e0\nEOD\n"));
    }
}

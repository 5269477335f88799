//! Tabular output as CSV with `#` metadata lines, or as JSON.

use serde_json::{json, Map, Value};

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    /// Float printed in scientific notation, for small differences.
    Sci(f64),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) if v.is_nan() => "nan".into(),
            Cell::Float(v) => format!("{v:.10}"),
            Cell::Sci(v) if v.is_nan() => "nan".into(),
            Cell::Sci(v) => format!("{v:.3e}"),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(v) => v.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Float(v) | Cell::Sci(v) if v.is_finite() => json!(v),
            Cell::Float(_) | Cell::Sci(_) => Value::Null,
            Cell::Bool(v) => json!(v),
            Cell::Text(v) => json!(v),
        }
    }
}

/// Grid coordinate: printed in shortest form so `0.3` stays `0.3`.
pub fn coord(x: f64) -> Cell {
    Cell::Text(crate::parse::tidy(x).to_string())
}

#[derive(Clone, Debug, Default)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Trailing `#` lines (summaries).
    pub footer: Vec<String>,
}

impl Table {
    pub fn new(command: &str, columns: Vec<&'static str>) -> Self {
        Self {
            meta: vec![
                ("tool".into(), format!("anontx {}", env!("CARGO_PKG_VERSION"))),
                ("command".into(), command.into()),
            ],
            columns,
            ..Self::default()
        }
    }

    pub fn meta(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.push((key.into(), value.to_string()));
        self
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.iter().map(Cell::csv).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        for line in &self.footer {
            out.push_str(&format!("# {line}\n"));
        }
        out
    }

    pub fn to_json(&self) -> String {
        let meta: Map<String, Value> = self.meta.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, cell)| (c.to_string(), cell.json()))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        let doc = json!({ "meta": meta, "rows": rows, "notes": self.footer });
        serde_json::to_string_pretty(&doc).expect("JSON values always serialise") + "\n"
    }

    pub fn render(&self, json: bool) -> String {
        if json {
            self.to_json()
        } else {
            self.to_csv()
        }
    }
}

//! Result tables: `# key: value` header lines, then `t,x,value[,stderr]` rows.
//!
//! Numbers are written in shortest round-trip exponent form, so every row
//! re-parses to the exact value that was computed.

use serde_json::{json, Map, Value};

use crate::job::Format;

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub t: f64,
    pub x: f64,
    pub value: f64,
    pub stderr: Option<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<(String, String)>,
    pub rows: Vec<Row>,
}

pub fn num(v: f64) -> String {
    format!("{v:e}")
}

impl Table {
    pub fn meta(&mut self, key: &str, value: impl Into<String>) {
        self.header.push((key.to_string(), value.into().replace('\n', " ")));
    }

    pub fn push(&mut self, t: f64, x: f64, value: f64) {
        self.rows.push(Row { t, x, value, stderr: None });
    }

    fn has_stderr(&self) -> bool {
        self.rows.iter().any(|r| r.stderr.is_some())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.header {
            s.push_str(&format!("# {k}: {v}\n"));
        }
        let se = self.has_stderr();
        s.push_str(if se { "t,x,value,stderr\n" } else { "t,x,value\n" });
        for r in &self.rows {
            s.push_str(&format!("{},{},{}", num(r.t), num(r.x), num(r.value)));
            if se {
                s.push(',');
                s.push_str(&num(r.stderr.unwrap_or(f64::NAN)));
            }
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self) -> String {
        let mut header = Map::new();
        for (k, v) in &self.header {
            header.insert(k.clone(), Value::String(v.clone()));
        }
        let se = self.has_stderr();
        let mut columns = vec!["t", "x", "value"];
        if se {
            columns.push("stderr");
        }
        // Strings keep the exact decimal form of the CSV.
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let mut v = vec![num(r.t), num(r.x), num(r.value)];
                if se {
                    v.push(num(r.stderr.unwrap_or(f64::NAN)));
                }
                json!(v)
            })
            .collect();
        let doc = json!({ "header": header, "columns": columns, "rows": rows });
        let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
        s.push('\n');
        s
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

#[cfg(test)]
/// Reads a CSV written by [`Table::to_csv`].
pub fn parse_csv(text: &str) -> Result<Table, String> {
    let mut t = Table::default();
    let mut seen_columns = false;
    for (i, line) in text.lines().enumerate() {
        if let Some(h) = line.strip_prefix("# ") {
            let (k, v) = h.split_once(": ").ok_or(format!("line {}: bad header", i + 1))?;
            t.header.push((k.into(), v.into()));
            continue;
        }
        if !seen_columns {
            seen_columns = true;
            continue;
        }
        let f: Vec<f64> = line
            .split(',')
            .map(|c| c.parse::<f64>().map_err(|e| format!("line {}: {e}", i + 1)))
            .collect::<Result<_, _>>()?;
        match f.as_slice() {
            [a, b, c] => t.rows.push(Row { t: *a, x: *b, value: *c, stderr: None }),
            [a, b, c, d] => t.rows.push(Row { t: *a, x: *b, value: *c, stderr: Some(*d) }),
            _ => return Err(format!("line {}: expected 3 or 4 columns", i + 1)),
        }
    }
    Ok(t)
}

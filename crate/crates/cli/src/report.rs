//! Tabular reports written as JSON or CSV.

use std::io::Read;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct Column {
    pub name: String,
    /// `None` only for text and flag columns.
    pub unit: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub input_digest: String,
    pub args: Value,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Value>>,
}

impl Report {
    pub fn new(command: &str, args: Value, digest: InputDigest) -> Self {
        Report {
            schema: SCHEMA_VERSION,
            tool: "ecmkit",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            input_digest: digest.finish(),
            args,
            columns: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn num(&mut self, name: &str, unit: &str) -> &mut Self {
        self.columns.push(Column {
            name: name.to_string(),
            unit: Some(unit.to_string()),
        });
        self
    }

    pub fn text(&mut self, name: &str) -> &mut Self {
        self.columns.push(Column {
            name: name.to_string(),
            unit: None,
        });
        self
    }

    pub fn row(&mut self, cells: Vec<Value>) -> Result<()> {
        if cells.len() != self.columns.len() {
            return Err(CliError::Internal(format!(
                "row has {} cells for {} columns",
                cells.len(),
                self.columns.len()
            )));
        }
        self.rows.push(cells);
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Header comments carry the metadata, then one header line of column
    /// names and one line per row.
    pub fn to_csv(&self) -> String {
        let mut s = format!(
            "# {} {} {} sha256={}\n",
            self.tool, self.version, self.command, self.input_digest
        );
        let units: Vec<String> = self
            .columns
            .iter()
            .map(|c| format!("{}={}", c.name, c.unit.as_deref().unwrap_or("-")))
            .collect();
        s += &format!("# units: {}\n", units.join(" "));
        let names: Vec<String> = self.columns.iter().map(|c| csv_field(&c.name)).collect();
        s += &names.join(",");
        s.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(csv_cell).collect();
            s += &cells.join(",");
            s.push('\n');
        }
        s
    }

    /// Format follows the extension of `out`; JSON on stdout without one.
    pub fn emit(&self, out: Option<&Path>) -> Result<()> {
        let Some(path) = out else {
            print!("{}", self.to_json());
            return Ok(());
        };
        let text = match path.extension().and_then(|e| e.to_str()) {
            Some("json") => self.to_json(),
            Some("csv") => self.to_csv(),
            _ => {
                return Err(CliError::Validation(format!(
                    "--out {}: extension must be .json or .csv",
                    path.display()
                )))
            }
        };
        std::fs::write(path, text).map_err(|e| CliError::io(path, e))
    }
}

/// Checks the output extension before any work is done.
pub fn check_out(out: Option<&Path>) -> Result<()> {
    match out.map(|p| p.extension().and_then(|e| e.to_str())) {
        None | Some(Some("json" | "csv")) => Ok(()),
        Some(_) => Err(CliError::Validation(format!(
            "--out {}: extension must be .json or .csv",
            out.unwrap().display()
        ))),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => csv_field(s),
        other => other.to_string(),
    }
}

/// SHA-256 over the command, its arguments and the bytes of every input file.
pub struct InputDigest(Sha256);

impl InputDigest {
    pub fn new(command: &str, args: &Value) -> Self {
        let mut h = Sha256::new();
        h.update(command.as_bytes());
        h.update([0]);
        h.update(args.to_string().as_bytes());
        InputDigest(h)
    }

    pub fn file(&mut self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
        let mut buf = vec![0u8; 1 << 16];
        self.0.update([0]);
        loop {
            let n = f.read(&mut buf).map_err(|e| CliError::io(path, e))?;
            if n == 0 {
                return Ok(());
            }
            self.0.update(&buf[..n]);
        }
    }

    fn finish(self) -> String {
        hex::encode(self.0.finalize())
    }
}

pub fn opt(v: Option<f64>) -> Value {
    v.map_or(Value::Null, Value::from)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn csv_quotes_and_nulls() {
        let mut r = Report::new("t", json!({}), InputDigest::new("t", &json!({})));
        r.text("name").num("x", "s");
        r.row(vec![json!("a,b"), Value::Null]).unwrap();
        r.row(vec![json!("c"), json!(0.5)]).unwrap();
        let csv = r.to_csv();
        assert!(csv.ends_with("name,x\n\"a,b\",\nc,0.5\n"), "{csv}");
        assert!(csv.contains("# units: name=- x=s"));
    }

    #[test]
    fn row_width_is_checked() {
        let mut r = Report::new("t", json!({}), InputDigest::new("t", &json!({})));
        r.num("x", "s");
        assert!(matches!(r.row(vec![]), Err(CliError::Internal(_))));
    }

    #[test]
    fn digest_depends_on_args() {
        let a = InputDigest::new("p", &json!({"k": 1})).finish();
        let b = InputDigest::new("p", &json!({"k": 2})).finish();
        assert_ne!(a, b);
        assert_eq!(a.len(), 64);
    }
}

use std::io::Write;
use std::path::Path;

use framemul::{BoundCertificate, Tolerances};
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::CliError;

/// Everything a command produces. Text output is rendered from the JSON form.
#[derive(Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub certificates: Vec<BoundCertificate>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub tables: Vec<Value>,
    pub details: Value,
}

impl Report {
    pub fn failed(&self) -> Vec<&BoundCertificate> {
        self.certificates.iter().filter(|c| !c.holds).collect()
    }
}

/// Command output: a report, or a bare artifact such as a generated family.
#[derive(Debug)]
pub enum Output {
    Report(Report),
    Artifact(Value),
}

impl Output {
    pub fn to_value(&self) -> Value {
        match self {
            Output::Report(r) => serde_json::to_value(r).expect("report serializes"),
            Output::Artifact(v) => v.clone(),
        }
    }

    pub fn failed(&self) -> Vec<&BoundCertificate> {
        match self {
            Output::Report(r) => r.failed(),
            Output::Artifact(_) => Vec::new(),
        }
    }
}

pub fn to_json(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("value serializes");
    s.push('\n');
    s
}

/// Writes via a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let io_err = |source| CliError::Io {
        path: path.display().to_string(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(contents.as_bytes()).map_err(io_err)?;
    tmp.flush().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

fn is_scalar(v: &Value) -> bool {
    !matches!(v, Value::Array(_) | Value::Object(_))
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        other => other.to_string(),
    }
}

/// Objects whose values are all scalars, sharing the first object's keys.
type Table<'a> = (Vec<String>, Vec<&'a Map<String, Value>>);

fn as_table(items: &[Value]) -> Option<Table<'_>> {
    let first = items.first()?.as_object()?;
    let keys: Vec<String> = first.keys().cloned().collect();
    let mut rows = Vec::with_capacity(items.len());
    for item in items {
        let obj = item.as_object()?;
        if obj.len() != keys.len() || !keys.iter().all(|k| obj.get(k).is_some_and(is_scalar)) {
            return None;
        }
        rows.push(obj);
    }
    Some((keys, rows))
}

fn render_table(keys: &[String], rows: &[&Map<String, Value>], pad: &str, out: &mut String) {
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| keys.iter().map(|k| scalar(&r[k])).collect())
        .collect();
    let widths: Vec<usize> = keys
        .iter()
        .enumerate()
        .map(|(i, k)| cells.iter().map(|c| c[i].len()).chain([k.len()]).max().unwrap_or(0))
        .collect();
    let line = |items: Vec<&str>| {
        let parts: Vec<String> = items.iter().zip(&widths).map(|(s, w)| format!("{s:<w$}")).collect();
        format!("{pad}{}\n", parts.join("  ").trim_end())
    };
    out.push_str(&line(keys.iter().map(String::as_str).collect()));
    for c in &cells {
        out.push_str(&line(c.iter().map(String::as_str).collect()));
    }
}

fn render_field(key: &str, v: &Value, indent: usize, out: &mut String) {
    let pad = " ".repeat(indent);
    match v {
        _ if is_scalar(v) => out.push_str(&format!("{pad}{key}: {}\n", scalar(v))),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str(&format!("{pad}{key}: []\n"));
            } else if let Some((keys, rows)) = as_table(items) {
                out.push_str(&format!("{pad}{key}:\n"));
                render_table(&keys, &rows, &" ".repeat(indent + 2), out);
            } else if items.iter().all(|i| !i.is_object()) {
                out.push_str(&format!("{pad}{key}: {v}\n"));
            } else {
                out.push_str(&format!("{pad}{key}:\n"));
                for (i, item) in items.iter().enumerate() {
                    render_field(&format!("[{i}]"), item, indent + 2, out);
                }
            }
        }
        Value::Object(map) => {
            out.push_str(&format!("{pad}{key}:\n"));
            for (k, v) in map {
                render_field(k, v, indent + 2, out);
            }
        }
        _ => unreachable!(),
    }
}

/// Human-readable rendering of a JSON report: scalars as `key: value`,
/// uniform object arrays as aligned columns, other arrays inline.
pub fn to_text(value: &Value) -> String {
    let mut out = String::new();
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                render_field(k, v, 0, &mut out);
            }
        }
        other => render_field("value", other, 0, &mut out),
    }
    out
}

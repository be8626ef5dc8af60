//! Results documents: named sections of fields or tables, written either as
//! plain text with a fixed field order or as one JSON object.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

pub enum Section {
    Fields(Vec<(String, Value)>),
    Table { columns: Vec<String>, rows: Vec<Vec<Value>> },
}

#[derive(Default)]
pub struct Report {
    sections: Vec<(String, Section)>,
}

impl Report {
    pub fn fields(&mut self, name: &str, fields: Vec<(&str, Value)>) {
        let fields = fields.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        self.sections.push((name.to_string(), Section::Fields(fields)));
    }

    pub fn table(&mut self, name: &str, columns: &[&str], rows: Vec<Vec<Value>>) {
        self.sections.push((
            name.to_string(),
            Section::Table {
                columns: columns.iter().map(|c| c.to_string()).collect(),
                rows,
            },
        ));
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, (name, section)) in self.sections.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            let _ = writeln!(out, "[{name}]");
            match section {
                Section::Fields(fields) => {
                    for (k, v) in fields {
                        let _ = writeln!(out, "{k} = {v}");
                    }
                }
                Section::Table { columns, rows } => {
                    let _ = writeln!(out, "{}", columns.join(","));
                    for row in rows {
                        let cells: Vec<String> = row.iter().map(Value::to_string).collect();
                        let _ = writeln!(out, "{}", cells.join(","));
                    }
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut doc = Map::new();
        for (name, section) in &self.sections {
            let value = match section {
                Section::Fields(fields) => Value::Object(fields.iter().cloned().collect()),
                Section::Table { columns, rows } => Value::Array(
                    rows.iter()
                        .map(|row| Value::Object(columns.iter().cloned().zip(row.iter().cloned()).collect()))
                        .collect(),
                ),
            };
            doc.insert(name.clone(), value);
        }
        let mut s = serde_json::to_string_pretty(&Value::Object(doc)).expect("values are serializable");
        s.push('\n');
        s
    }

    pub fn render(&self, json: bool) -> String {
        if json {
            self.to_json()
        } else {
            self.to_text()
        }
    }
}

/// Run metadata shared by every results document.
pub struct Manifest {
    pub command: &'static str,
    pub inputs: Vec<(String, String)>,
    pub config: Vec<(&'static str, Value)>,
    pub started: std::time::Instant,
}

impl Manifest {
    pub fn new(command: &'static str) -> Self {
        Self {
            command,
            inputs: Vec::new(),
            config: Vec::new(),
            started: std::time::Instant::now(),
        }
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        self.inputs.push((path.display().to_string(), hex::encode(Sha256::digest(&bytes))));
        Ok(())
    }

    /// Adds the manifest, input and config sections; call last so timing covers the run.
    pub fn attach(&self, report: &mut Report) {
        let mut sections = Report::default();
        sections.fields(
            "manifest",
            vec![
                ("command", Value::from(self.command)),
                ("version", Value::from(env!("CARGO_PKG_VERSION"))),
                ("model_format", Value::from(rhbox::model_io::FORMAT_VERSION)),
                ("rng", Value::from(rhbox::rng::RNG_ALGORITHM)),
                ("wall_seconds", Value::from(self.started.elapsed().as_secs_f64())),
            ],
        );
        sections.table(
            "inputs",
            &["path", "sha256"],
            self.inputs
                .iter()
                .map(|(p, d)| vec![Value::from(p.as_str()), Value::from(d.as_str())])
                .collect(),
        );
        if !self.config.is_empty() {
            sections.fields("config", self.config.clone());
        }
        sections.sections.append(&mut report.sections);
        report.sections = sections.sections;
    }
}

/// Finite floats as JSON numbers, anything else as null.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

pub fn opt_num(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

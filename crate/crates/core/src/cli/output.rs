use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Serialize;
use serde_json::Value;

use crate::ergodic::Schedule;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
    Table,
}

/// Stable JSON envelope shared by every command.
#[derive(Debug, Clone, Serialize)]
pub struct Envelope {
    pub command: String,
    pub inputs: BTreeMap<String, Value>,
    pub schedule: Schedule,
    pub results: Value,
    pub version: String,
}

#[derive(Debug, Clone)]
pub struct Sidecar {
    pub label: String,
    pub csv: String,
}

/// A finished command: the envelope plus curve sidecars and a short
/// summary for the table format.
#[derive(Debug, Clone)]
pub struct Report {
    pub envelope: Envelope,
    pub sidecars: Vec<Sidecar>,
    pub summary: Vec<(String, String)>,
}

impl Report {
    pub fn new(command: &str, schedule: Schedule, results: &impl Serialize) -> Result<Self> {
        Ok(Report {
            envelope: Envelope {
                command: command.into(),
                inputs: BTreeMap::new(),
                schedule,
                results: serde_json::to_value(results)?,
                version: env!("CARGO_PKG_VERSION").into(),
            },
            sidecars: Vec::new(),
            summary: Vec::new(),
        })
    }

    pub fn input(mut self, key: &str, value: impl Serialize) -> Result<Self> {
        self.envelope.inputs.insert(key.into(), serde_json::to_value(value)?);
        Ok(self)
    }

    pub fn sidecar(mut self, label: &str, csv: String) -> Self {
        self.sidecars.push(Sidecar { label: label.into(), csv });
        self
    }

    pub fn row(mut self, key: &str, value: impl ToString) -> Self {
        self.summary.push((key.into(), value.to_string()));
        self
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(&self.envelope)?;
        s.push('\n');
        Ok(s)
    }

    pub fn render(&self, format: Format) -> Result<String> {
        Ok(match format {
            Format::Json => self.to_json()?,
            Format::Csv => match self.sidecars.first() {
                Some(s) => s.csv.clone(),
                None => {
                    let mut out = String::from("key,value\n");
                    for (k, v) in &self.summary {
                        writeln!(out, "{k},{v}").unwrap();
                    }
                    out
                }
            },
            Format::Table => {
                let width = self.summary.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
                let mut out = format!("{} (v{})\n", self.envelope.command, self.envelope.version);
                for (k, v) in &self.summary {
                    writeln!(out, "  {k:<width$}  {v}").unwrap();
                }
                out
            }
        })
    }

    /// Print to stdout, or write to `out` with sidecars `<stem>.<label>.csv`
    /// beside it. Returns the sidecar paths written.
    pub fn emit(&self, format: Format, out: Option<&Path>) -> Result<Vec<PathBuf>> {
        let text = self.render(format)?;
        let Some(path) = out else {
            io::stdout().write_all(text.as_bytes())?;
            return Ok(Vec::new());
        };
        fs::write(path, text)?;
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
        let dir = path.parent().unwrap_or(Path::new(""));
        let mut written = Vec::new();
        for s in &self.sidecars {
            let label: String = s
                .label
                .chars()
                .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
                .collect();
            let p = dir.join(format!("{stem}.{label}.csv"));
            fs::write(&p, &s.csv)?;
            written.push(p);
        }
        Ok(written)
    }
}

//! Report emission: JSON documents with provenance, CSV tables, side files.

use crate::config::Format;
use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};
use std::io::Write;
use std::path::PathBuf;

pub struct Sink {
    pub out: Option<PathBuf>,
    pub format: Format,
    pub threads: usize,
}

#[derive(Debug, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        wtr.write_record(&self.header)?;
        for r in &self.rows {
            wtr.write_record(r)?;
        }
        Ok(String::from_utf8(wtr.into_inner()?)?)
    }
}

/// What a command produced.
pub struct Report {
    pub command: &'static str,
    /// Resolved parameters, echoed into the provenance block.
    pub config: Value,
    pub tolerances: Value,
    pub body: Value,
    pub table: Table,
    /// Extra files `(name, contents)`, written only with `--out`.
    pub files: Vec<(String, String)>,
}

pub fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).context("serializing report")
}

impl Sink {
    pub fn document(&self, r: &Report) -> Value {
        json!({
            "provenance": {
                "tool": "rqi-lab",
                "library_version": env!("CARGO_PKG_VERSION"),
                "command": r.command,
                "threads": self.threads,
                "config": r.config,
                "tolerances": r.tolerances,
            },
            "result": r.body,
        })
    }

    /// Main report to `<out>/<command>.<ext>` or stdout; side files only with `--out`.
    pub fn emit(&self, r: &Report) -> Result<()> {
        let (text, ext) = match self.format {
            Format::Json => (serde_json::to_string_pretty(&self.document(r))? + "\n", "json"),
            Format::Csv => (r.table.to_csv()?, "csv"),
        };
        match &self.out {
            Some(dir) => {
                std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
                let path = dir.join(format!("{}.{ext}", r.command));
                std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
                eprintln!("wrote {}", path.display());
                for (name, contents) in &r.files {
                    let p = dir.join(name);
                    std::fs::write(&p, contents).with_context(|| format!("writing {}", p.display()))?;
                    eprintln!("wrote {}", p.display());
                }
            }
            None => {
                std::io::stdout().write_all(text.as_bytes())?;
            }
        }
        Ok(())
    }
}

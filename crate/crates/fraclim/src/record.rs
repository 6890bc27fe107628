//! Result records and their files.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::Format;
use crate::HarnessError;

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// One executed cell. Every number is tied to the hash of the resolved
/// configuration that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub config_hash: String,
    pub module: String,
    pub operation: String,
    pub cell: usize,
    pub inputs: BTreeMap<String, f64>,
    pub outputs: BTreeMap<String, f64>,
    pub tolerances: BTreeMap<String, f64>,
    pub error: Option<String>,
    pub wall_time_s: f64,
    pub code_version: String,
}

impl ResultRecord {
    pub fn failed(&self) -> bool {
        self.error.is_some()
    }
}

/// Writes a run into an output directory:
///
/// - `records.jsonl`: append-only, one record per line, wall times included;
/// - `<stem>.csv`: one row per cell, columns `cell,module,operation`, then
///   the input keys, the output keys and `error`; keys listed in `order`
///   come first in that order, the rest sorted by name;
/// - `<stem>.json`: the resolved configuration and all records without
///   wall times.
///
/// The CSV and JSON files depend only on the configuration.
pub struct Appender {
    dir: PathBuf,
    jsonl: BufWriter<File>,
}

impl Appender {
    pub fn open(dir: &Path) -> Result<Self, HarnessError> {
        std::fs::create_dir_all(dir)?;
        let file = OpenOptions::new().create(true).append(true).open(dir.join("records.jsonl"))?;
        Ok(Self { dir: dir.to_path_buf(), jsonl: BufWriter::new(file) })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn append(&mut self, rec: &ResultRecord) -> Result<(), HarnessError> {
        serde_json::to_writer(&mut self.jsonl, rec)?;
        self.jsonl.write_all(b"\n")?;
        self.jsonl.flush()?;
        Ok(())
    }

    pub fn write_tables(
        &self,
        stem: &str,
        config_toml: &str,
        records: &[ResultRecord],
        formats: &[Format],
        order: &[&str],
    ) -> Result<Vec<PathBuf>, HarnessError> {
        let mut written = Vec::new();
        if formats.contains(&Format::Csv) {
            let path = self.dir.join(format!("{stem}.csv"));
            write_csv(&path, records, order)?;
            written.push(path);
        }
        if formats.contains(&Format::Json) {
            let path = self.dir.join(format!("{stem}.json"));
            let stripped: Vec<ResultRecord> =
                records.iter().cloned().map(|r| ResultRecord { wall_time_s: 0.0, ..r }).collect();
            let summary = serde_json::json!({
                "config_hash": records.first().map(|r| r.config_hash.clone()),
                "config": config_toml,
                "cells": records.len(),
                "failed": records.iter().filter(|r| r.failed()).count(),
                "records": stripped,
            });
            std::fs::write(&path, serde_json::to_string_pretty(&summary)? + "\n")?;
            written.push(path);
        }
        Ok(written)
    }
}

fn ordered<'a>(keys: BTreeSet<&'a String>, order: &[&str]) -> Vec<&'a String> {
    let mut out: Vec<&String> = order.iter().filter_map(|o| keys.iter().find(|k| k.as_str() == *o).copied()).collect();
    out.extend(keys.iter().filter(|k| !order.contains(&k.as_str())));
    out
}

fn write_csv(path: &Path, records: &[ResultRecord], order: &[&str]) -> Result<(), HarnessError> {
    let inputs = ordered(records.iter().flat_map(|r| r.inputs.keys()).collect(), order);
    let outputs = ordered(records.iter().flat_map(|r| r.outputs.keys()).collect(), order);
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["cell".to_string(), "module".into(), "operation".into()];
    header.extend(inputs.iter().map(|s| s.to_string()));
    header.extend(outputs.iter().map(|s| s.to_string()));
    header.push("error".into());
    w.write_record(&header)?;
    for r in records {
        let mut row = vec![r.cell.to_string(), r.module.clone(), r.operation.clone()];
        row.extend(inputs.iter().map(|k| r.inputs.get(*k).map(num).unwrap_or_default()));
        row.extend(outputs.iter().map(|k| r.outputs.get(*k).map(num).unwrap_or_default()));
        row.push(r.error.clone().unwrap_or_default());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Shortest round-trip representation.
fn num(x: &f64) -> String {
    format!("{x:?}")
}

/// Writes a plain numeric table with the given header.
pub fn write_curve(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(num))?;
    }
    w.flush()?;
    Ok(())
}

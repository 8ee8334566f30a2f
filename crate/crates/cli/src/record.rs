//! Result records and artifact writing: one JSON record per run plus CSV
//! tables, with deterministic naming and content (a timestamp field is the
//! only run-to-run variation).

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, ExperimentKind};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub measured: f64,
    pub bound: f64,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, pass: bool, measured: f64, bound: f64, detail: String) -> Self {
        Check {
            name: name.to_string(),
            pass,
            measured,
            bound,
            detail,
        }
    }

    /// Convenience for "measured must not exceed bound".
    pub fn le(name: &str, measured: f64, bound: f64, detail: String) -> Self {
        Check::new(name, measured <= bound, measured, bound, detail)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|v| format!("{v:.17e}")).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultRecord {
    pub kind: ExperimentKind,
    pub config: ExperimentConfig,
    pub checks: Vec<Check>,
    pub tables: BTreeMap<String, Table>,
    pub generated_at_unix: u64,
}

impl ResultRecord {
    pub fn new(
        config: ExperimentConfig,
        checks: Vec<Check>,
        tables: BTreeMap<String, Table>,
    ) -> Self {
        ResultRecord {
            kind: config.kind,
            config,
            checks,
            tables,
            generated_at_unix: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn base_name(&self) -> String {
        format!("{}-{}", self.kind.as_str(), self.config.seed)
    }

    /// Writes the JSON record and one CSV per table; returns written paths.
    pub fn write_artifacts(&self, out_dir: &Path) -> std::io::Result<Vec<PathBuf>> {
        std::fs::create_dir_all(out_dir)?;
        let mut written = Vec::new();
        let json_path = out_dir.join(format!("{}.json", self.base_name()));
        let mut f = std::fs::File::create(&json_path)?;
        f.write_all(serde_json::to_string_pretty(self).expect("record serializes").as_bytes())?;
        f.write_all(b"\n")?;
        written.push(json_path);
        for (name, table) in &self.tables {
            let csv_path = out_dir.join(format!("{}-{}.csv", self.base_name(), name));
            std::fs::write(&csv_path, table.to_csv())?;
            written.push(csv_path);
        }
        Ok(written)
    }
}

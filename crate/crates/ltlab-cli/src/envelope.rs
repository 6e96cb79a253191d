use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

pub const SCHEMA_VERSION: &str = "1.0";

#[derive(Debug, Clone, Serialize)]
pub struct ErrorInfo {
    pub kind: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Provenance {
    pub cache_dir: Option<String>,
    pub cache_keys: Vec<String>,
}

/// Everything one invocation produced; `result` is `null` exactly when `error` is not.
#[derive(Debug, Clone, Serialize)]
pub struct ResultEnvelope {
    pub schema_version: String,
    pub tool: String,
    pub tool_version: String,
    pub command: String,
    pub config: Value,
    pub seed: u64,
    pub started_at: String,
    pub finished_at: String,
    pub status: String,
    pub result: Option<Value>,
    pub error: Option<ErrorInfo>,
    pub provenance: Provenance,
    pub artifacts: Vec<String>,
}

/// A CSV table held in memory until the run succeeds.
#[derive(Debug, Clone)]
pub struct Table {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, header: &[&'static str]) -> Self {
        Self {
            name: name.to_string(),
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Shortest round-trip formatting, so identical inputs give identical bytes.
    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|x| format!("{x:?}")).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }
}

/// Writes via a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let tmp: PathBuf = path.with_extension(format!(
        "{}.tmp{}",
        path.extension().and_then(|e| e.to_str()).unwrap_or(""),
        std::process::id()
    ));
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)
}

/// Minimal gnuplot script plotting every column against the first.
pub fn plot_script(t: &Table) -> String {
    let mut s = format!("set datafile separator ','\nset key autotitle columnhead\nset terminal pngcairo size 900,600\nset output '{}.png'\nplot ", t.name);
    let series: Vec<String> = (2..=t.header.len())
        .map(|c| format!("'{}.csv' using 1:{c} with linespoints", t.name))
        .collect();
    s.push_str(&series.join(", \\\n     "));
    s.push('\n');
    s
}

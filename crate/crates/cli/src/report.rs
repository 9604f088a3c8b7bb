//! Run reports, check rows, and deterministic file output.
//!
//! Every command writes one directory: `config.echo` (resolved
//! parameters), its CSV artifacts, and `report.json` with the schema
//! `{command, seed, params, checks: [{name, value, bound, pass}],
//! artifacts: [paths]}`. CSV bytes depend only on the seed and
//! parameters; wall-clock metadata lives in `params` of the JSON report.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub seed: u64,
    pub params: BTreeMap<String, serde_json::Value>,
    pub checks: Vec<Check>,
    pub artifacts: Vec<String>,
    #[serde(skip)]
    started: Instant,
}

impl RunReport {
    pub fn new(command: &str, seed: u64) -> Self {
        Self {
            command: command.to_string(),
            seed,
            params: BTreeMap::new(),
            checks: Vec::new(),
            artifacts: Vec::new(),
            started: Instant::now(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Into<serde_json::Value>) -> &mut Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    /// Records a check of the form `value <= bound` (or any predicate the
    /// caller evaluated); prints one verdict line.
    pub fn check(&mut self, name: impl Into<String>, value: f64, bound: f64, pass: bool) {
        let name = name.into();
        println!(
            "CHECK {name}: {} (value {value:.6e}, bound {bound:.6e})",
            if pass { "PASS" } else { "FAIL" },
        );
        self.checks.push(Check { name, value, bound, pass });
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Writes `report.json` with wall-clock metadata in `params`.
    pub fn finalize(&mut self, dir: &OutDir) -> Result<bool, CliError> {
        self.param(
            "elapsed_seconds",
            serde_json::Value::from(self.started.elapsed().as_secs_f64()),
        );
        let path = dir.file("report.json");
        let json = serde_json::to_string_pretty(&self)
            .map_err(|e| CliError::Runtime(format!("serializing report: {e}")))?;
        fs::write(&path, json).map_err(|e| CliError::Runtime(format!("writing report: {e}")))?;
        self.artifacts.push(path.display().to_string());
        let pass = self.all_pass();
        println!(
            "{}: {} ({} checks) -> {}",
            self.command,
            if pass { "ALL PASS" } else { "FAILURES" },
            self.checks.len(),
            path.display()
        );
        Ok(pass)
    }
}

/// Output directory for one run.
pub struct OutDir {
    path: PathBuf,
}

impl OutDir {
    pub fn create(path: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(path)
            .map_err(|e| CliError::Runtime(format!("creating {}: {e}", path.display())))?;
        Ok(Self { path: path.to_path_buf() })
    }

    pub fn file(&self, name: &str) -> PathBuf {
        self.path.join(name)
    }

    /// Writes the resolved configuration as `key = value` lines.
    pub fn echo_config(&self, entries: &[(&str, String)]) -> Result<PathBuf, CliError> {
        let path = self.file("config.echo");
        let mut text = String::new();
        for (k, v) in entries {
            text.push_str(k);
            text.push_str(" = ");
            text.push_str(v);
            text.push('\n');
        }
        fs::write(&path, text)
            .map_err(|e| CliError::Runtime(format!("writing config echo: {e}")))?;
        Ok(path)
    }

    /// Writes a CSV from preassembled rows.
    pub fn write_csv(
        &self,
        name: &str,
        header: &str,
        rows: &[String],
    ) -> Result<PathBuf, CliError> {
        let path = self.file(name);
        let file = fs::File::create(&path)
            .map_err(|e| CliError::Runtime(format!("creating {}: {e}", path.display())))?;
        let mut w = std::io::BufWriter::new(file);
        let write = |w: &mut std::io::BufWriter<fs::File>, line: &str| {
            w.write_all(line.as_bytes())
                .and_then(|_| w.write_all(b"\n"))
                .map_err(|e| CliError::Runtime(format!("writing {}: {e}", path.display())))
        };
        write(&mut w, header)?;
        for row in rows {
            write(&mut w, row)?;
        }
        w.flush()
            .map_err(|e| CliError::Runtime(format!("flushing {}: {e}", path.display())))?;
        Ok(path)
    }
}

/// Header of the divergence trace shared by the experiment and dichotomy
/// commands.
pub const TRACE_HEADER: &str = "t,global_kl,global_tv,region,mass,cond_kl,cond_tv,cond_chi2,fi,pfi";

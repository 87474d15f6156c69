use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use hon_core::Result;
use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Serialize)]
struct InputRecord {
    role: &'static str,
    path: String,
    bytes: Option<u64>,
}

/// Provenance written next to every run's outputs as `<command>.manifest.json`.
#[derive(Debug, Serialize)]
pub struct Manifest {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    inputs: Vec<InputRecord>,
    parameters: Value,
    seeds: BTreeMap<&'static str, u64>,
    threads: usize,
    outputs: Vec<String>,
    warnings: Vec<String>,
    timings_ms: BTreeMap<&'static str, f64>,
    timestamp_unix: u64,
    #[serde(skip)]
    clock: Option<(&'static str, Instant)>,
}

impl Manifest {
    pub fn new(command: &'static str) -> Self {
        Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            inputs: Vec::new(),
            parameters: Value::Null,
            seeds: BTreeMap::new(),
            threads: rayon::current_num_threads(),
            outputs: Vec::new(),
            warnings: Vec::new(),
            timings_ms: BTreeMap::new(),
            timestamp_unix: 0,
            clock: None,
        }
    }

    pub fn input(&mut self, role: &'static str, path: &Path) {
        self.inputs.push(InputRecord {
            role,
            path: path.display().to_string(),
            bytes: std::fs::metadata(path).ok().map(|m| m.len()),
        });
    }

    pub fn parameters(&mut self, p: impl Serialize) {
        self.parameters = serde_json::to_value(p).expect("parameters serialize");
    }

    pub fn seed(&mut self, name: &'static str, seed: u64) {
        self.seeds.insert(name, seed);
    }

    pub fn warn(&mut self, msg: impl Into<String>) {
        self.warnings.push(msg.into());
    }

    /// Starts timing a phase, closing the previous one.
    pub fn phase(&mut self, name: &'static str) {
        self.stop();
        self.clock = Some((name, Instant::now()));
    }

    fn stop(&mut self) {
        if let Some((name, t)) = self.clock.take() {
            self.timings_ms.insert(name, t.elapsed().as_secs_f64() * 1e3);
        }
    }

    /// Creates `dir/name` and records it as an output.
    pub fn output(&mut self, dir: &Path, name: &str) -> Result<std::io::BufWriter<std::fs::File>> {
        let path: PathBuf = dir.join(name);
        self.outputs.push(name.to_string());
        Ok(std::io::BufWriter::new(std::fs::File::create(path)?))
    }

    pub fn finish(mut self, dir: &Path) -> Result<()> {
        self.stop();
        self.timestamp_unix = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let file = std::fs::File::create(dir.join(format!("{}.manifest.json", self.command)))?;
        serde_json::to_writer_pretty(file, &self)?;
        Ok(())
    }
}

use std::path::Path;

use serde_json::{json, Value};

use crate::error::Result;

/// Provenance record written next to every run's outputs.
#[derive(Clone, Debug, PartialEq)]
pub struct Manifest {
    pub command: String,
    /// The configuration with defaults applied.
    pub config: Value,
    pub wall_time_seconds: f64,
    /// Extra run facts (e.g. Λ and the branch) that `check` reads back.
    pub run: Value,
}

impl Manifest {
    pub fn to_json(&self) -> Value {
        json!({
            "tool": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "wall_time_seconds": self.wall_time_seconds,
            "config": self.config,
            "run": self.run,
        })
    }
}

pub fn write_manifest(dir: &Path, manifest: &Manifest) -> Result<()> {
    let text = serde_json::to_string_pretty(&manifest.to_json()).expect("manifest is valid JSON");
    std::fs::write(dir.join("manifest.json"), text + "\n")?;
    Ok(())
}

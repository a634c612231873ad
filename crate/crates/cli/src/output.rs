use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use cvnet::network::FidelityCurve;
use serde::Serialize;
use serde_json::Value;

pub const CSV_HEADER: &str = "t_prime,f_plus,f_minus";

/// Everything needed to regenerate a CSV byte for byte.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: BTreeMap<String, Value>,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub output_path: String,
}

impl RunManifest {
    pub fn new(command: &str, output: &Path) -> RunManifest {
        RunManifest {
            command: command.to_string(),
            parameters: BTreeMap::new(),
            seed: None,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            output_path: output.display().to_string(),
        }
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> RunManifest {
        self.parameters.insert(key.to_string(), value.into());
        self
    }
}

pub fn manifest_path(csv: &Path) -> PathBuf {
    let mut name = csv.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

pub fn write_curve(path: &Path, curve: &FidelityCurve, manifest: &RunManifest) -> Result<()> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    let mut w = BufWriter::new(file);
    write!(w, "{CSV_HEADER}\n")?;
    for ((t, p), m) in curve.grid.iter().zip(&curve.f_plus).zip(&curve.f_minus) {
        write!(w, "{t},{p},{m}\n")?;
    }
    w.flush().with_context(|| format!("cannot write {}", path.display()))?;

    let mpath = manifest_path(path);
    let mut json = serde_json::to_string_pretty(manifest)?;
    json.push('\n');
    std::fs::write(&mpath, json).with_context(|| format!("cannot write {}", mpath.display()))?;
    Ok(())
}

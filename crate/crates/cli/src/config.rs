use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::de::DeserializeOwned;
use serde::Serialize;
use surfaug::mesh::{load_mesh, make_synthetic, MeshFormat, SyntheticKind};
use surfaug::TriMesh64;

/// A malformed invocation; maps to exit code 2.
#[derive(Debug)]
pub struct Usage(String);

impl Usage {
    pub fn new(message: impl Into<String>) -> Self {
        Usage(message.into())
    }
}

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

pub fn read_table(path: &Path) -> anyhow::Result<toml::Table> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    text.parse::<toml::Table>().with_context(|| format!("parsing config {}", path.display()))
}

/// Replace fields of `args` with same-named config keys (`-` and `_` are
/// interchangeable). Unknown keys are rejected.
pub fn merge<A: Serialize + DeserializeOwned>(args: A, table: &toml::Table) -> anyhow::Result<A> {
    if table.is_empty() {
        return Ok(args);
    }
    let mut value = serde_json::to_value(&args)?;
    let fields = value.as_object_mut().expect("argument structs serialize to maps");
    for (key, v) in table {
        let key = key.replace('-', "_");
        if !fields.contains_key(&key) {
            return Err(Usage::new(format!("config key '{key}' does not apply to this command")).into());
        }
        fields.insert(key, serde_json::to_value(v)?);
    }
    serde_json::from_value(value).map_err(|e| Usage::new(format!("config: {e}")).into())
}

/// A mesh file if `spec` names an existing path, else a synthetic spec.
pub fn mesh(spec: &str) -> anyhow::Result<TriMesh64> {
    let path = Path::new(spec);
    if !path.exists() {
        if let Ok(kind) = spec.parse::<SyntheticKind>() {
            return Ok(make_synthetic(kind)?);
        }
    }
    let format = MeshFormat::from_path(path)?;
    Ok(load_mesh(path, format)?)
}

pub fn require_file(path: &Path) -> anyhow::Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Usage::new(format!("{}: no such file", path.display())).into())
    }
}

pub fn ensure_dir(path: &Path) -> anyhow::Result<PathBuf> {
    std::fs::create_dir_all(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(path.to_path_buf())
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

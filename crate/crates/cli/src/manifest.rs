use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

/// Provenance record written next to every primary output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Fully resolved arguments, enough to re-run the command.
    pub config: serde_json::Value,
    pub precision_bits: u32,
    pub tool_version: String,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub wall_clock_seconds: f64,
}

impl RunManifest {
    pub fn path_for(out: &Path) -> PathBuf {
        let mut name = out.as_os_str().to_owned();
        name.push(".manifest.json");
        PathBuf::from(name)
    }

    pub fn write(&self, out: &Path) -> Result<PathBuf> {
        let path = Self::path_for(out);
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(&path, text + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Ok(serde_json::from_str(&text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_roundtrip() {
        let m = RunManifest {
            command: "radius".into(),
            config: serde_json::json!({"theta": "golden", "n": 100}),
            precision_bits: 256,
            tool_version: "0.1.0".into(),
            inputs: vec![],
            outputs: vec!["/tmp/r.json".into()],
            wall_clock_seconds: 0.25,
        };
        let text = serde_json::to_string(&m).unwrap();
        assert_eq!(serde_json::from_str::<RunManifest>(&text).unwrap(), m);
        assert_eq!(
            RunManifest::path_for(Path::new("/a/b.csv")),
            PathBuf::from("/a/b.csv.manifest.json")
        );
    }
}

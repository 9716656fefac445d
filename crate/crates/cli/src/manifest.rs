//! Output-directory bookkeeping: every file written by a run is hashed and
//! listed in `manifest.json`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

pub const MANIFEST_NAME: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OutputRecord {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FixtureRecord {
    pub name: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Timings {
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub config: serde_json::Value,
    pub fixtures: Vec<FixtureRecord>,
    pub outputs: Vec<OutputRecord>,
    /// `null` unless timings were requested, so that manifests of
    /// identical runs compare equal byte for byte.
    pub timings: Option<Timings>,
}

/// Writes files below one directory and remembers what was written.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    records: Vec<OutputRecord>,
}

impl OutputDir {
    pub fn create(root: &Path) -> std::io::Result<Self> {
        fs::create_dir_all(root)?;
        Ok(Self { root: root.to_path_buf(), records: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, name: &str, contents: &[u8]) -> std::io::Result<()> {
        assert_ne!(name, MANIFEST_NAME, "manifest is written by finish()");
        fs::write(self.root.join(name), contents)?;
        self.records.retain(|r| r.path != name);
        self.records.push(OutputRecord {
            path: name.to_string(),
            bytes: contents.len() as u64,
            sha256: sha256_hex(contents),
        });
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> std::io::Result<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    /// Sorts the output list and writes the manifest next to the outputs.
    pub fn finish(mut self, mut manifest: RunManifest) -> std::io::Result<RunManifest> {
        self.records.sort_by(|a, b| a.path.cmp(&b.path));
        manifest.outputs = self.records;
        manifest.fixtures.sort_by(|a, b| a.name.cmp(&b.name));
        let mut text = serde_json::to_string_pretty(&manifest).map_err(std::io::Error::other)?;
        text.push('\n');
        fs::write(self.root.join(MANIFEST_NAME), text)?;
        Ok(manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_of_abc() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn outputs_are_sorted_and_deduplicated() {
        let dir = std::env::temp_dir().join(format!("cqm-manifest-{}", std::process::id()));
        let mut out = OutputDir::create(&dir).unwrap();
        out.write("b.csv", b"1").unwrap();
        out.write("a.csv", b"22").unwrap();
        out.write("b.csv", b"333").unwrap();
        let m = RunManifest {
            command: "t".into(),
            version: "0".into(),
            seed: 0,
            config: serde_json::Value::Null,
            fixtures: vec![],
            outputs: vec![],
            timings: None,
        };
        let m = out.finish(m).unwrap();
        let names: Vec<_> = m.outputs.iter().map(|r| (r.path.as_str(), r.bytes)).collect();
        assert_eq!(names, [("a.csv", 2), ("b.csv", 3)]);
        let text = fs::read_to_string(dir.join(MANIFEST_NAME)).unwrap();
        assert!(text.contains("\"timings\": null"));
        fs::remove_dir_all(dir).unwrap();
    }
}

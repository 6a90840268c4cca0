//! Output directory with a sha-256 manifest.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

pub const MANIFEST: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub files: Vec<Entry>,
}

pub enum PrepareError {
    Foreign(Vec<String>),
    Io(String),
}

pub struct Output {
    dir: PathBuf,
    files: Vec<Entry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn io(e: std::io::Error, p: &Path) -> String {
    format!("{}: {e}", p.display())
}

impl Output {
    /// Creates `dir`, or clears the files of an earlier run listed in its
    /// manifest. Files not listed there are left alone and refused.
    pub fn prepare(dir: &Path) -> Result<Output, PrepareError> {
        std::fs::create_dir_all(dir).map_err(|e| PrepareError::Io(io(e, dir)))?;
        let old: Vec<String> = match std::fs::read_to_string(dir.join(MANIFEST)) {
            Ok(text) => serde_json::from_str::<Manifest>(&text)
                .map(|m| m.files.into_iter().map(|f| f.path).collect())
                .unwrap_or_default(),
            Err(_) => Vec::new(),
        };
        let mut foreign = Vec::new();
        let entries = std::fs::read_dir(dir).map_err(|e| PrepareError::Io(io(e, dir)))?;
        for entry in entries {
            let entry = entry.map_err(|e| PrepareError::Io(io(e, dir)))?;
            let name = entry.file_name().to_string_lossy().into_owned();
            if name != MANIFEST && !old.contains(&name) {
                foreign.push(name);
            }
        }
        if !foreign.is_empty() {
            foreign.sort();
            return Err(PrepareError::Foreign(foreign));
        }
        for name in old.iter().map(String::as_str).chain([MANIFEST]) {
            let p = dir.join(name);
            if p.is_file() {
                std::fs::remove_file(&p).map_err(|e| PrepareError::Io(io(e, &p)))?;
            }
        }
        Ok(Output { dir: dir.to_path_buf(), files: Vec::new() })
    }

    pub fn write(&mut self, name: &str, contents: &[u8]) -> Result<(), String> {
        let p = self.dir.join(name);
        std::fs::write(&p, contents).map_err(|e| io(e, &p))?;
        self.files.push(Entry { path: name.to_string(), sha256: sha256_hex(contents), bytes: contents.len() });
        Ok(())
    }

    pub fn write_json(&mut self, name: &str, value: &serde_json::Value) -> Result<(), String> {
        let mut s = serde_json::to_string_pretty(value).map_err(|e| e.to_string())?;
        s.push('\n');
        self.write(name, s.as_bytes())
    }

    pub fn finish(self, command: &str) -> Result<Manifest, String> {
        let m = Manifest {
            tool: "jostkit".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            files: self.files,
        };
        let mut s = serde_json::to_string_pretty(&m).map_err(|e| e.to_string())?;
        s.push('\n');
        let p = self.dir.join(MANIFEST);
        std::fs::write(&p, s).map_err(|e| io(e, &p))?;
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}

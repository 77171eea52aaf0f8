//! Output provenance: header lines, config sidecars, and guards against
//! overwriting inputs.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use crate::options::Effective;

/// Comment lines placed at the top of every output file.
pub fn header(command: &str, seed: u64) -> Vec<String> {
    vec![format!(
        "mnd {} {command} seed={seed}",
        env!("CARGO_PKG_VERSION")
    )]
}

/// `<path>.config`: the header followed by every effective setting.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".config");
    PathBuf::from(s)
}

pub fn write_sidecar(path: &Path, header: &[String], eff: &Effective) -> Result<()> {
    let side = sidecar_path(path);
    let mut text = String::new();
    for h in header {
        text.push_str(&format!("# {h}\n"));
    }
    for (k, v) in eff.entries() {
        text.push_str(&format!("{k}={v}\n"));
    }
    let mut f =
        fs::File::create(&side).with_context(|| format!("cannot create {}", side.display()))?;
    f.write_all(text.as_bytes())
        .with_context(|| format!("cannot write {}", side.display()))
}

/// Output directory handling for one invocation.
pub struct OutDir {
    dir: PathBuf,
    inputs: Vec<PathBuf>,
}

impl OutDir {
    /// Creates `dir` if needed. `inputs` are never handed out as outputs.
    pub fn create(dir: &Path, inputs: &[&Path]) -> Result<Self> {
        fs::create_dir_all(dir)
            .with_context(|| format!("cannot create output directory {}", dir.display()))?;
        let inputs = inputs
            .iter()
            .filter_map(|p| fs::canonicalize(p).ok())
            .collect();
        Ok(OutDir {
            dir: dir.to_path_buf(),
            inputs,
        })
    }

    /// Path of output `name`, refusing any that would replace an input file
    /// (directly or through its sidecar).
    pub fn file(&self, name: &str) -> Result<PathBuf> {
        let path = self.dir.join(name);
        for candidate in [path.clone(), sidecar_path(&path)] {
            if let Ok(c) = fs::canonicalize(&candidate) {
                if self.inputs.contains(&c) {
                    bail!("refusing to overwrite input file {}", candidate.display());
                }
            }
        }
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inputs_are_protected() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("scores.csv");
        fs::write(&input, "x").unwrap();
        let out = OutDir::create(dir.path(), &[&input]).unwrap();
        assert!(out.file("scores.csv").is_err());
        assert!(out.file("roc.csv").is_ok());
    }

    #[test]
    fn header_names_version_and_seed() {
        let h = header("train", 7);
        assert_eq!(h.len(), 1);
        assert!(h[0].starts_with("mnd ") && h[0].ends_with("train seed=7"));
    }
}

//! Output staging and the run manifest.
//!
//! Commands never write directly: they stage every artifact's bytes in
//! memory, and a single [`Outputs::commit`] call at the end writes them all
//! via temp-file + rename. A failed run therefore leaves no partial outputs,
//! and a failure halfway through the commit removes the files already
//! renamed into place. The manifest (command line, resolved config, seed,
//! input digests, output list, wall time) lands next to the outputs; wall
//! time is the only thing in any artifact that varies between identical
//! reruns.

use anyhow::{bail, Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Where outputs land.
///
/// `--out results/` is directory mode: artifacts keep their canonical names
/// (`dataset.csv`, `report.json`, ...) inside `results/`, next to
/// `manifest.json`. `--out name.csv` (or `.json`) is file mode: the artifact
/// matching the extension lands at exactly that path and every sibling
/// artifact derives its name from the stem — `name.json`, `name.topk.csv`,
/// `name.manifest.json`.
pub struct OutPlan {
    dir: PathBuf,
    /// File mode: the `--out` path itself and its stem.
    file: Option<(PathBuf, String)>,
}

impl OutPlan {
    pub fn new(out: &Path) -> Result<Self> {
        let ext = out.extension().and_then(|e| e.to_str());
        if matches!(ext, Some("csv") | Some("json")) {
            let dir = match out.parent() {
                Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
                _ => PathBuf::from("."),
            };
            std::fs::create_dir_all(&dir)
                .with_context(|| format!("creating output directory {}", dir.display()))?;
            let stem = out
                .file_stem()
                .and_then(|s| s.to_str())
                .map(str::to_string)
                .unwrap_or_else(|| "out".into());
            Ok(OutPlan { dir, file: Some((out.to_path_buf(), stem)) })
        } else {
            std::fs::create_dir_all(out)
                .with_context(|| format!("creating output directory {}", out.display()))?;
            Ok(OutPlan { dir: out.to_path_buf(), file: None })
        }
    }

    /// Path for the artifact with extension `ext`: the `--out` path itself
    /// when its extension matches, `stem.ext` next to it otherwise, and
    /// `default_name` in directory mode.
    pub fn path_for(&self, ext: &str, default_name: &str) -> PathBuf {
        match &self.file {
            Some((path, stem)) => {
                if path.extension().and_then(|e| e.to_str()) == Some(ext) {
                    path.clone()
                } else {
                    self.dir.join(format!("{stem}.{ext}"))
                }
            }
            None => self.dir.join(default_name),
        }
    }

    /// Path for a secondary artifact: `stem.tag` in file mode, `default_name`
    /// in directory mode.
    pub fn sibling(&self, tag: &str, default_name: &str) -> PathBuf {
        match &self.file {
            Some((_, stem)) => self.dir.join(format!("{stem}.{tag}")),
            None => self.dir.join(default_name),
        }
    }

    fn manifest_path(&self) -> PathBuf {
        self.sibling("manifest.json", "manifest.json")
    }
}

#[derive(Clone, Serialize)]
struct InputDigest {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct RunManifest {
    command: String,
    argv: Vec<String>,
    config: serde_json::Value,
    seed: u64,
    version: String,
    inputs: Vec<InputDigest>,
    outputs: Vec<String>,
    wall_time_seconds: f64,
}

/// Staged artifacts for one command run.
pub struct Outputs {
    pub plan: OutPlan,
    staged: Vec<(PathBuf, Vec<u8>)>,
    inputs: Vec<InputDigest>,
    started: Instant,
}

impl Outputs {
    pub fn new(out: &Path) -> Result<Self> {
        Ok(Outputs {
            plan: OutPlan::new(out)?,
            staged: Vec::new(),
            inputs: Vec::new(),
            started: Instant::now(),
        })
    }

    /// Record an input file's SHA-256 digest in the manifest.
    pub fn record_input(&mut self, path: &Path) -> Result<()> {
        let bytes = std::fs::read(path)
            .with_context(|| format!("reading input {}", path.display()))?;
        let digest = Sha256::digest(&bytes);
        let sha256: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        self.inputs.push(InputDigest { path: path.display().to_string(), sha256 });
        Ok(())
    }

    /// Queue one artifact for the commit.
    pub fn stage(&mut self, path: PathBuf, bytes: impl Into<Vec<u8>>) {
        self.staged.push((path, bytes.into()));
    }

    /// Write every staged artifact plus the manifest via temp-file + rename.
    /// On any failure the files renamed so far are removed again.
    pub fn commit(self, command: &str, seed: u64, config: serde_json::Value) -> Result<()> {
        for (i, (path, _)) in self.staged.iter().enumerate() {
            if self.staged[..i].iter().any(|(other, _)| other == path) {
                bail!("two outputs resolve to the same path {}", path.display());
            }
        }
        let manifest = RunManifest {
            command: command.to_string(),
            argv: std::env::args().collect(),
            config,
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            inputs: self.inputs.clone(),
            outputs: self
                .staged
                .iter()
                .map(|(p, _)| file_name(p))
                .collect(),
            wall_time_seconds: self.started.elapsed().as_secs_f64(),
        };
        let manifest_bytes = serde_json::to_vec_pretty(&manifest)?;
        let manifest_path = self.plan.manifest_path();

        let mut written: Vec<PathBuf> = Vec::new();
        let mut write_all = || -> Result<()> {
            for (path, bytes) in &self.staged {
                atomic_write(path, bytes)?;
                written.push(path.clone());
            }
            atomic_write(&manifest_path, &manifest_bytes)?;
            written.push(manifest_path.clone());
            Ok(())
        };
        if let Err(e) = write_all() {
            for path in &written {
                let _ = std::fs::remove_file(path);
            }
            return Err(e);
        }
        Ok(())
    }
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Write to a dot-prefixed temp file in the target directory, then rename
/// into place so readers never see a half-written artifact.
fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let tmp = dir.join(format!(".{}.tmp-{}", file_name(path), std::process::id()));
    std::fs::write(&tmp, bytes)
        .with_context(|| format!("writing {}", tmp.display()))?;
    if let Err(e) = std::fs::rename(&tmp, path) {
        let _ = std::fs::remove_file(&tmp);
        return Err(e).with_context(|| format!("renaming into {}", path.display()));
    }
    Ok(())
}

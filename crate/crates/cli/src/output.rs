//! Path resolution, atomic writes and run manifests.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

/// A problem with the invocation itself rather than with the data; the
/// process exits with status 1.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
struct FileDigest {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: String,
    command: &'a str,
    args: &'a [String],
    seed: Option<u64>,
    config: &'a serde_json::Value,
    inputs: &'a [FileDigest],
    outputs: &'a [FileDigest],
}

/// Book-keeping for one subcommand run: resolves paths, fingerprints what
/// was read and written, and emits the manifests.
pub struct Run {
    command: &'static str,
    args: Vec<String>,
    data_dir: Option<PathBuf>,
    seed: Option<u64>,
    config: serde_json::Value,
    inputs: Vec<FileDigest>,
    outputs: Vec<(PathBuf, FileDigest)>,
}

impl Run {
    pub fn new(command: &'static str, args: Vec<String>, data_dir: Option<PathBuf>) -> Self {
        Run {
            command,
            args,
            data_dir,
            seed: None,
            config: serde_json::Value::Null,
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn set_config(&mut self, config: &impl Serialize, seed: Option<u64>) -> Result<()> {
        self.config = serde_json::to_value(config)?;
        self.seed = seed;
        Ok(())
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        match &self.data_dir {
            Some(dir) if path.is_relative() => dir.join(path),
            _ => path.to_path_buf(),
        }
    }

    /// Fails with a usage error unless every input exists and every output
    /// lands in an existing directory. Runs before any computation.
    pub fn validate_paths(&self, inputs: &[&Path], outputs: &[&Path]) -> Result<()> {
        for p in inputs {
            let r = self.resolve(p);
            if !r.is_file() {
                return Err(usage(format!("input file not found: {}", r.display())));
            }
        }
        for p in outputs {
            let r = self.resolve(p);
            let parent = r.parent().filter(|d| !d.as_os_str().is_empty());
            if let Some(dir) = parent {
                if !dir.is_dir() {
                    return Err(usage(format!(
                        "output directory does not exist: {}",
                        dir.display()
                    )));
                }
            }
            if inputs.iter().any(|i| self.resolve(i) == r) {
                return Err(usage(format!(
                    "refusing to overwrite input file {}",
                    r.display()
                )));
            }
        }
        Ok(())
    }

    pub fn read(&mut self, path: &Path) -> Result<Vec<u8>> {
        let resolved = self.resolve(path);
        let bytes = std::fs::read(&resolved)
            .with_context(|| format!("reading {}", resolved.display()))?;
        self.inputs.push(FileDigest {
            path: path.display().to_string(),
            sha256: sha256_hex(&bytes),
        });
        Ok(bytes)
    }

    pub fn read_string(&mut self, path: &Path) -> Result<String> {
        let bytes = self.read(path)?;
        String::from_utf8(bytes).with_context(|| format!("{} is not UTF-8", path.display()))
    }

    pub fn write(&mut self, path: &Path, bytes: &[u8]) -> Result<()> {
        let resolved = self.resolve(path);
        write_atomic(&resolved, bytes)?;
        self.outputs.push((
            resolved,
            FileDigest {
                path: path.display().to_string(),
                sha256: sha256_hex(bytes),
            },
        ));
        Ok(())
    }

    /// Writes `<output>.manifest.json` beside every output of the run.
    pub fn finish(self) -> Result<()> {
        let outputs: Vec<FileDigest> = self.outputs.iter().map(|(_, d)| d.clone()).collect();
        let manifest = Manifest {
            tool: format!("sentimarket {}", env!("CARGO_PKG_VERSION")),
            command: self.command,
            args: &self.args,
            seed: self.seed,
            config: &self.config,
            inputs: &self.inputs,
            outputs: &outputs,
        };
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        for (resolved, _) in &self.outputs {
            let mut name = resolved.clone().into_os_string();
            name.push(".manifest.json");
            write_atomic(Path::new(&name), text.as_bytes())?;
        }
        Ok(())
    }
}

/// Writes through a temporary file in the destination directory and renames
/// it into place, so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let mut tmp = tempfile::Builder::new()
        .prefix(".sentimarket-")
        .tempfile_in(dir)
        .with_context(|| format!("creating a temporary file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        tmp.as_file()
            .set_permissions(std::fs::Permissions::from_mode(0o644))?;
    }
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

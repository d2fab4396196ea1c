use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Context, Failure, Outcome};

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest.iter() {
        let _ = write!(out, "{b:02x}");
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

impl FileDigest {
    fn of(path: &Path, bytes: &[u8]) -> Self {
        Self { path: path.display().to_string(), sha256: sha256_hex(bytes), bytes: bytes.len() }
    }
}

#[derive(Debug, Serialize)]
struct Manifest<'a, C> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    config: &'a C,
    config_sha256: String,
    seeds: &'a [u64],
    threads: usize,
    inputs: &'a [FileDigest],
    outputs: &'a [FileDigest],
}

/// Tracks every file a command reads or writes.
#[derive(Debug)]
pub struct Recorder {
    command: &'static str,
    inputs: Vec<FileDigest>,
    outputs: Vec<FileDigest>,
    seeds: Vec<u64>,
}

impl Recorder {
    pub fn new(command: &'static str) -> Self {
        Self { command, inputs: Vec::new(), outputs: Vec::new(), seeds: Vec::new() }
    }

    pub fn read(&mut self, path: &Path) -> Outcome<String> {
        let bytes = std::fs::read(path).runtime(format!("reading {}", path.display()))?;
        self.inputs.push(FileDigest::of(path, &bytes));
        String::from_utf8(bytes).invalid(format!("{} is not UTF-8 text", path.display()))
    }

    pub fn write(&mut self, path: &Path, contents: &str) -> Outcome<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).runtime(format!("creating {}", dir.display()))?;
        }
        std::fs::write(path, contents).runtime(format!("writing {}", path.display()))?;
        self.outputs.push(FileDigest::of(path, contents.as_bytes()));
        Ok(())
    }

    pub fn seed(&mut self, seed: u64) {
        if !self.seeds.contains(&seed) {
            self.seeds.push(seed);
        }
    }

    /// Writes the manifest. The config hash covers the command name and
    /// the fully resolved settings.
    pub fn finish<C: Serialize>(self, config: &C, threads: usize, path: &Path) -> Outcome<PathBuf> {
        let canonical = serde_json::to_vec(&(self.command, config)).map_err(Failure::runtime)?;
        let m = Manifest {
            tool: "causeway",
            version: env!("CARGO_PKG_VERSION"),
            command: self.command,
            config,
            config_sha256: sha256_hex(&canonical),
            seeds: &self.seeds,
            threads,
            inputs: &self.inputs,
            outputs: &self.outputs,
        };
        let mut text = serde_json::to_string_pretty(&m).map_err(Failure::runtime)?;
        text.push('\n');
        std::fs::write(path, text).runtime(format!("writing {}", path.display()))?;
        Ok(path.to_path_buf())
    }
}

/// `<file>.manifest.json` next to a file output.
pub fn beside(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}

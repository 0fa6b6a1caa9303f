use std::path::Path;
use std::time::Duration;

use anyhow::Context;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::commands::inputs;
use crate::Cli;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FileHash {
    pub path: String,
    pub sha256: String,
}

/// Enough to re-run a command and check that its report is unchanged.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Arguments after the program name, without `--manifest`.
    pub argv: Vec<String>,
    pub inputs: Vec<FileHash>,
    pub tool_version: String,
    pub output: FileHash,
    pub wall_seconds: f64,
}

pub fn sha256_bytes(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> anyhow::Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(sha256_bytes(&bytes))
}

fn strip_manifest(argv: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    let mut skip = false;
    for a in argv.iter().skip(1) {
        if skip {
            skip = false;
        } else if a == "--manifest" {
            skip = true;
        } else if !a.starts_with("--manifest=") {
            out.push(a.clone());
        }
    }
    out
}

impl RunManifest {
    pub fn new(argv: &[String], cli: &Cli, report: &[u8], wall: Duration) -> anyhow::Result<Self> {
        let inputs = inputs(&cli.command)
            .into_iter()
            .map(|p| Ok(FileHash { sha256: sha256_file(&p)?, path: p.display().to_string() }))
            .collect::<anyhow::Result<Vec<_>>>()?;
        let command = argv
            .iter()
            .skip(1)
            .find(|a| !a.starts_with('-'))
            .cloned()
            .unwrap_or_default();
        let out_path = cli.global.out.as_ref().map_or("-".to_string(), |p| p.display().to_string());
        Ok(RunManifest {
            command,
            argv: strip_manifest(argv),
            inputs,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            output: FileHash { path: out_path, sha256: sha256_bytes(report) },
            wall_seconds: wall.as_secs_f64(),
        })
    }

    pub fn write(&self, path: &Path) -> anyhow::Result<()> {
        let text = serde_json::to_string_pretty(self)? + "\n";
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
    }

    pub fn read(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Ok(serde_json::from_str(&text).map_err(|e| qjets::Error::Parse(format!("manifest: {e}")))?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_flag_is_dropped() {
        let argv: Vec<String> =
            ["qjets", "check", "q.json", "--manifest", "m.json", "--dim", "1", "--manifest=x"].map(String::from).to_vec();
        assert_eq!(strip_manifest(&argv), vec!["check", "q.json", "--dim", "1"]);
    }
}

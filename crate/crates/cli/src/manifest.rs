//! Flat `key=value` run manifests.

use std::path::{Path, PathBuf};

use crate::error::CliError;

pub const FILE_NAME: &str = "manifest.txt";

/// Everything needed to repeat a run: the working directory, the arguments as
/// given, and the resolved inputs and configuration for reading.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub cwd: PathBuf,
    pub args: Vec<String>,
    pub entries: Vec<(String, String)>,
}

impl RunManifest {
    pub fn new(command: &str, cwd: PathBuf, args: Vec<String>) -> Self {
        Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            cwd,
            args,
            entries: Vec::new(),
        }
    }

    pub fn set(&mut self, key: impl Into<String>, value: impl ToString) {
        self.entries.push((key.into(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("command={}\nversion={}\ncwd={}\n", self.command, self.version, self.cwd.display());
        for a in &self.args {
            out.push_str(&format!("arg={a}\n"));
        }
        for (k, v) in &self.entries {
            out.push_str(&format!("{k}={}\n", v.replace('\n', " ")));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut command = None;
        let mut version = None;
        let mut cwd = None;
        let mut args = Vec::new();
        let mut entries = Vec::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::input(format!("manifest line {}: expected key=value", n + 1)))?;
            match k {
                "command" => command = Some(v.to_string()),
                "version" => version = Some(v.to_string()),
                "cwd" => cwd = Some(PathBuf::from(v)),
                "arg" => args.push(v.to_string()),
                _ => entries.push((k.to_string(), v.to_string())),
            }
        }
        let missing = |what: &str| CliError::input(format!("manifest has no `{what}` line"));
        Ok(Self {
            command: command.ok_or_else(|| missing("command"))?,
            version: version.ok_or_else(|| missing("version"))?,
            cwd: cwd.ok_or_else(|| missing("cwd"))?,
            args,
            entries,
        })
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        crate::commands::write_file(&dir.join(FILE_NAME), &self.to_text())
    }
}

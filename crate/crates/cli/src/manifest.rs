//! Provenance records written next to every output.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};
use mlnoise::MlParams;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamsRecord {
    pub c: f64,
    pub lambda: f64,
    pub tau: f64,
}

impl From<&MlParams> for ParamsRecord {
    fn from(p: &MlParams) -> Self {
        Self {
            c: p.c(),
            lambda: p.lambda(),
            tau: p.tau(),
        }
    }
}

/// Everything needed to rerun a command and reproduce its output bit for bit
/// with the same build.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<ParamsRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tmax: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_opt: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimator: Option<String>,
    /// UTC time of the run; only in the sidecar so file contents stay reproducible.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            params: None,
            n: None,
            t: None,
            tmax: None,
            dt: None,
            seed: None,
            t_opt: None,
            format: None,
            input: None,
            kind: None,
            estimator: None,
            timestamp: None,
        }
    }

    pub fn stamped(mut self) -> Self {
        self.timestamp = Some(Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true));
        self
    }

    /// `# key: value` lines for embedding in CSV output; the timestamp is left
    /// out so repeated runs write identical files.
    pub fn header_lines(&self) -> Vec<String> {
        let mut lines = vec![format!("# mlnoise {} {}", self.tool_version, self.command)];
        let mut push = |key: &str, value: Option<String>| {
            if let Some(v) = value {
                lines.push(format!("# {key}: {v}"));
            }
        };
        if let Some(p) = &self.params {
            push("c", Some(p.c.to_string()));
            push("lambda", Some(p.lambda.to_string()));
            push("tau", Some(p.tau.to_string()));
        }
        push("n", self.n.map(|v| v.to_string()));
        push("t", self.t.map(|v| v.to_string()));
        push("tmax", self.tmax.map(|v| v.to_string()));
        push("dt", self.dt.map(|v| v.to_string()));
        push("seed", self.seed.map(|v| v.to_string()));
        push("t_opt", self.t_opt.map(|v| v.to_string()));
        push("format", self.format.clone());
        push("input", self.input.clone());
        push("kind", self.kind.clone());
        push("estimator", self.estimator.clone());
        lines
    }

    /// Path of the sidecar that accompanies `output`.
    pub fn sidecar_path(output: &Path) -> PathBuf {
        let mut name = output.as_os_str().to_owned();
        name.push(".manifest.json");
        PathBuf::from(name)
    }

    pub fn write_sidecar(&self, output: &Path) -> io::Result<PathBuf> {
        let path = Self::sidecar_path(output);
        let mut text = serde_json::to_string_pretty(self).map_err(io::Error::other)?;
        text.push('\n');
        fs::write(&path, text)?;
        Ok(path)
    }

    pub fn read(path: &Path) -> io::Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
    }
}

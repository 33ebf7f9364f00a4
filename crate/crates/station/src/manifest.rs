//! Run manifests: everything needed to repeat a flight, written next to its log.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CliError, ErrorClass};

pub const GIT_DESCRIBE: &str = env!("SG_GIT_DESCRIBE");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Sim,
    Live,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Scripted,
    Remote,
}

/// Link counters from a live run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkSummary {
    pub robot_url: String,
    pub frames_received: u64,
    pub commands_sent: u64,
    pub protocol_violations: u64,
    /// Sequence stamp of each frame a decision was made on, in order.
    pub frame_seqs: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub mode: Mode,
    pub persona_path: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub env_path: Option<String>,
    pub backend: Backend,
    pub duration_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_decisions: Option<usize>,
    pub seed: u64,
    pub out_log_path: String,
    pub started_at: String,
    pub finished_at: String,
    pub git_describe: String,
    pub records: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub link: Option<LinkSummary>,
}

impl RunManifest {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            let class = if e.kind() == std::io::ErrorKind::NotFound {
                ErrorClass::ConfigNotFound
            } else {
                ErrorClass::ConfigInvalid
            };
            CliError::new(class, format!("{}: {e}", path.display()))
        })?;
        serde_json::from_str(&text).map_err(|e| {
            CliError::new(
                ErrorClass::ConfigInvalid,
                format!("{}: {e}", path.display()),
            )
        })
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(self).expect("manifests serialize");
        text.push('\n');
        std::fs::write(path, text)
            .map_err(|e| CliError::new(ErrorClass::Io, format!("{}: {e}", path.display())))
    }
}

pub fn now_rfc3339() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

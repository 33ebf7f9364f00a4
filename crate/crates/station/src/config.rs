//! Persona and environment files.
//!
//! A config argument is either a path to a TOML file or the name of a
//! bundled preset, optionally written `preset:NAME`. An existing file
//! always wins over a preset of the same name.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sg_core::sim::Environment;
use sg_core::{PersonaSpec, ScriptedPolicyParams, Voice};

use crate::error::{CliError, ErrorClass};

pub const DEFAULT_API_KEY_ENV: &str = "SG_MLLM_API_KEY";

/// Bundled personas as (name, TOML source).
pub const PERSONA_PRESETS: [(&str, &str); 4] = [
    ("gentle-cloud", include_str!("../presets/gentle-cloud.toml")),
    (
        "eager-companion",
        include_str!("../presets/eager-companion.toml"),
    ),
    (
        "cautious-observer",
        include_str!("../presets/cautious-observer.toml"),
    ),
    (
        "indifferent-explorer",
        include_str!("../presets/indifferent-explorer.toml"),
    ),
];

/// The three personas compared in the validation study, in table order.
pub const STUDY_PERSONAS: [&str; 3] = [
    "eager-companion",
    "cautious-observer",
    "indifferent-explorer",
];

/// Remote chat-completion backend settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RemoteConfig {
    pub base_url: String,
    pub model: String,
    #[serde(default = "default_key_env")]
    pub api_key_env: String,
    #[serde(default = "default_timeout")]
    pub timeout_s: f64,
    #[serde(default)]
    pub frame: FrameConfig,
}

fn default_key_env() -> String {
    DEFAULT_API_KEY_ENV.to_string()
}

fn default_timeout() -> f64 {
    30.0
}

/// How a camera frame is encoded before it goes to a model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FrameConfig {
    pub width: u32,
    pub height: u32,
    pub jpeg_quality: u8,
}

impl Default for FrameConfig {
    fn default() -> Self {
        Self {
            width: 640,
            height: 480,
            jpeg_quality: 80,
        }
    }
}

/// On-disk persona: the core spec plus an optional remote section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PersonaFile {
    pub id: String,
    #[serde(default)]
    pub voice: Voice,
    pub preamble_prompt: String,
    pub directional_prompt: String,
    pub policy: ScriptedPolicyParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub remote: Option<RemoteConfig>,
}

impl PersonaFile {
    pub fn spec(&self) -> PersonaSpec {
        PersonaSpec {
            id: self.id.clone(),
            voice: self.voice,
            preamble_prompt: self.preamble_prompt.clone(),
            directional_prompt: self.directional_prompt.clone(),
            policy: self.policy.clone(),
        }
    }

    pub fn parse(src: &str, origin: &str) -> Result<Self, CliError> {
        let file: PersonaFile = toml::from_str(src)
            .map_err(|e| CliError::new(ErrorClass::ConfigInvalid, format!("{origin}: {e}")))?;
        file.spec()
            .validate()
            .map_err(|e| CliError::new(ErrorClass::ConfigInvalid, format!("{origin}: {e}")))?;
        if let Some(r) = &file.remote {
            if !(r.timeout_s > 0.0)
                || r.frame.width == 0
                || r.frame.height == 0
                || r.frame.jpeg_quality == 0
            {
                return Err(CliError::new(
                    ErrorClass::ConfigInvalid,
                    format!("{origin}: remote timeout, frame size and quality must be positive"),
                ));
            }
        }
        Ok(file)
    }
}

fn preset_name(arg: &str) -> &str {
    arg.strip_prefix("preset:").unwrap_or(arg)
}

pub fn persona_preset(name: &str) -> Option<&'static str> {
    PERSONA_PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, src)| *src)
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| {
        let class = if e.kind() == std::io::ErrorKind::NotFound {
            ErrorClass::ConfigNotFound
        } else {
            ErrorClass::ConfigInvalid
        };
        CliError::new(class, format!("{}: {e}", path.display()))
    })
}

pub fn load_persona(arg: &str) -> Result<PersonaFile, CliError> {
    let path = Path::new(arg);
    if !arg.starts_with("preset:") && path.exists() {
        return PersonaFile::parse(&read_file(path)?, arg);
    }
    match persona_preset(preset_name(arg)) {
        Some(src) => PersonaFile::parse(src, arg),
        None => Err(CliError::new(
            ErrorClass::ConfigNotFound,
            format!("{arg}: no such file or persona preset"),
        )),
    }
}

pub fn parse_environment(src: &str, origin: &str) -> Result<Environment, CliError> {
    let env: Environment = toml::from_str(src)
        .map_err(|e| CliError::new(ErrorClass::ConfigInvalid, format!("{origin}: {e}")))?;
    env.validate()
        .map_err(|e| CliError::new(ErrorClass::ConfigInvalid, format!("{origin}: {e}")))?;
    Ok(env)
}

pub fn load_environment(arg: &str) -> Result<Environment, CliError> {
    let path = Path::new(arg);
    if !arg.starts_with("preset:") && path.exists() {
        return parse_environment(&read_file(path)?, arg);
    }
    Environment::preset(preset_name(arg)).ok_or_else(|| {
        CliError::new(
            ErrorClass::ConfigNotFound,
            format!("{arg}: no such file or environment preset"),
        )
    })
}

pub fn environment_toml(env: &Environment) -> String {
    toml::to_string_pretty(env).expect("environments serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse() {
        for (name, src) in PERSONA_PRESETS {
            let p = PersonaFile::parse(src, name).unwrap();
            assert_eq!(p.id, name);
            assert!(p.remote.is_none());
        }
    }

    #[test]
    fn prompt_closing_quote_survives() {
        let p = load_persona("preset:gentle-cloud").unwrap();
        assert!(p
            .directional_prompt
            .ends_with("Example: `f,Towards the big window.'"));
        assert!(p
            .preamble_prompt
            .starts_with("You are the navigation AI for a small, autonomous flying robot that \n"));
        assert!(p
            .preamble_prompt
            .ends_with("to decide on your immediate movements."));
    }

    #[test]
    fn study_parameters() {
        let rates: Vec<f64> = STUDY_PERSONAS
            .iter()
            .map(|n| load_persona(n).unwrap().policy.approach_human_prob)
            .collect();
        assert_eq!(rates, [0.88, 0.05, 0.111]);
    }

    #[test]
    fn missing_and_invalid() {
        let e = load_persona("/nonexistent/companion.toml").unwrap_err();
        assert_eq!(e.class, ErrorClass::ConfigNotFound);
        let e = PersonaFile::parse("id = 3", "x").unwrap_err();
        assert_eq!(e.class, ErrorClass::ConfigInvalid);
        let bad = persona_preset("gentle-cloud")
            .unwrap()
            .replace("stop_prob = 0.1", "stop_prob = 2.0");
        assert_eq!(
            PersonaFile::parse(&bad, "x").unwrap_err().class,
            ErrorClass::ConfigInvalid
        );
        let extra = format!(
            "{}\nsurprise = 1\n",
            persona_preset("gentle-cloud").unwrap()
        );
        assert!(PersonaFile::parse(&extra, "x").is_err());
    }

    #[test]
    fn remote_section_defaults() {
        let src = format!(
            "{}\n[remote]\nbase_url = \"http://localhost:1\"\nmodel = \"m\"\n",
            persona_preset("gentle-cloud").unwrap()
        );
        let p = PersonaFile::parse(&src, "x").unwrap();
        let r = p.remote.unwrap();
        assert_eq!(r.api_key_env, DEFAULT_API_KEY_ENV);
        assert_eq!(r.frame, FrameConfig::default());
        assert_eq!((r.frame.width, r.frame.height), (640, 480));
    }

    #[test]
    fn environments_round_trip_through_toml() {
        for name in Environment::PRESETS {
            let env = load_environment(name).unwrap();
            let back = parse_environment(&environment_toml(&env), name).unwrap();
            assert_eq!(back, env);
        }
        assert_eq!(
            load_environment("nowhere").unwrap_err().class,
            ErrorClass::ConfigNotFound
        );
    }
}

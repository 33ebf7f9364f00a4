use alloc::string::String;

use serde::{Deserialize, Serialize};

/// Knobs of the deterministic scripted pilot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptedPolicyParams {
    /// Chance of steering toward a visible human; the rest is avoidance.
    pub approach_human_prob: f64,
    /// Chance of a contemplative stop when nothing more pressing applies.
    pub stop_prob: f64,
    /// Within avoidance, chance of rising instead of turning away.
    pub vertical_avoid_prob: f64,
    /// Exponent on open-space width when picking where to explore.
    /// 0 picks uniformly among open sectors; large values always take the widest.
    pub explore_bias: f64,
    pub rng_seed: u64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PersonaError {
    #[error("persona id is empty")]
    EmptyId,
    #[error("persona {0:?} has an empty {1} prompt")]
    EmptyPrompt(String, &'static str),
    #[error("{0} must be a probability in [0, 1], got {1}")]
    BadProbability(&'static str, f64),
    #[error("explore_bias must be finite and >= 0, got {0}")]
    BadExploreBias(f64),
}

impl ScriptedPolicyParams {
    pub fn validate(&self) -> Result<(), PersonaError> {
        for (name, p) in [
            ("approach_human_prob", self.approach_human_prob),
            ("stop_prob", self.stop_prob),
            ("vertical_avoid_prob", self.vertical_avoid_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(PersonaError::BadProbability(name, p));
            }
        }
        if !(self.explore_bias.is_finite() && self.explore_bias >= 0.0) {
            return Err(PersonaError::BadExploreBias(self.explore_bias));
        }
        Ok(())
    }

    pub fn avoid_human_prob(&self) -> f64 {
        1.0 - self.approach_human_prob
    }
}

impl Default for ScriptedPolicyParams {
    fn default() -> Self {
        Self {
            approach_human_prob: 0.5,
            stop_prob: 0.1,
            vertical_avoid_prob: 0.5,
            explore_bias: 2.0,
            rng_seed: 0,
        }
    }
}

/// Which phrase table the scripted pilot draws its reasons from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Voice {
    #[default]
    Cloud,
    Companion,
    Observer,
    Explorer,
}

/// An authored character: the prompt pair for a remote model and the
/// parameter set for the scripted pilot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PersonaSpec {
    pub id: String,
    #[serde(default)]
    pub voice: Voice,
    pub preamble_prompt: String,
    pub directional_prompt: String,
    pub policy: ScriptedPolicyParams,
}

impl PersonaSpec {
    pub fn validate(&self) -> Result<(), PersonaError> {
        if self.id.trim().is_empty() {
            return Err(PersonaError::EmptyId);
        }
        if self.preamble_prompt.trim().is_empty() {
            return Err(PersonaError::EmptyPrompt(self.id.clone(), "preamble"));
        }
        if self.directional_prompt.trim().is_empty() {
            return Err(PersonaError::EmptyPrompt(self.id.clone(), "directional"));
        }
        self.policy.validate()
    }
}

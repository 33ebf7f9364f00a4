use alloc::string::String;

use serde::{Deserialize, Serialize};

use crate::action::Action;

/// One parsed answer from the pilot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decision {
    pub action: Action,
    pub reason: String,
    /// Wall-clock (or simulated) span of one mind round trip.
    pub latency_ms: u64,
}

impl Decision {
    pub fn new(action: Action, reason: impl Into<String>) -> Self {
        Self {
            action,
            reason: reason.into(),
            latency_ms: 0,
        }
    }

    pub fn with_latency(mut self, latency_ms: u64) -> Self {
        self.latency_ms = latency_ms;
        self
    }
}

/// Ground-truth blimp pose, logged only for simulated flights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pose {
    pub x_m: f64,
    pub y_m: f64,
    pub z_m: f64,
    pub heading_deg: f64,
}

/// One log row. Key order here is the on-disk key order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlightRecord {
    pub t_ms: u64,
    pub persona_id: String,
    pub action: Action,
    pub reason: String,
    pub latency_ms: u64,
    pub pose: Option<Pose>,
    pub human_visible: bool,
    pub collision: bool,
}

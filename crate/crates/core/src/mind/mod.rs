//! The two-stage pilot: a one-time preamble that builds a mental map from a
//! panorama, then a decision loop that answers one movement per percept.
//!
//! Backends implement [`Mind`]. The scripted backend lives here; the remote
//! chat-completion backend needs a network stack and lives in the station
//! crate.

mod parse;
mod phrases;
mod scripted;

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::action::Action;
use crate::percept::{MentalMap, Observation};
use crate::persona::PersonaSpec;
use crate::record::Decision;

pub use parse::{parse_decision, ParseFailure};
pub use scripted::{scripted_policy, Rule, ScriptedMind};

/// Substring a preamble acknowledgment must contain.
pub const READY_PHRASE: &str = "Ready to explore";

pub const PARSE_FALLBACK_REASON: &str = "<parse-error fallback>";
pub const TRANSPORT_FALLBACK_REASON: &str = "<transport-error fallback>";

/// Input handed to a backend: camera bytes or a structured observation.
#[derive(Debug, Clone, Copy)]
pub enum Percept<'a> {
    Image(&'a [u8]),
    Observation(&'a Observation),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MindError {
    #[error("preamble acknowledgment lacks the ready phrase: {0:?}")]
    AckMismatch(String),
    #[error("transport: {0}")]
    Transport(String),
    #[error("panorama is empty")]
    EmptyPanorama,
    #[error(transparent)]
    Parse(#[from] ParseFailure),
    #[error("session has not completed its preamble")]
    NotReady,
    #[error("backend cannot consume this kind of percept")]
    UnsupportedPercept,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: String,
}

/// Where the session's mental map lives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SessionMap {
    Known(MentalMap),
    /// Held only inside the remote model's context.
    Opaque,
}

/// State of one pilot conversation. The transcript only grows; entries 0
/// and 1 are always the preamble exchange.
#[derive(Debug, Clone)]
pub struct SessionHandle {
    persona_id: String,
    transcript: Vec<Message>,
    mental_map: SessionMap,
    preamble_latency_ms: u64,
    ready: bool,
    error_count: u32,
}

impl SessionHandle {
    /// A session whose preamble was acknowledged.
    pub fn opened(
        persona_id: impl Into<String>,
        preamble: impl Into<String>,
        acknowledgment: impl Into<String>,
        mental_map: SessionMap,
        preamble_latency_ms: u64,
    ) -> Self {
        let mut s = Self {
            persona_id: persona_id.into(),
            transcript: Vec::new(),
            mental_map,
            preamble_latency_ms,
            ready: true,
            error_count: 0,
        };
        s.push_exchange(preamble, acknowledgment);
        s
    }

    pub fn persona_id(&self) -> &str {
        &self.persona_id
    }

    pub fn transcript(&self) -> &[Message] {
        &self.transcript
    }

    pub fn mental_map(&self) -> &SessionMap {
        &self.mental_map
    }

    pub fn preamble_latency_ms(&self) -> u64 {
        self.preamble_latency_ms
    }

    pub fn is_ready(&self) -> bool {
        self.ready
    }

    /// Malformed or failed replies seen so far.
    pub fn error_count(&self) -> u32 {
        self.error_count
    }

    pub fn push_exchange(&mut self, user: impl Into<String>, assistant: impl Into<String>) {
        self.transcript.push(Message {
            role: Role::User,
            content: user.into(),
        });
        self.transcript.push(Message {
            role: Role::Assistant,
            content: assistant.into(),
        });
    }

    /// Records a failed turn and produces the Stop fallback.
    pub fn fail(
        &mut self,
        user: impl Into<String>,
        reply: impl Into<String>,
        error: MindError,
    ) -> Decided {
        self.error_count += 1;
        self.push_exchange(user, reply);
        let reason = match error {
            MindError::Transport(_) => TRANSPORT_FALLBACK_REASON,
            _ => PARSE_FALLBACK_REASON,
        };
        Decided {
            decision: Decision::new(Action::Stop, reason),
            error: Some(error),
        }
    }
}

/// A decision plus the error that forced a fallback, if any.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decided {
    pub decision: Decision,
    pub error: Option<MindError>,
}

impl Decided {
    pub fn ok(decision: Decision) -> Self {
        Self {
            decision,
            error: None,
        }
    }
}

/// A navigation backend.
///
/// One session is strictly sequential. `decide` never fails outright: any
/// malformed or missing reply becomes a Stop with the error attached.
pub trait Mind {
    fn start_session(
        &mut self,
        persona: &PersonaSpec,
        panorama: Percept<'_>,
    ) -> Result<SessionHandle, MindError>;

    fn decide(&mut self, session: &mut SessionHandle, percept: Percept<'_>) -> Decided;

    /// True when `decide` does not measure its own latency and the caller
    /// should draw one from a latency model.
    fn simulated_latency(&self) -> bool {
        false
    }
}

impl<M: Mind + ?Sized> Mind for &mut M {
    fn start_session(
        &mut self,
        persona: &PersonaSpec,
        panorama: Percept<'_>,
    ) -> Result<SessionHandle, MindError> {
        (**self).start_session(persona, panorama)
    }

    fn decide(&mut self, session: &mut SessionHandle, percept: Percept<'_>) -> Decided {
        (**self).decide(session, percept)
    }

    fn simulated_latency(&self) -> bool {
        (**self).simulated_latency()
    }
}

impl<M: Mind + ?Sized> Mind for alloc::boxed::Box<M> {
    fn start_session(
        &mut self,
        persona: &PersonaSpec,
        panorama: Percept<'_>,
    ) -> Result<SessionHandle, MindError> {
        (**self).start_session(persona, panorama)
    }

    fn decide(&mut self, session: &mut SessionHandle, percept: Percept<'_>) -> Decided {
        (**self).decide(session, percept)
    }

    fn simulated_latency(&self) -> bool {
        (**self).simulated_latency()
    }
}

/// Formats a decision the way a reply is expected to look.
pub fn format_reply(action: Action, reason: &str) -> String {
    let mut s = String::from(action.as_str());
    s.push(',');
    s.push_str(reason);
    s
}

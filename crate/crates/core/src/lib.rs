//! Core of the blimp ground station: the action vocabulary, percept and log
//! types, the scripted pilot, the blimp simulator and the validation
//! statistics. No I/O; `alloc` only.

#![no_std]

extern crate alloc;

pub mod action;
pub mod analytics;
pub mod mind;
pub mod percept;
pub mod persona;
pub mod record;
pub mod sim;

pub use action::{action_from_letter, categorize_action, Action, CategoryScheme, UnknownLetter};
pub use percept::{EntityKind, MentalMap, Observation, SceneEntity};
pub use persona::{PersonaSpec, ScriptedPolicyParams, Voice};
pub use record::{Decision, FlightRecord, Pose};

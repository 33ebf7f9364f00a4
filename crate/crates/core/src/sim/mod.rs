//! Discrete-time blimp kinematics in an indoor arena.
//!
//! The pilot only ever sees [`Observation`](crate::percept::Observation)s;
//! momentum, turn radius and the latched action live here. Headings are
//! compass degrees (0 = north, clockwise) and bearings are relative to the
//! nose, positive to the right.

mod dynamics;
mod env;
mod flight;
mod geometry;
mod observe;
mod world;

pub use dynamics::{
    check_collision, step, BlimpState, ConfigError, LatencyModel, SimConfig, CONTACT_MARGIN_M,
};
pub use env::{EnvError, Environment, HumanSpec, Landmark, Obstacle, Spawn, HUMAN_SPEED_MPS};
pub use flight::{run_flight, run_scripted_flight, FlightLog, LatencySampler};
pub use geometry::{relative_bearing, wrap_180, wrap_360, Rect, Shape, Side, Vec2};
pub use observe::{observe, ViewParams, DEFAULT_MAX_RANGE_M, OPEN_FRACTION, OPEN_SECTORS};
pub use world::{SimError, World};

//! Ground station for the prompt-piloted blimp: config and log files, the
//! robot link and its emulator, the remote model backend, rendering and
//! the `sg` command line.

pub mod analyze;
pub mod cli;
pub mod config;
pub mod emulator;
pub mod error;
pub mod link;
pub mod live;
pub mod log;
pub mod manifest;
pub mod remote;
pub mod render;

pub use error::{CliError, ErrorClass};

//! MEMS switch controller toolkit.
//!
//! This crate ties the pieces together and carries the runnable examples:
//!
//! - [`core`]: the firmware state machine, ladder decoding, topologies.
//! - [`sim`]: the electrical simulator and its virtual serial port.
//! - [`host`]: the host driver, threshold printer and HTTP/WebSocket API.
//! - [`harness`]: an in-process wire joining a host session to a simulated
//!   rig, for deterministic end-to-end runs.
//!
//! ```bash
//! cargo run -p memswitch --example ladder_thresholds
//! cargo run -p memswitch --example hil_simulation
//! ```
//!
//! The `switchsim` and `switchctl` binaries are thin wrappers over [`cli`].

pub mod cli;
pub mod harness;

pub use memswitch_core as core;
pub use memswitch_host as host;
pub use memswitch_sim as sim;

//! Firmware core for a MEMS switch controller.
//!
//! The controller reads a many-button panel wired as a resistor ladder on a
//! single analog input, accepts single-digit port commands on a serial line,
//! and drives exactly one group of high-voltage control lines at a time while
//! lighting the matching indicator on a daisy-chained LED string.
//!
//! Everything here is deterministic and hardware-agnostic. The actual I/O
//! goes through [`HardwareBoundary`], which the simulator and real board
//! support crates implement.

pub mod controller;
pub mod ladder;
pub mod led;
pub mod protocol;
pub mod topology;

pub use controller::{
    apply_selection, poll_buttons, Controller, ControllerConfig, ControllerState,
    ControllerError, HardwareBoundary, Level, OutputAction,
};
pub use ladder::{build_thresholds, decode_button, LadderConfig, LadderError, ThresholdTable};
pub use led::{LedColors, PixelFrame, Rgb};
pub use protocol::{parse_serial_byte, render_event_line, render_state_line, Command};
pub use topology::{builtin_presets, lines_for_port, load_topology, DriveMode, Topology, TopologyError};

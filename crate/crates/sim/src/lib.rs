//! Hardware-in-the-loop simulator for the switch controller.
//!
//! [`VirtualDevice`] models the electrical side of the instrument: the button
//! ladder feeding the ADC, relay coils and contacts with an actuation delay,
//! the shared high-voltage rail reaching the DSUB pins, and the MEMS gates on
//! the far end of the cable. It implements
//! [`HardwareBoundary`](memswitch_core::HardwareBoundary), so the unmodified
//! firmware core runs against it. [`SimRig`] pairs the two and
//! [`serve_virtual_serial`] exposes the rig's serial port over TCP.

mod device;
mod rig;
mod trace;
mod transport;

pub use device::{DeviceConfig, MemsChannel, RelayModel, VirtualDevice};
pub use rig::SimRig;
pub use trace::{TraceEvent, TraceKind};
pub use transport::{serve_virtual_serial, DeviceSnapshot, ServeOptions, VirtualSerialServer};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("button {button} out of range 1..={n_buttons}")]
    ButtonOutOfRange { button: usize, n_buttons: usize },
    #[error("control line {0} is not part of the topology")]
    UnknownLine(u8),
    #[error("time step must be positive, got {0} ms")]
    InvalidStep(f64),
    #[error(transparent)]
    Ladder(#[from] memswitch_core::LadderError),
    #[error(transparent)]
    Controller(#[from] memswitch_core::ControllerError),
    #[error("endpoint unavailable: {0}")]
    EndpointUnavailable(std::io::Error),
    #[error("simulator has shut down")]
    Shutdown,
}

//! Host side of the switch controller: a blocking driver for the serial
//! protocol, a threshold-table printer for building panels, and an HTTP and
//! WebSocket service that lets browsers share one device.

pub mod api;
pub mod session;
pub mod thresholds;

pub use api::{serve_api, ApiServer, BindFailed};
pub use session::{
    connect, open_wire, DeviceState, Endpoint, HostError, Mode, Probe, Session, SessionOptions, Source,
    Transcript, TranscriptWire, Wire,
};
pub use thresholds::print_thresholds;

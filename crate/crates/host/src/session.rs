//! Blocking driver for the single-byte serial protocol.
//!
//! The as-built firmware never answers, so the driver cannot see panel
//! presses on it; it keeps a shadow of the last digit it wrote. Firmware with
//! protocol extensions answers `'?'` with `S<n>\n` and pushes `E<n>\n` on
//! panel presses, and [`connect`] detects that with a single probe.

use std::fmt;
use std::io::{self, ErrorKind, Read, Write};
use std::net::{TcpStream, ToSocketAddrs};
use std::str::FromStr;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use memswitch_core::protocol::{parse_reply_line, port_byte, Reply, QUERY_BYTE};
use memswitch_core::Topology;
use serde::Serialize;
use thiserror::Error;

pub const DEFAULT_BAUD: u32 = 9600;

#[derive(Debug, Error)]
pub enum HostError {
    #[error("invalid endpoint {0:?}")]
    InvalidEndpoint(String),
    #[error("could not open endpoint: {0}")]
    ConnectFailed(io::Error),
    #[error("device is already attached to another client")]
    Busy,
    #[error("port {port} out of range 1..={n_ports}")]
    PortOutOfRange { port: u8, n_ports: u8 },
    #[error("write failed: {0}")]
    WriteFailed(io::Error),
    #[error("read failed: {0}")]
    ReadFailed(io::Error),
    #[error("timed out waiting for the device")]
    ReadTimeout,
    #[error("device closed the connection")]
    Disconnected,
    #[error("device did not answer the extension probe")]
    ExtensionsUnavailable,
}

impl HostError {
    /// True for errors after which the byte stream is gone.
    pub fn is_link_loss(&self) -> bool {
        matches!(self, HostError::WriteFailed(_) | HostError::ReadFailed(_) | HostError::Disconnected)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Endpoint {
    Serial { path: String, baud: u32 },
    Network(String),
}

impl FromStr for Endpoint {
    type Err = HostError;

    /// Accepts `tcp://host:port`, `host:port`, `serial:<path>[@baud]`, or a
    /// bare device path (`/dev/ttyACM0`, `COM18`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let invalid = || HostError::InvalidEndpoint(s.to_string());
        if let Some(addr) = s.strip_prefix("tcp://") {
            return if addr.is_empty() { Err(invalid()) } else { Ok(Endpoint::Network(addr.into())) };
        }
        let serial = |rest: &str| -> Result<Endpoint, HostError> {
            let (path, baud) = match rest.rsplit_once('@') {
                Some((p, b)) => (p, b.parse::<u32>().map_err(|_| invalid())?),
                None => (rest, DEFAULT_BAUD),
            };
            if path.is_empty() || baud == 0 {
                return Err(invalid());
            }
            Ok(Endpoint::Serial { path: path.into(), baud })
        };
        if let Some(rest) = s.strip_prefix("serial:") {
            return serial(rest);
        }
        let upper = s.to_ascii_uppercase();
        if s.starts_with('/') || upper.starts_with("COM") {
            return serial(s);
        }
        if s.contains(':') {
            return Ok(Endpoint::Network(s.into()));
        }
        Err(invalid())
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::Serial { path, baud } => write!(f, "serial:{path}@{baud}"),
            Endpoint::Network(addr) => write!(f, "tcp://{addr}"),
        }
    }
}

/// A byte stream to the device.
pub trait Wire: Read + Write + Send {
    fn set_read_timeout(&mut self, timeout: Duration) -> io::Result<()>;
}

impl Wire for TcpStream {
    fn set_read_timeout(&mut self, timeout: Duration) -> io::Result<()> {
        TcpStream::set_read_timeout(self, Some(timeout.max(Duration::from_micros(1))))
    }
}

impl Wire for Box<dyn serialport::SerialPort> {
    fn set_read_timeout(&mut self, timeout: Duration) -> io::Result<()> {
        self.set_timeout(timeout).map_err(io::Error::from)
    }
}

/// Wraps a wire and keeps a copy of every byte in each direction.
pub struct TranscriptWire<W> {
    inner: W,
    transcript: Arc<Mutex<Transcript>>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Transcript {
    pub to_device: Vec<u8>,
    pub from_device: Vec<u8>,
}

impl<W> TranscriptWire<W> {
    pub fn new(inner: W) -> (Self, Arc<Mutex<Transcript>>) {
        let transcript = Arc::new(Mutex::new(Transcript::default()));
        (Self { inner, transcript: transcript.clone() }, transcript)
    }
}

impl<W: Read> Read for TranscriptWire<W> {
    fn read(&mut self, buf: &mut [u8]) -> io::Result<usize> {
        let n = self.inner.read(buf)?;
        self.transcript.lock().unwrap().from_device.extend_from_slice(&buf[..n]);
        Ok(n)
    }
}

impl<W: Write> Write for TranscriptWire<W> {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.transcript.lock().unwrap().to_device.extend_from_slice(&buf[..n]);
        Ok(n)
    }

    fn flush(&mut self) -> io::Result<()> {
        self.inner.flush()
    }
}

impl<W: Wire> Wire for TranscriptWire<W> {
    fn set_read_timeout(&mut self, timeout: Duration) -> io::Result<()> {
        self.inner.set_read_timeout(timeout)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    /// The host's own record of what it last wrote.
    Shadow,
    /// Reported by the device.
    Queried,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Shadow => "shadow",
            Source::Queried => "queried",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DeviceState {
    /// Selected port, 0 for none.
    pub selected: u8,
    pub source: Source,
    pub topology_name: String,
    /// Milliseconds since the Unix epoch.
    pub last_update_ms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Legacy,
    Extended,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Probe {
    /// Send one `'?'` and fall back to legacy if nothing answers.
    Auto,
    /// Assume legacy firmware; nothing but select digits is ever sent.
    Legacy,
    /// Fail unless the device answers the probe.
    Extended,
}

#[derive(Debug, Clone)]
pub struct SessionOptions {
    pub probe: Probe,
    pub probe_timeout: Duration,
    pub reply_timeout: Duration,
}

impl Default for SessionOptions {
    fn default() -> Self {
        Self {
            probe: Probe::Auto,
            probe_timeout: Duration::from_millis(200),
            reply_timeout: Duration::from_millis(500),
        }
    }
}

enum LineRead {
    Line(Vec<u8>),
    Timeout,
}

fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0)
}

pub struct Session {
    wire: Box<dyn Wire>,
    n_ports: u8,
    mode: Mode,
    state: DeviceState,
    rx: Vec<u8>,
    options: SessionOptions,
}

impl fmt::Debug for Session {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Session")
            .field("n_ports", &self.n_ports)
            .field("mode", &self.mode)
            .field("state", &self.state)
            .finish_non_exhaustive()
    }
}

/// Opens `endpoint` and probes for protocol extensions.
pub fn connect(endpoint: &Endpoint, topology: &Topology, options: SessionOptions) -> Result<Session, HostError> {
    let wire = open_wire(endpoint, &options)?;
    Session::attach(wire, topology, options)
}

/// Opens the raw byte stream for `endpoint` without probing.
pub fn open_wire(endpoint: &Endpoint, options: &SessionOptions) -> Result<Box<dyn Wire>, HostError> {
    let wire: Box<dyn Wire> = match endpoint {
        Endpoint::Network(addr) => {
            let addrs: Vec<_> = addr.to_socket_addrs().map_err(HostError::ConnectFailed)?.collect();
            let mut last = io::Error::new(ErrorKind::NotFound, "no address resolved");
            let mut stream = None;
            for a in addrs {
                match TcpStream::connect_timeout(&a, Duration::from_secs(2)) {
                    Ok(s) => {
                        stream = Some(s);
                        break;
                    }
                    Err(e) => last = e,
                }
            }
            let stream = stream.ok_or(HostError::ConnectFailed(last))?;
            let _ = stream.set_nodelay(true);
            Box::new(stream)
        }
        Endpoint::Serial { path, baud } => {
            let port = serialport::new(path, *baud)
                .data_bits(serialport::DataBits::Eight)
                .parity(serialport::Parity::None)
                .stop_bits(serialport::StopBits::One)
                .timeout(options.reply_timeout)
                .open()
                .map_err(|e| match e.kind() {
                    serialport::ErrorKind::Io(ErrorKind::ResourceBusy) => HostError::Busy,
                    _ => HostError::ConnectFailed(e.into()),
                })?;
            Box::new(port)
        }
    };
    Ok(wire)
}

impl Session {
    /// Starts a session on an already open byte stream.
    pub fn attach(wire: Box<dyn Wire>, topology: &Topology, options: SessionOptions) -> Result<Session, HostError> {
        let mut session = Session {
            wire,
            n_ports: topology.n_ports,
            mode: Mode::Legacy,
            state: DeviceState {
                selected: 0,
                source: Source::Shadow,
                topology_name: topology.name.clone(),
                last_update_ms: now_ms(),
            },
            rx: Vec::new(),
            options,
        };
        if session.options.probe == Probe::Legacy {
            return Ok(session);
        }
        session.send(&[QUERY_BYTE])?;
        match session.await_state(session.options.probe_timeout) {
            Ok(()) => session.mode = Mode::Extended,
            Err(HostError::ReadTimeout) if session.options.probe == Probe::Auto => {}
            Err(HostError::ReadTimeout) => return Err(HostError::ExtensionsUnavailable),
            Err(HostError::Disconnected) => return Err(HostError::Busy),
            Err(e) => return Err(e),
        }
        Ok(session)
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn n_ports(&self) -> u8 {
        self.n_ports
    }

    pub fn topology_name(&self) -> &str {
        &self.state.topology_name
    }

    /// Latest known state without touching the wire.
    pub fn state(&self) -> &DeviceState {
        &self.state
    }

    fn send(&mut self, bytes: &[u8]) -> Result<(), HostError> {
        self.wire.write_all(bytes).map_err(HostError::WriteFailed)?;
        self.wire.flush().map_err(HostError::WriteFailed)
    }

    fn set(&mut self, selected: u8, source: Source) {
        self.state.selected = selected;
        self.state.source = source;
        self.state.last_update_ms = now_ms();
    }

    fn read_line(&mut self, deadline: Instant) -> Result<LineRead, HostError> {
        loop {
            if let Some(pos) = self.rx.iter().position(|&b| b == b'\n') {
                let line: Vec<u8> = self.rx.drain(..=pos).take(pos).collect();
                return Ok(LineRead::Line(line));
            }
            let now = Instant::now();
            if now >= deadline {
                return Ok(LineRead::Timeout);
            }
            self.wire.set_read_timeout(deadline - now).map_err(HostError::ReadFailed)?;
            let mut buf = [0u8; 64];
            match self.wire.read(&mut buf) {
                Ok(0) => return Err(HostError::Disconnected),
                Ok(n) => self.rx.extend_from_slice(&buf[..n]),
                Err(e) if matches!(e.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut) => {
                    return Ok(LineRead::Timeout)
                }
                Err(e) if e.kind() == ErrorKind::Interrupted => {}
                Err(e) => return Err(HostError::ReadFailed(e)),
            }
        }
    }

    /// Applies one device line. Returns true for a state reply.
    fn absorb(&mut self, line: &[u8]) -> bool {
        match parse_reply_line(line) {
            Some(Reply::State(n)) if n <= self.n_ports => {
                self.set(n, Source::Queried);
                true
            }
            Some(Reply::Event(n)) if n <= self.n_ports => {
                self.set(n, Source::Queried);
                false
            }
            _ => {
                log::debug!("ignoring device line {:?}", String::from_utf8_lossy(line));
                false
            }
        }
    }

    fn await_state(&mut self, timeout: Duration) -> Result<(), HostError> {
        let deadline = Instant::now() + timeout;
        loop {
            match self.read_line(deadline)? {
                LineRead::Line(line) => {
                    if self.absorb(&line) {
                        return Ok(());
                    }
                }
                LineRead::Timeout => return Err(HostError::ReadTimeout),
            }
        }
    }

    /// Writes the single select digit for `port`. On extended firmware the
    /// result is then confirmed with a query.
    pub fn select_port(&mut self, port: u8) -> Result<DeviceState, HostError> {
        if port == 0 || port > self.n_ports {
            return Err(HostError::PortOutOfRange { port, n_ports: self.n_ports });
        }
        self.send(&[port_byte(port)])?;
        self.set(port, Source::Shadow);
        if self.mode == Mode::Extended {
            return self.get_state();
        }
        Ok(self.state.clone())
    }

    pub fn get_state(&mut self) -> Result<DeviceState, HostError> {
        if self.mode == Mode::Extended {
            self.send(&[QUERY_BYTE])?;
            self.await_state(self.options.reply_timeout)?;
        }
        Ok(self.state.clone())
    }

    /// Reads pushed lines for up to `timeout`. Returns the new state if the
    /// selection changed. Legacy sessions never read.
    pub fn poll_events(&mut self, timeout: Duration) -> Result<Option<DeviceState>, HostError> {
        if self.mode == Mode::Legacy {
            return Ok(None);
        }
        let before = self.state.selected;
        let deadline = Instant::now() + timeout;
        // Take whatever is buffered, then stop at the first quiet read.
        while let LineRead::Line(line) = self.read_line(deadline)? {
            self.absorb(&line);
        }
        Ok((self.state.selected != before).then(|| self.state.clone()))
    }
}

//! TCP stand-in for the instrument's USB serial port.
//!
//! One thread owns the [`SimRig`] and advances it in step with the wall
//! clock. Client I/O and control requests reach it only through its event
//! queue, so the device model is never touched concurrently. Only one
//! client may be attached at a time; a second connection is closed at once.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};
use std::net::{Shutdown, SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::mpsc::{self, Receiver, Sender};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use memswitch_core::PixelFrame;

use crate::rig::SimRig;
use crate::trace::TraceEvent;
use crate::SimError;

#[derive(Default)]
pub struct ServeOptions {
    /// Receives every trace event as it is recorded.
    pub trace_sink: Option<Box<dyn Write + Send>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviceSnapshot {
    pub clock_ms: f64,
    pub selected: Option<u8>,
    pub pin_volts: BTreeMap<u8, f64>,
    pub conducting_ports: Vec<u8>,
    pub active_path: Option<u8>,
    pub led_frame: PixelFrame,
    pub buttons_down: BTreeSet<usize>,
    pub client_attached: bool,
}

enum Event {
    Attached(u64, TcpStream),
    Bytes(u64, Vec<u8>),
    Detached(u64),
    Press(usize, Sender<Result<(), SimError>>),
    Release(usize, Sender<Result<(), SimError>>),
    Snapshot(Sender<DeviceSnapshot>),
    Shutdown,
}

pub struct VirtualSerialServer {
    addr: SocketAddr,
    events: Sender<Event>,
    stop: Arc<AtomicBool>,
    device_thread: Option<JoinHandle<()>>,
    accept_thread: Option<JoinHandle<()>>,
}

pub fn serve_virtual_serial(
    rig: SimRig,
    endpoint: impl ToSocketAddrs,
    options: ServeOptions,
) -> Result<VirtualSerialServer, SimError> {
    let listener = TcpListener::bind(endpoint).map_err(SimError::EndpointUnavailable)?;
    let addr = listener.local_addr().map_err(SimError::EndpointUnavailable)?;
    let (tx, rx) = mpsc::channel();
    let stop = Arc::new(AtomicBool::new(false));
    let attached = Arc::new(AtomicBool::new(false));

    let device_thread = {
        let stop = stop.clone();
        let attached = attached.clone();
        thread::Builder::new()
            .name("switchsim-device".into())
            .spawn(move || device_loop(rig, rx, stop, attached, options))
            .map_err(SimError::EndpointUnavailable)?
    };
    let accept_thread = {
        let tx = tx.clone();
        let stop = stop.clone();
        thread::Builder::new()
            .name("switchsim-accept".into())
            .spawn(move || accept_loop(listener, tx, stop, attached))
            .map_err(SimError::EndpointUnavailable)?
    };

    Ok(VirtualSerialServer {
        addr,
        events: tx,
        stop,
        device_thread: Some(device_thread),
        accept_thread: Some(accept_thread),
    })
}

impl VirtualSerialServer {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    fn request<T>(&self, make: impl FnOnce(Sender<T>) -> Event) -> Result<T, SimError> {
        let (tx, rx) = mpsc::channel();
        self.events.send(make(tx)).map_err(|_| SimError::Shutdown)?;
        rx.recv().map_err(|_| SimError::Shutdown)
    }

    pub fn press_button(&self, button: usize) -> Result<(), SimError> {
        self.request(|tx| Event::Press(button, tx))?
    }

    pub fn release_button(&self, button: usize) -> Result<(), SimError> {
        self.request(|tx| Event::Release(button, tx))?
    }

    pub fn snapshot(&self) -> Result<DeviceSnapshot, SimError> {
        self.request(Event::Snapshot)
    }

    pub fn shutdown(mut self) {
        self.stop_threads();
    }

    fn stop_threads(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        let _ = self.events.send(Event::Shutdown);
        // Unblock accept().
        let _ = TcpStream::connect_timeout(&self.addr, Duration::from_millis(100));
        if let Some(h) = self.accept_thread.take() {
            let _ = h.join();
        }
        if let Some(h) = self.device_thread.take() {
            let _ = h.join();
        }
    }
}

impl Drop for VirtualSerialServer {
    fn drop(&mut self) {
        self.stop_threads();
    }
}

fn accept_loop(listener: TcpListener, events: Sender<Event>, stop: Arc<AtomicBool>, attached: Arc<AtomicBool>) {
    let next_id = AtomicU64::new(1);
    for stream in listener.incoming() {
        if stop.load(Ordering::SeqCst) {
            break;
        }
        let Ok(stream) = stream else { continue };
        if attached.swap(true, Ordering::SeqCst) {
            log::info!("refusing second client {:?}", stream.peer_addr());
            let _ = stream.shutdown(Shutdown::Both);
            continue;
        }
        let _ = stream.set_nodelay(true);
        let id = next_id.fetch_add(1, Ordering::Relaxed);
        let Ok(writer) = stream.try_clone() else {
            attached.store(false, Ordering::SeqCst);
            continue;
        };
        if events.send(Event::Attached(id, writer)).is_err() {
            break;
        }
        let events = events.clone();
        let _ = thread::Builder::new().name(format!("switchsim-client-{id}")).spawn(move || {
            read_client(id, stream, events);
        });
    }
}

fn read_client(id: u64, mut stream: TcpStream, events: Sender<Event>) {
    let mut buf = [0u8; 256];
    loop {
        match stream.read(&mut buf) {
            Ok(0) | Err(_) => break,
            Ok(n) => {
                if events.send(Event::Bytes(id, buf[..n].to_vec())).is_err() {
                    return;
                }
            }
        }
    }
    let _ = events.send(Event::Detached(id));
}

fn write_trace(sink: &mut Option<Box<dyn Write + Send>>, events: Vec<TraceEvent>) {
    if let Some(w) = sink {
        for e in events {
            let _ = writeln!(w, "{e}");
        }
        let _ = w.flush();
    }
}

fn device_loop(
    mut rig: SimRig,
    events: Receiver<Event>,
    stop: Arc<AtomicBool>,
    attached: Arc<AtomicBool>,
    mut options: ServeOptions,
) {
    let mut client: Option<(u64, TcpStream)> = None;
    let started = Instant::now();
    let sim_origin = rig.device.clock_ms;

    while !stop.load(Ordering::SeqCst) {
        while let Ok(event) = events.try_recv() {
            match event {
                Event::Attached(id, stream) => client = Some((id, stream)),
                Event::Bytes(id, bytes) => {
                    if client.as_ref().is_some_and(|(cid, _)| *cid == id) {
                        rig.device.inject_rx(&bytes);
                    }
                }
                Event::Detached(id) => {
                    if client.as_ref().is_some_and(|(cid, _)| *cid == id) {
                        client = None;
                        attached.store(false, Ordering::SeqCst);
                    }
                }
                Event::Press(b, reply) => {
                    let _ = reply.send(rig.device.press_button(b));
                }
                Event::Release(b, reply) => {
                    let _ = reply.send(rig.device.release_button(b));
                }
                Event::Snapshot(reply) => {
                    let _ = reply.send(snapshot(&rig, client.is_some()));
                }
                Event::Shutdown => return,
            }
        }

        rig.tick();

        let out = rig.device.take_tx();
        if !out.is_empty() {
            if let Some((_, stream)) = client.as_mut() {
                if stream.write_all(&out).is_err() {
                    client = None;
                    attached.store(false, Ordering::SeqCst);
                }
            }
        }
        let trace = rig.device.take_trace();
        write_trace(&mut options.trace_sink, trace);

        // Keep simulated time in step with the wall clock.
        let sim_elapsed = Duration::from_secs_f64((rig.device.clock_ms - sim_origin) / 1000.0);
        if let Some(wait) = sim_elapsed.checked_sub(started.elapsed()) {
            thread::sleep(wait);
        }
    }
}

fn snapshot(rig: &SimRig, client_attached: bool) -> DeviceSnapshot {
    let d = &rig.device;
    DeviceSnapshot {
        clock_ms: d.clock_ms,
        selected: rig.selected(),
        pin_volts: d.pin_volts.clone(),
        conducting_ports: d.conducting_ports(),
        active_path: d.active_path(),
        led_frame: d.led_frame.clone(),
        buttons_down: d.buttons_down.clone(),
        client_attached,
    }
}

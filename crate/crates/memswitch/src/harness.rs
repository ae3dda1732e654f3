use std::io::{self, ErrorKind, Read, Write};
use std::sync::{Arc, Mutex, MutexGuard};
use std::time::Duration;

use memswitch_host::Wire;
use memswitch_sim::SimRig;

/// Upper bound on simulated time spent consuming one host write.
const WRITE_SETTLE_MS: f64 = 50.0;

/// A host-side [`Wire`] wired straight into a [`SimRig`].
///
/// Simulated time only moves when the host touches the wire: a write is
/// queued on the device and the rig ticks until the firmware has consumed
/// it; a read ticks the rig until the firmware has written something or the
/// read timeout has elapsed *in simulated time*. Runs are therefore
/// deterministic and far faster than the wall clock.
///
/// Clones share the rig, not the unread part of a reply.
#[derive(Clone)]
pub struct RigWire {
    rig: Arc<Mutex<SimRig>>,
    timeout_ms: f64,
    unread: Vec<u8>,
}

impl RigWire {
    pub fn new(rig: SimRig) -> Self {
        Self { rig: Arc::new(Mutex::new(rig)), timeout_ms: 1000.0, unread: Vec::new() }
    }

    pub fn rig(&self) -> MutexGuard<'_, SimRig> {
        self.rig.lock().unwrap()
    }
}

impl Read for RigWire {
    fn read(&mut self, buf: &mut [u8]) -> io::Result<usize> {
        if self.unread.is_empty() {
            let mut rig = self.rig.lock().unwrap();
            let until = rig.device.clock_ms + self.timeout_ms;
            let mut pending = rig.device.take_tx();
            while pending.is_empty() && rig.device.clock_ms < until {
                rig.tick();
                pending = rig.device.take_tx();
            }
            self.unread = pending;
        }
        if self.unread.is_empty() {
            return Err(io::Error::new(ErrorKind::TimedOut, "no reply within simulated timeout"));
        }
        let n = buf.len().min(self.unread.len());
        buf[..n].copy_from_slice(&self.unread[..n]);
        self.unread.drain(..n);
        Ok(n)
    }
}

impl Write for RigWire {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        let mut rig = self.rig.lock().unwrap();
        rig.device.inject_rx(buf);
        let until = rig.device.clock_ms + WRITE_SETTLE_MS;
        while rig.device.rx_pending() > 0 && rig.device.clock_ms < until {
            rig.tick();
        }
        Ok(buf.len())
    }

    fn flush(&mut self) -> io::Result<()> {
        Ok(())
    }
}

impl Wire for RigWire {
    fn set_read_timeout(&mut self, timeout: Duration) -> io::Result<()> {
        self.timeout_ms = timeout.as_secs_f64() * 1000.0;
        Ok(())
    }
}

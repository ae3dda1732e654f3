use std::collections::{BTreeMap, BTreeSet, VecDeque};

use memswitch_core::ladder::volts_to_code;
use memswitch_core::{DriveMode, HardwareBoundary, LadderConfig, Level, PixelFrame, Topology};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::trace::{TraceEvent, TraceKind};
use crate::SimError;

/// Slack for comparing accumulated float clocks against commit instants.
const TIME_EPS_MS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct DeviceConfig {
    pub hv_rail_volts: f64,
    /// Relay operate/release time. Ignored for direct-drive topologies,
    /// whose outputs follow at the next step.
    pub actuation_delay_ms: f64,
    pub mems_threshold_volts: f64,
    pub adc_noise_counts: u16,
    pub seed: u64,
    /// Serial pacing; `None` delivers host bytes without line delay.
    pub pace_baud: Option<u32>,
    pub trace: bool,
}

impl Default for DeviceConfig {
    fn default() -> Self {
        Self {
            hv_rail_volts: 90.0,
            actuation_delay_ms: 1.0,
            mems_threshold_volts: 85.0,
            adc_noise_counts: 0,
            seed: 0,
            pace_baud: None,
            trace: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelayModel {
    pub coil_energized: bool,
    pub contact_closed: bool,
    pub actuation_delay_ms: f64,
    coil_changed_ms: f64,
    seq: u64,
}

impl RelayModel {
    fn new(actuation_delay_ms: f64) -> Self {
        Self {
            coil_energized: false,
            contact_closed: false,
            actuation_delay_ms,
            coil_changed_ms: 0.0,
            seq: 0,
        }
    }

    pub fn pending(&self) -> bool {
        self.coil_energized != self.contact_closed
    }

    fn commit_at(&self) -> f64 {
        self.coil_changed_ms + self.actuation_delay_ms
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemsChannel {
    pub gate_line: u8,
    pub threshold_volts: f64,
    pub conducting: bool,
}

/// Electrical model of the controller box and the switch it drives.
#[derive(Debug, Clone)]
pub struct VirtualDevice {
    pub clock_ms: f64,
    pub hv_rail_volts: f64,
    pub relays: BTreeMap<u8, RelayModel>,
    pub pin_volts: BTreeMap<u8, f64>,
    pub buttons_down: BTreeSet<usize>,
    pub ladder: LadderConfig,
    pub topology: Topology,
    pub channels: Vec<MemsChannel>,
    pub adc_noise_counts: u16,
    pub led_frame: PixelFrame,
    rng: ChaCha8Rng,
    rx: VecDeque<(f64, u8)>,
    rx_last_ms: f64,
    byte_time_ms: Option<f64>,
    tx: Vec<u8>,
    trace_enabled: bool,
    trace: Vec<TraceEvent>,
    write_seq: u64,
}

impl VirtualDevice {
    pub fn new(topology: Topology, ladder: LadderConfig, config: &DeviceConfig) -> Self {
        let delay = match topology.drive_mode {
            DriveMode::Relay => config.actuation_delay_ms,
            DriveMode::Direct => 0.0,
        };
        let lines = topology.all_lines();
        let relays = lines.iter().map(|&l| (l, RelayModel::new(delay))).collect();
        let pin_volts = topology.line_pin.values().map(|&p| (p, 0.0)).collect();
        let channels = lines
            .iter()
            .map(|&gate_line| MemsChannel {
                gate_line,
                threshold_volts: config.mems_threshold_volts,
                conducting: false,
            })
            .collect();
        let led_frame = PixelFrame::off(topology.n_pixels());
        Self {
            clock_ms: 0.0,
            hv_rail_volts: config.hv_rail_volts,
            relays,
            pin_volts,
            buttons_down: BTreeSet::new(),
            ladder,
            topology,
            channels,
            adc_noise_counts: config.adc_noise_counts,
            led_frame,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            rx: VecDeque::new(),
            rx_last_ms: 0.0,
            byte_time_ms: config.pace_baud.map(|baud| 10_000.0 / baud as f64),
            tx: Vec::new(),
            trace_enabled: config.trace,
            trace: Vec::new(),
            write_seq: 0,
        }
    }

    fn log(&mut self, t_ms: f64, kind: TraceKind, payload: String) {
        if self.trace_enabled {
            self.trace.push(TraceEvent { t_ms, kind, payload });
        }
    }

    fn check_button(&self, button: usize) -> Result<(), SimError> {
        if button == 0 || button > self.ladder.n_buttons {
            return Err(SimError::ButtonOutOfRange { button, n_buttons: self.ladder.n_buttons });
        }
        Ok(())
    }

    pub fn press_button(&mut self, button: usize) -> Result<(), SimError> {
        self.check_button(button)?;
        if self.buttons_down.insert(button) {
            self.log(self.clock_ms, TraceKind::Press, button.to_string());
        }
        Ok(())
    }

    pub fn release_button(&mut self, button: usize) -> Result<(), SimError> {
        self.check_button(button)?;
        if self.buttons_down.remove(&button) {
            self.log(self.clock_ms, TraceKind::Release, button.to_string());
        }
        Ok(())
    }

    pub fn release_all(&mut self) {
        for b in std::mem::take(&mut self.buttons_down) {
            self.log(self.clock_ms, TraceKind::Release, b.to_string());
        }
    }

    /// Ladder pin voltage. With several buttons held, the one nearest the
    /// supply dominates.
    pub fn ladder_volts(&self) -> f64 {
        match self.buttons_down.first() {
            Some(&k) => self.ladder.button_volts(k),
            None => 0.0,
        }
    }

    pub fn sample_adc(&mut self) -> u16 {
        let code = volts_to_code(self.ladder_volts(), self.ladder.vref_volts, self.ladder.adc_bits);
        if self.adc_noise_counts == 0 {
            return code;
        }
        let n = self.adc_noise_counts as i32;
        let jitter = self.rng.random_range(-n..=n);
        (code as i32 + jitter).clamp(0, self.ladder.max_code() as i32) as u16
    }

    pub fn write_line(&mut self, line: u8, high: bool) -> Result<(), SimError> {
        let now = self.clock_ms;
        self.write_seq += 1;
        let seq = self.write_seq;
        let relay = self.relays.get_mut(&line).ok_or(SimError::UnknownLine(line))?;
        if relay.coil_energized == high {
            return Ok(());
        }
        relay.coil_energized = high;
        relay.coil_changed_ms = now;
        relay.seq = seq;
        self.log(now, TraceKind::Coil, format!("{line} {}", if high { "on" } else { "off" }));
        Ok(())
    }

    /// Advances simulated time, committing every relay whose actuation delay
    /// has fully elapsed (closed interval), in the order the instants occur.
    pub fn step(&mut self, dt_ms: f64) -> Result<(), SimError> {
        if !(dt_ms > 0.0) || !dt_ms.is_finite() {
            return Err(SimError::InvalidStep(dt_ms));
        }
        let end = self.clock_ms + dt_ms;
        let mut due: Vec<(f64, u64, u8)> = self
            .relays
            .iter()
            .filter(|(_, r)| r.pending() && r.commit_at() <= end + TIME_EPS_MS)
            .map(|(&line, r)| (r.commit_at(), r.seq, line))
            .collect();
        due.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for (t, _, line) in due {
            let relay = self.relays.get_mut(&line).expect("due relay exists");
            relay.contact_closed = relay.coil_energized;
            let state = if relay.contact_closed { "closed" } else { "open" };
            self.log(t, TraceKind::Contact, format!("{line} {state}"));
        }
        self.clock_ms = end;
        self.recompute();
        Ok(())
    }

    fn recompute(&mut self) {
        for (&line, relay) in &self.relays {
            let pin = self.topology.line_pin[&line];
            let v = if relay.contact_closed { self.hv_rail_volts } else { 0.0 };
            self.pin_volts.insert(pin, v);
        }
        for ch in &mut self.channels {
            let pin = self.topology.line_pin[&ch.gate_line];
            ch.conducting = self.pin_volts[&pin] >= ch.threshold_volts;
        }
    }

    pub fn gate_volts(&self, line: u8) -> f64 {
        self.pin_volts[&self.topology.line_pin[&line]]
    }

    pub fn closed_lines(&self) -> BTreeSet<u8> {
        self.relays.iter().filter(|(_, r)| r.contact_closed).map(|(&l, _)| l).collect()
    }

    pub fn conducting_lines(&self) -> BTreeSet<u8> {
        self.channels.iter().filter(|c| c.conducting).map(|c| c.gate_line).collect()
    }

    /// Ports whose every gate conducts.
    pub fn conducting_ports(&self) -> Vec<u8> {
        let on = self.conducting_lines();
        self.topology
            .port_lines
            .iter()
            .filter(|(_, lines)| lines.is_subset(&on))
            .map(|(&p, _)| p)
            .collect()
    }

    /// The single RF path that is fully on and has no stray gates from other
    /// ports, if any.
    pub fn active_path(&self) -> Option<u8> {
        let on = self.conducting_lines();
        match self.conducting_ports().as_slice() {
            [p] if &on == &self.topology.port_lines[p] => Some(*p),
            _ => None,
        }
    }

    pub fn has_pending_relays(&self) -> bool {
        self.relays.values().any(RelayModel::pending)
    }

    /// Queues bytes from the host. With pacing each byte becomes readable
    /// one character time after the previous one finished arriving.
    pub fn inject_rx(&mut self, bytes: &[u8]) {
        for &b in bytes {
            let at = match self.byte_time_ms {
                Some(bt) => self.clock_ms.max(self.rx_last_ms) + bt,
                None => self.clock_ms,
            };
            self.rx_last_ms = at;
            self.rx.push_back((at, b));
        }
    }

    pub fn rx_pending(&self) -> usize {
        self.rx.len()
    }

    /// Bytes the firmware has written since the last call.
    pub fn take_tx(&mut self) -> Vec<u8> {
        std::mem::take(&mut self.tx)
    }

    pub fn trace(&self) -> &[TraceEvent] {
        &self.trace
    }

    pub fn take_trace(&mut self) -> Vec<TraceEvent> {
        std::mem::take(&mut self.trace)
    }
}

impl HardwareBoundary for VirtualDevice {
    fn read_adc(&mut self) -> u16 {
        self.sample_adc()
    }

    fn write_line(&mut self, line: u8, level: Level) {
        if let Err(e) = VirtualDevice::write_line(self, line, level == Level::High) {
            log::warn!("firmware wrote a line outside the topology: {e}");
        }
    }

    fn show_frame(&mut self, frame: &PixelFrame) {
        self.led_frame = frame.clone();
        let lit = frame.lit_indices();
        self.log(self.clock_ms, TraceKind::Frame, format!("{lit:?}"));
    }

    fn now_ms(&self) -> u64 {
        self.clock_ms.floor() as u64
    }

    fn serial_read(&mut self) -> Option<u8> {
        let &(at, b) = self.rx.front()?;
        if at > self.clock_ms + TIME_EPS_MS {
            return None;
        }
        self.rx.pop_front();
        self.log(at, TraceKind::Rx, format!("{b:#04x}"));
        Some(b)
    }

    fn serial_write(&mut self, bytes: &[u8]) {
        self.tx.extend_from_slice(bytes);
        let text = String::from_utf8_lossy(bytes).escape_debug().to_string();
        self.log(self.clock_ms, TraceKind::Tx, text);
    }

    fn delay_ms(&mut self, ms: u32) {
        if ms > 0 {
            self.step(ms as f64).expect("positive step");
        }
    }
}

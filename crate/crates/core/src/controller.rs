//! The controller state machine.
//!
//! [`Controller::tick`] is one pass of the firmware main loop. It drains the
//! serial receive buffer, polls the button ladder with a two-sample debounce,
//! resolves the winning selection for this pass and drives the outputs
//! through a [`HardwareBoundary`]. The selection logic itself
//! ([`apply_selection`]) is a pure function returning the effect trace.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::ladder::{decode_button, ThresholdTable};
use crate::led::{LedColors, PixelFrame};
use crate::protocol::{parse_serial_byte, render_event_line, render_state_line, Command};
use crate::topology::Topology;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ControllerError {
    #[error("port {port} out of range 1..={n_ports}")]
    PortOutOfRange { port: u8, n_ports: u8 },
    #[error("ladder decodes {buttons} buttons but topology {topology} has {ports} ports")]
    ButtonCountMismatch { buttons: usize, ports: u8, topology: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Level {
    Low,
    High,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OutputAction {
    SetLine { line: u8, level: Level },
    ShowFrame(PixelFrame),
    SerialWrite(Vec<u8>),
}

/// Everything the core needs from the board it runs on.
pub trait HardwareBoundary {
    /// Raw code from the ladder input, `0..=2^bits - 1`.
    fn read_adc(&mut self) -> u16;
    fn write_line(&mut self, line: u8, level: Level);
    fn show_frame(&mut self, frame: &PixelFrame);
    /// Monotonic milliseconds since power-up.
    fn now_ms(&self) -> u64;
    fn serial_read(&mut self) -> Option<u8>;
    fn serial_write(&mut self, bytes: &[u8]);

    /// Blocks for `ms` milliseconds. Boards with a real clock can rely on the
    /// default spin on [`now_ms`](Self::now_ms); simulated boards must
    /// override this to advance their clock.
    fn delay_ms(&mut self, ms: u32) {
        let start = self.now_ms();
        while self.now_ms().saturating_sub(start) < ms as u64 {
            std::hint::spin_loop();
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ControllerState {
    pub selected: Option<u8>,
    pub energized_lines: BTreeSet<u8>,
    pub led_frame: PixelFrame,
    pub extensions_enabled: bool,
}

impl ControllerState {
    /// Power-up state: nothing selected, every line low, every LED off.
    pub fn initial(topology: &Topology, extensions_enabled: bool) -> Self {
        Self {
            selected: None,
            energized_lines: BTreeSet::new(),
            led_frame: PixelFrame::off(topology.n_pixels()),
            extensions_enabled,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ControllerConfig {
    pub extensions: bool,
    pub debounce_ms: u32,
    pub colors: LedColors,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self { extensions: false, debounce_ms: 1, colors: LedColors::default() }
    }
}

impl ControllerConfig {
    pub fn extended() -> Self {
        Self { extensions: true, ..Self::default() }
    }
}

/// Moves the selection to `port`.
///
/// Re-selecting the current port is a no-op with no actions. Otherwise every
/// energized line is dropped before any new line is raised, then the new
/// LED frame is shown.
pub fn apply_selection(
    state: &ControllerState,
    topology: &Topology,
    port: u8,
    colors: &LedColors,
) -> Result<(ControllerState, Vec<OutputAction>), ControllerError> {
    let lines = topology
        .port_lines
        .get(&port)
        .ok_or(ControllerError::PortOutOfRange { port, n_ports: topology.n_ports })?;
    if state.selected == Some(port) {
        return Ok((state.clone(), Vec::new()));
    }

    let mut actions: Vec<OutputAction> = state
        .energized_lines
        .iter()
        .map(|&line| OutputAction::SetLine { line, level: Level::Low })
        .collect();
    actions.extend(lines.iter().map(|&line| OutputAction::SetLine { line, level: Level::High }));

    let pixel = topology.pixel_for_port(port).expect("validated topology maps every port");
    let frame = PixelFrame::single(topology.n_pixels(), pixel, *colors);
    actions.push(OutputAction::ShowFrame(frame.clone()));

    let next = ControllerState {
        selected: Some(port),
        energized_lines: lines.clone(),
        led_frame: frame,
        extensions_enabled: state.extensions_enabled,
    };
    Ok((next, actions))
}

/// Two-sample debounced read of the button ladder.
///
/// Returns a button only if a second sample, taken `debounce_ms` after the
/// first, decodes to the same button. An idle first sample returns at once.
pub fn poll_buttons<H: HardwareBoundary + ?Sized>(
    hw: &mut H,
    table: &ThresholdTable,
    debounce_ms: u32,
) -> Option<usize> {
    let first = decode_button(table, hw.read_adc())?;
    hw.delay_ms(debounce_ms);
    let second = decode_button(table, hw.read_adc())?;
    (first == second).then_some(first)
}

pub fn execute<H: HardwareBoundary + ?Sized>(hw: &mut H, actions: &[OutputAction]) {
    for action in actions {
        match action {
            OutputAction::SetLine { line, level } => hw.write_line(*line, *level),
            OutputAction::ShowFrame(frame) => hw.show_frame(frame),
            OutputAction::SerialWrite(bytes) => hw.serial_write(bytes),
        }
    }
}

/// Firmware core bound to one topology and one ladder.
#[derive(Debug, Clone)]
pub struct Controller {
    topology: Topology,
    table: ThresholdTable,
    config: ControllerConfig,
    state: ControllerState,
}

impl Controller {
    pub fn new(
        topology: Topology,
        table: ThresholdTable,
        config: ControllerConfig,
    ) -> Result<Self, ControllerError> {
        if table.n_buttons() != topology.n_ports as usize {
            return Err(ControllerError::ButtonCountMismatch {
                buttons: table.n_buttons(),
                ports: topology.n_ports,
                topology: topology.name.clone(),
            });
        }
        let state = ControllerState::initial(&topology, config.extensions);
        Ok(Self { topology, table, config, state })
    }

    pub fn state(&self) -> &ControllerState {
        &self.state
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn table(&self) -> &ThresholdTable {
        &self.table
    }

    pub fn config(&self) -> &ControllerConfig {
        &self.config
    }

    /// Drives every line low and blanks the LEDs. Call once before the
    /// first tick.
    pub fn power_on<H: HardwareBoundary + ?Sized>(&mut self, hw: &mut H) -> Vec<OutputAction> {
        self.state = ControllerState::initial(&self.topology, self.config.extensions);
        let mut actions: Vec<OutputAction> = self
            .topology
            .all_lines()
            .into_iter()
            .map(|line| OutputAction::SetLine { line, level: Level::Low })
            .collect();
        actions.push(OutputAction::ShowFrame(self.state.led_frame.clone()));
        execute(hw, &actions);
        actions
    }

    /// One main-loop pass. Returns the actions it performed.
    ///
    /// The last serial select of the pass wins, unless a debounced button
    /// press is confirmed in the same pass, in which case the button wins.
    /// Queries are answered after the selection is applied, so a `'3?'`
    /// burst reports port 3.
    pub fn tick<H: HardwareBoundary + ?Sized>(&mut self, hw: &mut H) -> Vec<OutputAction> {
        let extensions = self.config.extensions;
        let mut serial_select = None;
        let mut queries = 0usize;
        while let Some(b) = hw.serial_read() {
            match parse_serial_byte(b, self.topology.n_ports, extensions) {
                Command::Select(port) => serial_select = Some(port),
                Command::Query => queries += 1,
                Command::Noop => {}
            }
        }

        let button_port = poll_buttons(hw, &self.table, self.config.debounce_ms)
            .and_then(|b| self.topology.port_for_button(b));
        let (winner, from_button) = match button_port {
            Some(port) => (Some(port), true),
            None => (serial_select, false),
        };

        let mut actions = Vec::new();
        if let Some(port) = winner {
            // Ports come from the parser or button map, both bounded by the topology.
            let (next, effects) =
                apply_selection(&self.state, &self.topology, port, &self.config.colors)
                    .expect("winning port is in range");
            let changed = !effects.is_empty();
            self.state = next;
            actions.extend(effects);
            if changed && from_button && extensions {
                actions.push(OutputAction::SerialWrite(render_event_line(self.state.selected)));
            }
        }
        for _ in 0..queries {
            actions.push(OutputAction::SerialWrite(render_state_line(self.state.selected)));
        }

        execute(hw, &actions);
        actions
    }
}

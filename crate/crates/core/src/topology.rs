//! Switch network descriptions.
//!
//! A topology says which control lines each port energizes, where each port's
//! indicator sits on the LED chain, which panel button selects which port and
//! which DSUB pin each control line leaves on. Files are JSON with integer map
//! keys written as strings:
//!
//! ```json
//! {
//!   "name": "sp9t-custom",
//!   "n_ports": 9,
//!   "drive_mode": "relay",
//!   "port_lines": { "1": [1], "2": [2] },
//!   "port_pixel": { "1": 0, "2": 1 },
//!   "button_port": { "1": 1, "2": 2 },
//!   "line_pin": { "1": 1, "2": 2 }
//! }
//! ```
//!
//! The preset pin maps are identity (line `k` leaves on pin `k`) and the
//! dual-SP9T preset drives port `k` on lines `k` and `k + 9`. Both are wiring
//! assumptions; edit a copy of the preset file if your harness differs.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MAX_LINES: u8 = 24;
pub const MAX_DSUB_PIN: u8 = 25;

#[derive(Debug, Error)]
pub enum TopologyError {
    #[error("topology parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("topology validation error: {0}")]
    Validation(String),
    #[error("port {port} out of range 1..={n_ports}")]
    PortOutOfRange { port: u8, n_ports: u8 },
    #[error("unknown preset {0:?}")]
    UnknownPreset(String),
    #[error("reading topology file: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DriveMode {
    /// Lines switch a shared high-voltage rail through relays.
    Relay,
    /// Lines drive the switch's own logic inputs directly.
    Direct,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Topology {
    pub name: String,
    pub n_ports: u8,
    pub drive_mode: DriveMode,
    pub port_lines: BTreeMap<u8, BTreeSet<u8>>,
    pub port_pixel: BTreeMap<u8, usize>,
    pub button_port: BTreeMap<u8, u8>,
    pub line_pin: BTreeMap<u8, u8>,
}

impl Topology {
    pub fn ports(&self) -> impl Iterator<Item = u8> {
        1..=self.n_ports
    }

    /// Every control line used by some port.
    pub fn all_lines(&self) -> BTreeSet<u8> {
        self.port_lines.values().flatten().copied().collect()
    }

    /// The port whose line set contains `line`.
    pub fn port_of_line(&self, line: u8) -> Option<u8> {
        self.port_lines.iter().find(|(_, ls)| ls.contains(&line)).map(|(p, _)| *p)
    }

    pub fn pixel_for_port(&self, port: u8) -> Option<usize> {
        self.port_pixel.get(&port).copied()
    }

    pub fn port_for_button(&self, button: usize) -> Option<u8> {
        u8::try_from(button).ok().and_then(|b| self.button_port.get(&b).copied())
    }

    pub fn n_pixels(&self) -> usize {
        self.n_ports as usize
    }

    pub fn validate(&self) -> Result<(), TopologyError> {
        let fail = |msg: String| Err(TopologyError::Validation(msg));
        if self.n_ports == 0 {
            return fail("n_ports must be at least 1".into());
        }
        let ports: BTreeSet<u8> = self.ports().collect();

        if self.port_lines.keys().copied().collect::<BTreeSet<_>>() != ports {
            return fail(format!("port_lines must have exactly the keys 1..={}", self.n_ports));
        }
        let mut owner: BTreeMap<u8, u8> = BTreeMap::new();
        for (&port, lines) in &self.port_lines {
            if lines.is_empty() {
                return fail(format!("port {port} has no control line"));
            }
            for &line in lines {
                if line == 0 || line > MAX_LINES {
                    return fail(format!("control line {line} out of range 1..={MAX_LINES}"));
                }
                if let Some(other) = owner.insert(line, port) {
                    return fail(format!(
                        "shared control line {line} (ports {other} and {port})"
                    ));
                }
            }
        }
        if owner.len() > MAX_LINES as usize {
            return fail(format!("more than {MAX_LINES} control lines"));
        }

        if self.port_pixel.keys().copied().collect::<BTreeSet<_>>() != ports {
            return fail(format!("port_pixel must have exactly the keys 1..={}", self.n_ports));
        }
        let pixels: BTreeSet<usize> = self.port_pixel.values().copied().collect();
        if pixels != (0..self.n_pixels()).collect() {
            return fail(format!(
                "port_pixel must be a bijection onto 0..{}",
                self.n_pixels()
            ));
        }

        if self.button_port.keys().copied().collect::<BTreeSet<_>>() != ports {
            return fail(format!("button_port must have exactly the keys 1..={}", self.n_ports));
        }
        if self.button_port.values().copied().collect::<BTreeSet<_>>() != ports {
            return fail("button_port must be a bijection onto the ports".into());
        }

        let used: BTreeSet<u8> = owner.keys().copied().collect();
        if self.line_pin.keys().copied().collect::<BTreeSet<_>>() != used {
            return fail("line_pin must map exactly the control lines in use".into());
        }
        let mut pins = BTreeSet::new();
        for (&line, &pin) in &self.line_pin {
            if pin == 0 || pin > MAX_DSUB_PIN {
                return fail(format!("DSUB pin {pin} for line {line} out of range 1..={MAX_DSUB_PIN}"));
            }
            if !pins.insert(pin) {
                return fail(format!("DSUB pin {pin} assigned to more than one line"));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("topology serializes")
    }

    /// Loads a preset by name, or a topology file by path.
    pub fn resolve(name_or_path: &str) -> Result<Topology, TopologyError> {
        if let Some(t) = preset(name_or_path) {
            return Ok(t);
        }
        let path = Path::new(name_or_path);
        if path.exists() {
            let text = std::fs::read_to_string(path)?;
            return load_topology(&text);
        }
        Err(TopologyError::UnknownPreset(name_or_path.to_string()))
    }
}

pub fn load_topology(document: &str) -> Result<Topology, TopologyError> {
    let t: Topology = serde_json::from_str(document)?;
    t.validate()?;
    Ok(t)
}

pub fn lines_for_port(t: &Topology, port: u8) -> Result<&BTreeSet<u8>, TopologyError> {
    t.port_lines
        .get(&port)
        .ok_or(TopologyError::PortOutOfRange { port, n_ports: t.n_ports })
}

fn linear(name: &str, n_ports: u8, drive_mode: DriveMode, poles: u8) -> Topology {
    let port_lines = (1..=n_ports)
        .map(|p| (p, (0..poles).map(|pole| p + pole * n_ports).collect()))
        .collect::<BTreeMap<u8, BTreeSet<u8>>>();
    let line_pin = port_lines.values().flatten().map(|&l| (l, l)).collect();
    Topology {
        name: name.to_string(),
        n_ports,
        drive_mode,
        port_lines,
        port_pixel: (1..=n_ports).map(|p| (p, p as usize - 1)).collect(),
        button_port: (1..=n_ports).map(|p| (p, p)).collect(),
        line_pin,
    }
}

/// The shipped configurations: two commercial modules driven directly and
/// three custom relay builds.
pub fn builtin_presets() -> Vec<Topology> {
    vec![
        linear("sp6t-cots", 6, DriveMode::Direct, 1),
        linear("sp9t-custom", 9, DriveMode::Relay, 1),
        linear("sp8t-custom", 8, DriveMode::Relay, 1),
        linear("dual-sp9t", 9, DriveMode::Relay, 2),
        linear("sp3t-cots", 3, DriveMode::Direct, 1),
    ]
}

pub fn preset(name: &str) -> Option<Topology> {
    builtin_presets().into_iter().find(|t| t.name == name)
}

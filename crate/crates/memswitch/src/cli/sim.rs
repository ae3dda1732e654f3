//! `switchsim`: run the simulated controller behind a TCP serial endpoint.
//!
//! While running, lines on stdin operate the virtual front panel:
//! `press <n>`, `release <n>`, `state`, `quit`.

use std::fs::File;
use std::io::{BufRead, BufWriter, Write};

use clap::Parser;
use memswitch_core::{ControllerConfig, Topology};
use memswitch_sim::{serve_virtual_serial, DeviceConfig, DeviceSnapshot, ServeOptions, SimRig, VirtualSerialServer};

use super::exit;

#[derive(Debug, Parser)]
#[command(name = "switchsim", about = "Simulated MEMS switch controller on a TCP serial port", version)]
pub struct Args {
    /// Topology preset name or JSON file
    #[arg(long, default_value = "sp9t-custom")]
    pub topology: String,

    /// Address to listen on, e.g. 127.0.0.1:5555
    #[arg(long)]
    pub listen: String,

    /// Pace host bytes at this baud rate (10 bits per byte)
    #[arg(long)]
    pub pace_baud: Option<u32>,

    /// Uniform ADC noise amplitude in counts
    #[arg(long, default_value_t = 0)]
    pub noise: u16,

    /// Seed for the ADC noise generator
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Write the event trace (`t_ms kind payload`) to this file
    #[arg(long)]
    pub trace: Option<String>,

    /// Enable the query/event protocol extensions in the simulated firmware
    #[arg(long)]
    pub extensions: bool,

    /// Relay actuation delay in milliseconds
    #[arg(long, default_value_t = 1.0)]
    pub actuation_delay_ms: f64,
}

fn describe(s: &DeviceSnapshot) -> String {
    let selected = s.selected.map_or("none".to_string(), |p| p.to_string());
    let path = s.active_path.map_or("none".to_string(), |p| p.to_string());
    format!(
        "t={:.1}ms selected={selected} path={path} leds={:?} buttons={:?} client={}",
        s.clock_ms,
        s.led_frame.lit_indices(),
        s.buttons_down,
        s.client_attached
    )
}

/// Applies one panel command. Returns false on `quit`.
pub fn panel_command(server: &VirtualSerialServer, line: &str, out: &mut dyn Write) -> bool {
    let mut words = line.split_whitespace();
    let reply = match (words.next(), words.next().map(str::parse::<usize>)) {
        (None, _) => return true,
        (Some("quit" | "exit"), _) => return false,
        (Some("press"), Some(Ok(n))) => server.press_button(n).map(|_| format!("pressed {n}")),
        (Some("release"), Some(Ok(n))) => server.release_button(n).map(|_| format!("released {n}")),
        (Some("state"), _) => server.snapshot().map(|s| describe(&s)),
        _ => Ok("commands: press <n> | release <n> | state | quit".to_string()),
    };
    let _ = match reply {
        Ok(text) => writeln!(out, "{text}"),
        Err(e) => writeln!(out, "error: {e}"),
    };
    true
}

pub fn run(args: &Args) -> Result<(), (i32, String)> {
    let topology = Topology::resolve(&args.topology).map_err(|e| (exit::VALIDATION, e.to_string()))?;
    let device_config = DeviceConfig {
        adc_noise_counts: args.noise,
        seed: args.seed,
        pace_baud: args.pace_baud,
        trace: args.trace.is_some(),
        actuation_delay_ms: args.actuation_delay_ms,
        ..DeviceConfig::default()
    };
    if args.pace_baud == Some(0) || !(args.actuation_delay_ms >= 0.0) {
        return Err((exit::VALIDATION, "baud must be positive and delay non-negative".into()));
    }
    let controller_config = ControllerConfig { extensions: args.extensions, ..ControllerConfig::default() };
    let rig = SimRig::new(topology.clone(), &device_config, controller_config)
        .map_err(|e| (exit::VALIDATION, e.to_string()))?;

    let mut options = ServeOptions::default();
    if let Some(path) = &args.trace {
        let file = File::create(path).map_err(|e| (exit::IO, format!("{path}: {e}")))?;
        options.trace_sink = Some(Box::new(BufWriter::new(file)));
    }
    let server = serve_virtual_serial(rig, args.listen.as_str(), options).map_err(|e| (exit::IO, e.to_string()))?;
    println!(
        "switchsim: {} ({} ports) listening on {}{}",
        topology.name,
        topology.n_ports,
        server.local_addr(),
        if args.extensions { ", extensions on" } else { "" }
    );

    let stdin = std::io::stdin();
    let stdout = std::io::stdout();
    for line in stdin.lock().lines() {
        let Ok(line) = line else { break };
        if !panel_command(&server, &line, &mut stdout.lock()) {
            server.shutdown();
            return Ok(());
        }
    }
    // No interactive panel: keep serving until killed.
    loop {
        std::thread::park();
    }
}

pub fn main() -> i32 {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => exit::OK,
        Err((code, msg)) => {
            eprintln!("switchsim: {msg}");
            code
        }
    }
}

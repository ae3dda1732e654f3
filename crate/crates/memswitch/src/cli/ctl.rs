//! `switchctl`: drive a controller over its serial port or a simulator
//! endpoint.

use std::time::Duration;

use clap::{Parser, Subcommand};
use memswitch_core::{LadderConfig, Topology};
use memswitch_host::{connect, print_thresholds, serve_api, DeviceState, Endpoint, HostError, Probe, Session, SessionOptions};

use super::exit;

#[derive(Debug, Parser)]
#[command(name = "switchctl", about = "Control a MEMS switch controller", version)]
pub struct Args {
    /// Device endpoint: /dev/ttyACM0, COM18, serial:<path>@<baud>, host:port or tcp://host:port
    #[arg(long, env = "SWITCHCTL_ENDPOINT", global = true)]
    pub endpoint: Option<String>,

    /// Topology preset name or JSON file
    #[arg(long, default_value = "sp9t-custom", global = true)]
    pub topology: String,

    /// Never send the extension probe; treat the device as write-only
    #[arg(long, global = true)]
    pub legacy: bool,

    /// How long to wait for an answer to the extension probe
    #[arg(long, default_value_t = 200, global = true)]
    pub probe_timeout_ms: u64,

    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Select a port
    Select { port: u8 },
    /// Print the device state
    Status {
        #[arg(long)]
        json: bool,
    },
    /// Print every state change pushed by the device
    Watch,
    /// Print the ladder decode table
    Thresholds {
        #[arg(long, default_value_t = 5.0)]
        vcc: f64,
        #[arg(long, default_value_t = 9)]
        buttons: usize,
    },
    /// Serve the HTTP/WebSocket API
    Serve {
        #[arg(long)]
        http: String,
    },
}

#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn validation(message: impl ToString) -> Self {
        Self { code: exit::VALIDATION, message: message.to_string() }
    }

    fn io(message: impl ToString) -> Self {
        Self { code: exit::IO, message: message.to_string() }
    }
}

impl From<HostError> for Failure {
    fn from(e: HostError) -> Self {
        match e {
            HostError::PortOutOfRange { .. } | HostError::InvalidEndpoint(_) => Failure::validation(e),
            _ => Failure::io(e),
        }
    }
}

fn format_state(state: &DeviceState, json: bool, ports: u8) -> String {
    if json {
        serde_json::json!({
            "selected": state.selected,
            "ports": ports,
            "topology": state.topology_name,
            "source": state.source,
        })
        .to_string()
    } else {
        let selected = match state.selected {
            0 => "none".to_string(),
            n => n.to_string(),
        };
        format!("{}: port {selected} ({})", state.topology_name, state.source)
    }
}

fn open(args: &Args, topology: &Topology) -> Result<Session, Failure> {
    let given = args
        .endpoint
        .as_deref()
        .ok_or_else(|| Failure::validation("no endpoint given (use --endpoint or SWITCHCTL_ENDPOINT)"))?;
    let endpoint: Endpoint = given.parse()?;
    let options = SessionOptions {
        probe: if args.legacy { Probe::Legacy } else { Probe::Auto },
        probe_timeout: Duration::from_millis(args.probe_timeout_ms),
        ..SessionOptions::default()
    };
    Ok(connect(&endpoint, topology, options)?)
}

/// Runs one command, writing its normal output to `out`.
pub fn execute(args: &Args, out: &mut dyn std::io::Write) -> Result<(), Failure> {
    if let Cmd::Thresholds { vcc, buttons } = args.command {
        let cfg = LadderConfig { vcc_volts: vcc, n_buttons: buttons, ..LadderConfig::default() };
        let table = print_thresholds(&cfg).map_err(Failure::validation)?;
        write!(out, "{table}").map_err(Failure::io)?;
        return Ok(());
    }

    let topology = Topology::resolve(&args.topology).map_err(Failure::validation)?;
    match &args.command {
        Cmd::Select { port } => {
            if *port == 0 || *port > topology.n_ports {
                return Err(HostError::PortOutOfRange { port: *port, n_ports: topology.n_ports }.into());
            }
            let mut session = open(args, &topology)?;
            let state = session.select_port(*port)?;
            writeln!(out, "{}", format_state(&state, false, topology.n_ports)).map_err(Failure::io)?;
        }
        Cmd::Status { json } => {
            let mut session = open(args, &topology)?;
            let state = session.get_state()?;
            writeln!(out, "{}", format_state(&state, *json, topology.n_ports)).map_err(Failure::io)?;
        }
        Cmd::Watch => {
            let mut session = open(args, &topology)?;
            writeln!(out, "{}", format_state(session.state(), false, topology.n_ports)).map_err(Failure::io)?;
            if session.mode() == memswitch_host::Mode::Legacy {
                return Err(Failure::io("device does not push state changes (legacy firmware)"));
            }
            loop {
                if let Some(state) = session.poll_events(Duration::from_millis(100))? {
                    writeln!(out, "{}", format_state(&state, false, topology.n_ports)).map_err(Failure::io)?;
                    out.flush().map_err(Failure::io)?;
                }
            }
        }
        Cmd::Serve { http } => {
            let session = open(args, &topology)?;
            let runtime = tokio::runtime::Runtime::new().map_err(Failure::io)?;
            runtime.block_on(async {
                let server = serve_api(session, http).await.map_err(Failure::io)?;
                writeln!(out, "serving on http://{}", server.local_addr()).map_err(Failure::io)?;
                out.flush().map_err(Failure::io)?;
                let _ = tokio::signal::ctrl_c().await;
                server.shutdown().await;
                Ok::<_, Failure>(())
            })?;
        }
        Cmd::Thresholds { .. } => unreachable!(),
    }
    Ok(())
}

pub fn main() -> i32 {
    let args = Args::parse();
    let stdout = std::io::stdout();
    match execute(&args, &mut stdout.lock()) {
        Ok(()) => exit::OK,
        Err(f) => {
            eprintln!("switchctl: {}", f.message);
            f.code
        }
    }
}

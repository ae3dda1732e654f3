// Host driver talking to the simulator over its TCP serial endpoint.
//
// ```bash
// cargo run -p memswitch --example virtual_serial_port
// ```

use std::time::Duration;

use memswitch::core::topology::preset;
use memswitch::core::ControllerConfig;
use memswitch::host::{connect, Endpoint, SessionOptions};
use memswitch::sim::{serve_virtual_serial, DeviceConfig, ServeOptions, SimRig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let topology = preset("sp9t-custom").expect("preset exists");
    let device = DeviceConfig { pace_baud: Some(9600), ..DeviceConfig::default() };
    let rig = SimRig::new(topology.clone(), &device, ControllerConfig::extended())?;
    let server = serve_virtual_serial(rig, "127.0.0.1:0", ServeOptions::default())?;
    println!("simulator on {}", server.local_addr());

    let endpoint = Endpoint::Network(server.local_addr().to_string());
    let mut session = connect(&endpoint, &topology, SessionOptions::default())?;
    println!("connected in {:?} mode, state {:?}", session.mode(), session.state());

    let state = session.select_port(4)?;
    println!("selected: {state:?}");

    server.press_button(6)?;
    for _ in 0..50 {
        if let Some(state) = session.poll_events(Duration::from_millis(20))? {
            println!("panel press pushed: {state:?}");
            break;
        }
    }
    server.release_button(6)?;

    let snap = server.snapshot()?;
    println!("device: path {:?}, leds {:?}", snap.active_path, snap.led_frame.lit_indices());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}

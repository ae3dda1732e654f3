// A write-only session against firmware without protocol extensions,
// with the wire transcript captured.
//
// ```bash
// cargo run -p memswitch --example legacy_session
// ```

use memswitch::core::topology::preset;
use memswitch::core::ControllerConfig;
use memswitch::harness::RigWire;
use memswitch::host::{Session, SessionOptions, TranscriptWire};
use memswitch::sim::{DeviceConfig, SimRig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let topology = preset("sp9t-custom").expect("preset exists");
    let rig = SimRig::new(topology.clone(), &DeviceConfig::default(), ControllerConfig::default())?;
    let wire = RigWire::new(rig);
    let (recorded, transcript) = TranscriptWire::new(wire.clone());

    // The default probe sends one '?', which old firmware ignores; after
    // 200 ms of silence the session falls back to shadow mode.
    let mut session = Session::attach(Box::new(recorded), &topology, SessionOptions::default())?;
    println!("mode {:?}", session.mode());
    for port in [2, 5, 5] {
        let state = session.select_port(port)?;
        println!("select {port}: {:?} ({})", state.selected, state.source);
    }
    wire.rig().run_for(5.0);

    let t = transcript.lock().unwrap();
    println!("host -> device: {:02x?}", t.to_device);
    println!("device -> host: {:02x?}", t.from_device);
    println!("active path: {:?}", wire.rig().device.active_path());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}

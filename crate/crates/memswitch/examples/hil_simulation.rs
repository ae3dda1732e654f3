// The firmware core against the electrical simulator.
//
// ```bash
// cargo run -p memswitch --example hil_simulation
// ```

use memswitch::core::topology::preset;
use memswitch::core::ControllerConfig;
use memswitch::sim::{DeviceConfig, SimRig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let device = DeviceConfig { trace: true, adc_noise_counts: 2, seed: 42, ..DeviceConfig::default() };
    let mut rig = SimRig::new(preset("dual-sp9t").expect("preset exists"), &device, ControllerConfig::extended())?;

    rig.device.inject_rx(b"3");
    rig.run_for(5.0);
    println!(
        "after '3': path {:?}, gates {:?}, pin 3 = {} V, pin 12 = {} V",
        rig.device.active_path(),
        rig.device.conducting_lines(),
        rig.device.pin_volts[&3],
        rig.device.pin_volts[&12]
    );

    rig.device.press_button(8)?;
    rig.run_for(5.0);
    rig.device.release_all();
    rig.run_for(5.0);
    println!(
        "after panel button 8: path {:?}, device pushed {:?}",
        rig.device.active_path(),
        String::from_utf8_lossy(&rig.device.take_tx())
    );

    println!("trace:");
    for event in rig.device.trace() {
        println!("  {event}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}

// Built-in topologies and the JSON file format.
//
// ```bash
// cargo run -p memswitch --example topology_files
// ```

use memswitch::core::topology::preset;
use memswitch::core::{builtin_presets, lines_for_port, load_topology};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    for t in builtin_presets() {
        let lines: Vec<_> = t.ports().map(|p| lines_for_port(&t, p).map(|s| s.len())).collect::<Result<_, _>>()?;
        println!(
            "{:<12} {} ports, {:?} drive, {} lines ({:?} per port)",
            t.name,
            t.n_ports,
            t.drive_mode,
            t.all_lines().len(),
            lines
        );
    }

    let dual = preset("dual-sp9t").expect("preset exists");
    println!("dual-sp9t port 3 energizes {:?}", lines_for_port(&dual, 3)?);

    // A hand-written file: three throws, panel buttons in reverse order.
    let doc = r#"{
        "name": "bench-sp3t",
        "n_ports": 3,
        "drive_mode": "relay",
        "port_lines": {"1": [4], "2": [5], "3": [6]},
        "port_pixel": {"1": 2, "2": 1, "3": 0},
        "button_port": {"1": 3, "2": 2, "3": 1},
        "line_pin": {"4": 14, "5": 15, "6": 16}
    }"#;
    let bench = load_topology(doc)?;
    println!("loaded {}: button 1 selects port {:?}", bench.name, bench.port_for_button(1));

    let broken = doc.replace(r#""2": [5]"#, r#""2": [4]"#);
    println!("broken file: {}", load_topology(&broken).unwrap_err());

    println!("{}", preset("sp6t-cots").expect("preset exists").to_json());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}

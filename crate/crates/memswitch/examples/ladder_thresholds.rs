// Decode table for a resistor-ladder button panel.
//
// ```bash
// cargo run -p memswitch --example ladder_thresholds
// ```

use memswitch::core::{build_thresholds, decode_button, LadderConfig};
use memswitch::host::print_thresholds;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    // Nine buttons on 10 kΩ rungs over a 100 kΩ pull-down, 10-bit ADC at 5 V.
    let cfg = LadderConfig::default();
    print!("{}", print_thresholds(&cfg)?);

    let table = build_thresholds(&cfg)?;
    for code in [0, 270, 538, 553, 554, 930, 1023] {
        println!("code {code:>4} -> {:?}", decode_button(&table, code));
    }

    // 24 buttons still separate at 10 bits...
    let big = LadderConfig::with_buttons(24);
    let t = build_thresholds(&big)?;
    println!("24 buttons: codes {} .. {}", t.nominal(1), t.nominal(24));

    // ...but not with a pull-down too close to the rung value.
    let cramped = LadderConfig { r_pulldown_ohms: 30_000.0, ..big };
    println!("cramped ladder: {}", build_thresholds(&cramped).unwrap_err());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}

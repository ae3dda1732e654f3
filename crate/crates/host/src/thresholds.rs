use std::fmt::Write;

use memswitch_core::{build_thresholds, LadderConfig, LadderError};

/// Per-button table of nominal pin voltage, ADC code and decode band, with a
/// final row for the no-press band.
pub fn print_thresholds(cfg: &LadderConfig) -> Result<String, LadderError> {
    let table = build_thresholds(cfg)?;
    let mut out = String::new();
    writeln!(out, "{:<7} {:>8} {:>6}  band", "button", "volts", "code").unwrap();
    for k in 1..=table.n_buttons() {
        let (lo, hi) = table.band(k);
        writeln!(
            out,
            "{:<7} {:>8.4} {:>6}  [{lo}, {hi}]",
            k,
            table.nominal_volts[k - 1],
            table.nominal(k)
        )
        .unwrap();
    }
    let (lo, hi) = table.no_press_band();
    writeln!(out, "{:<7} {:>8.4} {:>6}  [{lo}, {hi}]", "none", 0.0, 0).unwrap();
    Ok(out)
}

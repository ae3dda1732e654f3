//! Resistor-ladder button decoding.
//!
//! Button `k` closes a path from the supply through `k` ladder resistors to
//! the analog pin, which is held to ground by a pull-down. The pin therefore
//! sits at `vcc * R_pd / (R_pd + k * R_ladder)` while the button is held and
//! at 0 V otherwise. Decision boundaries are derived from that divider rather
//! than from bench measurements.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest ladder the relay board can address.
pub const MAX_BUTTONS: usize = 24;

/// Smallest allowed `r_pulldown_ohms / r_ladder_ohms`.
pub const MIN_SEPARATION_RATIO: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LadderError {
    #[error("invalid ladder configuration: {0}")]
    ConfigInvalid(String),
}

/// Electrical description of the single-pin button network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderConfig {
    pub vcc_volts: f64,
    pub vref_volts: f64,
    pub adc_bits: u32,
    pub r_ladder_ohms: f64,
    pub r_pulldown_ohms: f64,
    pub n_buttons: usize,
}

impl Default for LadderConfig {
    fn default() -> Self {
        Self {
            vcc_volts: 5.0,
            vref_volts: 5.0,
            adc_bits: 10,
            r_ladder_ohms: 10_000.0,
            r_pulldown_ohms: 100_000.0,
            n_buttons: 9,
        }
    }
}

impl LadderConfig {
    /// Default electrical values with a different button count.
    pub fn with_buttons(n_buttons: usize) -> Self {
        Self { n_buttons, ..Self::default() }
    }

    pub fn max_code(&self) -> u16 {
        ((1u32 << self.adc_bits) - 1) as u16
    }

    pub fn validate(&self) -> Result<(), LadderError> {
        let bad = |msg: String| Err(LadderError::ConfigInvalid(msg));
        if !(self.vcc_volts.is_finite() && self.vcc_volts > 0.0) {
            return bad(format!("vcc_volts must be > 0, got {}", self.vcc_volts));
        }
        if !(self.vref_volts.is_finite() && self.vref_volts > 0.0) {
            return bad(format!("vref_volts must be > 0, got {}", self.vref_volts));
        }
        if !(8..=16).contains(&self.adc_bits) {
            return bad(format!("adc_bits must be in 8..=16, got {}", self.adc_bits));
        }
        if !(self.r_ladder_ohms.is_finite() && self.r_ladder_ohms > 0.0) {
            return bad(format!("r_ladder_ohms must be > 0, got {}", self.r_ladder_ohms));
        }
        if !(self.r_pulldown_ohms.is_finite() && self.r_pulldown_ohms > 0.0) {
            return bad(format!("r_pulldown_ohms must be > 0, got {}", self.r_pulldown_ohms));
        }
        if self.r_pulldown_ohms / self.r_ladder_ohms < MIN_SEPARATION_RATIO {
            return bad(format!(
                "r_pulldown_ohms / r_ladder_ohms must be >= {MIN_SEPARATION_RATIO}, got {}",
                self.r_pulldown_ohms / self.r_ladder_ohms
            ));
        }
        if self.n_buttons == 0 || self.n_buttons > MAX_BUTTONS {
            return bad(format!("n_buttons must be in 1..={MAX_BUTTONS}, got {}", self.n_buttons));
        }
        Ok(())
    }

    /// Pin voltage while button `k` (1-based) is held.
    pub fn button_volts(&self, k: usize) -> f64 {
        self.vcc_volts * self.r_pulldown_ohms
            / (self.r_pulldown_ohms + k as f64 * self.r_ladder_ohms)
    }
}

/// Converts a pin voltage to an ADC code: round half up, clamped to range.
pub fn volts_to_code(volts: f64, vref_volts: f64, adc_bits: u32) -> u16 {
    let max = ((1u32 << adc_bits) - 1) as f64;
    let x = (volts * max / vref_volts + 0.5).floor();
    x.clamp(0.0, max) as u16
}

/// Nominal code for button `k`, computed as a single quotient so that exact
/// half-way cases (e.g. 852.5) are not disturbed by intermediate rounding.
fn nominal_code(cfg: &LadderConfig, k: usize) -> u16 {
    let max = cfg.max_code() as f64;
    let num = cfg.vcc_volts * cfg.r_pulldown_ohms * max;
    let den = cfg.vref_volts * (cfg.r_pulldown_ohms + k as f64 * cfg.r_ladder_ohms);
    (num / den + 0.5).floor().clamp(0.0, max) as u16
}

/// ADC decision table for one ladder.
///
/// `boundaries[0]` is the top code. For `1 <= k < N`, `boundaries[k]` is the
/// cut between buttons `k` and `k + 1`; `boundaries[N]` is the cut between
/// button `N` and "no press". Button `k` owns the codes in
/// `(boundaries[k], boundaries[k - 1]]`, so a code sitting exactly on a cut
/// falls to the lower-voltage side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdTable {
    pub adc_bits: u32,
    pub nominal_volts: Vec<f64>,
    pub nominal_counts: Vec<u16>,
    pub boundaries: Vec<u16>,
}

impl ThresholdTable {
    pub fn n_buttons(&self) -> usize {
        self.nominal_counts.len()
    }

    pub fn max_code(&self) -> u16 {
        ((1u32 << self.adc_bits) - 1) as u16
    }

    /// Nominal code for button `k` (1-based).
    pub fn nominal(&self, k: usize) -> u16 {
        self.nominal_counts[k - 1]
    }

    /// Inclusive code range decoding to button `k` (1-based).
    pub fn band(&self, k: usize) -> (u16, u16) {
        (self.boundaries[k] + 1, self.boundaries[k - 1])
    }

    /// Inclusive code range decoding to "no press".
    pub fn no_press_band(&self) -> (u16, u16) {
        (0, self.boundaries[self.n_buttons()])
    }

    pub fn decode(&self, code: u16) -> Option<usize> {
        decode_button(self, code)
    }
}

pub fn build_thresholds(cfg: &LadderConfig) -> Result<ThresholdTable, LadderError> {
    cfg.validate()?;
    let n = cfg.n_buttons;
    let nominal_volts: Vec<f64> = (1..=n).map(|k| cfg.button_volts(k)).collect();
    let nominal_counts: Vec<u16> = (1..=n).map(|k| nominal_code(cfg, k)).collect();

    for (k, pair) in nominal_counts.windows(2).enumerate() {
        if pair[1] >= pair[0] {
            return Err(LadderError::ConfigInvalid(format!(
                "buttons {} and {} both map to ADC code {} or are inverted; ladder too long for {} bits",
                k + 1,
                k + 2,
                pair[1],
                cfg.adc_bits
            )));
        }
    }
    if nominal_counts[n - 1] == 0 {
        return Err(LadderError::ConfigInvalid(format!(
            "button {n} maps to ADC code 0 and cannot be told apart from no press"
        )));
    }

    let mut boundaries = Vec::with_capacity(n + 1);
    boundaries.push(cfg.max_code());
    for pair in nominal_counts.windows(2) {
        boundaries.push(((pair[0] as u32 + pair[1] as u32) / 2) as u16);
    }
    boundaries.push(nominal_counts[n - 1] / 2);

    Ok(ThresholdTable { adc_bits: cfg.adc_bits, nominal_volts, nominal_counts, boundaries })
}

/// Maps an ADC code to a button index, or `None` for the no-press band.
pub fn decode_button(table: &ThresholdTable, code: u16) -> Option<usize> {
    (1..=table.n_buttons()).find(|&k| code > table.boundaries[k])
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Integer oracle: round(vcc*Rpd*max / (vref*(Rpd + k*Rl))) half-up,
    /// evaluated exactly in u128 for integer-valued configs.
    fn oracle_code(vcc: u128, vref: u128, bits: u32, rl: u128, rpd: u128, k: u128) -> u16 {
        let max = (1u128 << bits) - 1;
        let num = vcc * rpd * max;
        let den = vref * (rpd + k * rl);
        ((2 * num + den) / (2 * den)).min(max) as u16
    }

    #[test]
    fn default_nominal_codes_match_divider_oracle() {
        let table = build_thresholds(&LadderConfig::default()).unwrap();
        let expected: Vec<u16> =
            (1..=9).map(|k| oracle_code(5, 5, 10, 10_000, 100_000, k)).collect();
        assert_eq!(table.nominal_counts, expected);
        assert_eq!(expected, vec![930, 853, 787, 731, 682, 639, 602, 568, 538]);
        assert!((table.nominal_volts[0] - 4.5455).abs() < 5e-5);
        assert!((table.nominal_volts[4] - 3.3333).abs() < 5e-5);
        assert!((table.nominal_volts[8] - 2.6316).abs() < 5e-5);
    }

    #[test]
    fn boundaries_are_floored_midpoints() {
        let table = build_thresholds(&LadderConfig::default()).unwrap();
        assert_eq!(table.boundaries, vec![1023, 891, 820, 759, 706, 660, 620, 585, 553, 269]);
    }

    #[test]
    fn spot_decodes() {
        let table = build_thresholds(&LadderConfig::default()).unwrap();
        assert_eq!(decode_button(&table, 0), None);
        assert_eq!(decode_button(&table, 930), Some(1));
        assert_eq!(decode_button(&table, 538), Some(9));
        assert_eq!(decode_button(&table, 1023), Some(1));
    }

    #[test]
    fn code_on_boundary_takes_lower_voltage_band() {
        let table = build_thresholds(&LadderConfig::default()).unwrap();
        for k in 1..9 {
            assert_eq!(decode_button(&table, table.boundaries[k]), Some(k + 1));
            assert_eq!(decode_button(&table, table.boundaries[k] + 1), Some(k));
        }
        assert_eq!(decode_button(&table, table.boundaries[9]), None);
    }

    #[test]
    fn single_button_ladder() {
        let table = build_thresholds(&LadderConfig::with_buttons(1)).unwrap();
        assert_eq!(table.boundaries.len(), 2);
        let cut = table.boundaries[1];
        assert_eq!(decode_button(&table, cut), None);
        assert_eq!(decode_button(&table, cut + 1), Some(1));
        assert_eq!(decode_button(&table, 0), None);
    }

    #[test]
    fn zero_is_no_press_for_every_size() {
        for n in 1..=MAX_BUTTONS {
            let table = build_thresholds(&LadderConfig::with_buttons(n)).unwrap();
            assert_eq!(decode_button(&table, 0), None, "n = {n}");
        }
    }

    #[test]
    fn bands_tile_the_code_range() {
        let table = build_thresholds(&LadderConfig::with_buttons(24)).unwrap();
        let (lo, mut prev_hi) = table.no_press_band();
        assert_eq!(lo, 0);
        for k in (1..=24).rev() {
            let (lo, hi) = table.band(k);
            assert_eq!(lo, prev_hi + 1);
            assert!(lo <= table.nominal(k) && table.nominal(k) <= hi);
            prev_hi = hi;
        }
        assert_eq!(prev_hi, 1023);
    }

    #[test]
    fn rejects_bad_configs() {
        let mut cfg = LadderConfig::default();
        cfg.r_pulldown_ohms = 40_000.0;
        assert!(matches!(build_thresholds(&cfg), Err(LadderError::ConfigInvalid(_))));

        let cfg = LadderConfig::with_buttons(25);
        assert!(build_thresholds(&cfg).is_err());
        let cfg = LadderConfig::with_buttons(0);
        assert!(build_thresholds(&cfg).is_err());

        let cfg = LadderConfig { adc_bits: 7, ..LadderConfig::default() };
        assert!(build_thresholds(&cfg).is_err());
        let cfg = LadderConfig { vcc_volts: 0.0, ..LadderConfig::default() };
        assert!(build_thresholds(&cfg).is_err());
    }

    #[test]
    fn saturated_ladder_is_rejected() {
        // vcc far above vref: the first buttons all clip to the top code.
        let cfg = LadderConfig { vcc_volts: 12.0, ..LadderConfig::default() };
        assert!(matches!(build_thresholds(&cfg), Err(LadderError::ConfigInvalid(_))));
    }

    #[test]
    fn five_and_a_half_volt_top_is_accepted() {
        let cfg = LadderConfig { vcc_volts: 5.5, ..LadderConfig::default() };
        let table = build_thresholds(&cfg).unwrap();
        assert_eq!(table.nominal(1), 1023);
        assert_eq!(decode_button(&table, 1023), Some(1));
    }

    #[test]
    fn volts_to_code_rounds_half_up() {
        assert_eq!(volts_to_code(0.0, 5.0, 10), 0);
        assert_eq!(volts_to_code(5.0, 5.0, 10), 1023);
        assert_eq!(volts_to_code(9.0, 5.0, 10), 1023);
        assert_eq!(volts_to_code(2.5, 5.0, 10), 512);
    }
}

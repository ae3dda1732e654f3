use memswitch_core::ladder::volts_to_code;
use memswitch_core::{build_thresholds, decode_button, LadderConfig};
use proptest::prelude::*;

/// Pin voltage for button `k` with individually specified resistors:
/// `ladder[i]` is the i-th rung from the supply.
fn divider_volts(vcc: f64, pulldown: f64, ladder: &[f64], k: usize) -> f64 {
    let upper: f64 = ladder[..k].iter().sum();
    vcc * pulldown / (pulldown + upper)
}

fn valid_config() -> impl Strategy<Value = LadderConfig> {
    (
        4.5f64..5.5,
        4.5f64..5.5,
        10u32..=16,
        1_000f64..50_000.0,
        5.0f64..20.0,
        1usize..=24,
    )
        .prop_map(|(vcc, vref, adc_bits, r_ladder_ohms, ratio, n_buttons)| LadderConfig {
            vcc_volts: vcc,
            vref_volts: vref,
            adc_bits,
            r_ladder_ohms,
            r_pulldown_ohms: r_ladder_ohms * ratio,
            n_buttons,
        })
}

proptest! {
    #[test]
    fn nominal_codes_decode_to_their_button(cfg in valid_config()) {
        // Saturating supplies are legal but may collapse the top buttons.
        let Ok(table) = build_thresholds(&cfg) else {
            prop_assume!(cfg.vcc_volts > cfg.vref_volts);
            return Ok(());
        };
        for k in 1..=cfg.n_buttons {
            prop_assert_eq!(decode_button(&table, table.nominal(k)), Some(k));
        }
        prop_assert_eq!(decode_button(&table, 0), None);
        for w in table.nominal_counts.windows(2) {
            prop_assert!(w[0] > w[1]);
        }
    }

    #[test]
    fn decode_is_total_and_monotone(cfg in valid_config()) {
        let Ok(table) = build_thresholds(&cfg) else { return Ok(()); };
        let mut last = None;
        for code in 0..=table.max_code() {
            let d = decode_button(&table, code);
            // Higher codes never decode to a higher-index button.
            if let (Some(prev), Some(cur)) = (last, d) {
                prop_assert!(cur <= prev);
            }
            if d.is_some() { last = d; }
        }
    }
}

#[test]
fn every_ten_bit_ladder_up_to_24_buttons_is_valid() {
    for n in 1..=24 {
        let cfg = LadderConfig::with_buttons(n);
        let table = build_thresholds(&cfg).unwrap();
        for w in table.nominal_counts.windows(2) {
            assert!(w[0] - w[1] >= 2, "n = {n}: {:?}", table.nominal_counts);
        }
    }
}

#[test]
fn one_percent_corners_decode_for_ladders_up_to_nine() {
    for n in 1..=9usize {
        let cfg = LadderConfig::with_buttons(n);
        let table = build_thresholds(&cfg).unwrap();
        for mask in 0u32..(1 << (n + 1)) {
            let sign = |bit: usize| if mask >> bit & 1 == 1 { 1.01 } else { 0.99 };
            let ladder: Vec<f64> = (0..n).map(|i| cfg.r_ladder_ohms * sign(i)).collect();
            let pulldown = cfg.r_pulldown_ohms * sign(n);
            for k in 1..=n {
                let v = divider_volts(cfg.vcc_volts, pulldown, &ladder, k);
                let code = volts_to_code(v, cfg.vref_volts, cfg.adc_bits);
                assert_eq!(decode_button(&table, code), Some(k), "n={n} mask={mask:b} k={k}");
            }
        }
    }
}

use memswitch::core::topology::preset;
use memswitch::core::{ControllerConfig, Topology};
use memswitch::harness::RigWire;
use memswitch::host::{Mode, Probe, Session, SessionOptions, Source, Transcript, TranscriptWire};
use memswitch::sim::{DeviceConfig, SimRig};
use proptest::prelude::*;
use std::sync::{Arc, Mutex};

fn attach(topology: &Topology, extensions: bool, probe: Probe) -> (Session, RigWire, Arc<Mutex<Transcript>>) {
    let controller = ControllerConfig { extensions, ..ControllerConfig::default() };
    let rig = SimRig::new(topology.clone(), &DeviceConfig::default(), controller).unwrap();
    let wire = RigWire::new(rig);
    let (recorded, transcript) = TranscriptWire::new(wire.clone());
    let options = SessionOptions { probe, ..SessionOptions::default() };
    let session = Session::attach(Box::new(recorded), topology, options).unwrap();
    (session, wire, transcript)
}

#[test]
fn auto_probe_detects_both_firmware_flavours() {
    let t = preset("sp9t-custom").unwrap();
    assert_eq!(attach(&t, true, Probe::Auto).0.mode(), Mode::Extended);
    assert_eq!(attach(&t, false, Probe::Auto).0.mode(), Mode::Legacy);
}

#[test]
fn legacy_select_sends_exactly_the_port_byte() {
    for t in [preset("sp9t-custom").unwrap(), preset("sp6t-cots").unwrap()] {
        let (mut session, _, transcript) = attach(&t, false, Probe::Legacy);
        for p in t.ports() {
            transcript.lock().unwrap().to_device.clear();
            session.select_port(p).unwrap();
            assert_eq!(transcript.lock().unwrap().to_device, vec![0x30 + p]);
        }
    }
}

#[test]
fn extended_select_sends_port_byte_then_query() {
    let t = preset("sp9t-custom").unwrap();
    let (mut session, wire, transcript) = attach(&t, true, Probe::Auto);
    transcript.lock().unwrap().to_device.clear();
    let state = session.select_port(8).unwrap();
    assert_eq!(transcript.lock().unwrap().to_device, b"8?".to_vec());
    assert_eq!(state.selected, 8);
    assert_eq!(state.source, Source::Queried);
    assert_eq!(wire.rig().selected(), Some(8));
}

#[test]
fn extended_state_follows_panel_presses() {
    let t = preset("sp8t-custom").unwrap();
    let (mut session, wire, _) = attach(&t, true, Probe::Auto);
    session.select_port(2).unwrap();
    {
        let mut rig = wire.rig();
        rig.device.press_button(6).unwrap();
        rig.run_for(3.0);
        rig.device.release_all();
    }
    assert_eq!(session.get_state().unwrap().selected, 6);
}

#[test]
fn out_of_range_select_never_reaches_the_wire() {
    let t = preset("sp6t-cots").unwrap();
    let (mut session, _, transcript) = attach(&t, false, Probe::Legacy);
    assert!(session.select_port(0).is_err());
    assert!(session.select_port(7).is_err());
    assert!(transcript.lock().unwrap().to_device.is_empty());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn shadow_matches_device_without_panel_activity(ports in prop::collection::vec(1u8..=9, 1..20)) {
        let t = preset("sp9t-custom").unwrap();
        let (mut session, wire, _) = attach(&t, false, Probe::Legacy);
        for p in ports {
            let state = session.select_port(p).unwrap();
            wire.rig().run_for(3.0);
            prop_assert_eq!(state.source, Source::Shadow);
            prop_assert_eq!(wire.rig().selected(), Some(state.selected));
            prop_assert_eq!(wire.rig().device.active_path(), Some(p));
        }
    }

    #[test]
    fn queried_state_matches_device(
        steps in prop::collection::vec((any::<bool>(), 1u8..=6), 1..12),
    ) {
        let t = preset("sp6t-cots").unwrap();
        let (mut session, wire, _) = attach(&t, true, Probe::Auto);
        for (press, n) in steps {
            if press {
                let mut rig = wire.rig();
                rig.device.press_button(n as usize).unwrap();
                rig.run_for(3.0);
                rig.device.release_all();
                rig.run_for(1.0);
            } else {
                session.select_port(n).unwrap();
            }
            let state = session.get_state().unwrap();
            prop_assert_eq!(wire.rig().selected(), Some(state.selected));
            prop_assert_eq!(state.selected, n);
        }
    }
}

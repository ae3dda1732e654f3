use std::net::TcpStream;
use std::time::{Duration, Instant};

use memswitch_core::topology::preset;
use memswitch_core::ControllerConfig;
use memswitch_host::{connect, Endpoint, HostError, Mode, Probe, Session, SessionOptions, Source, TranscriptWire};
use memswitch_sim::{serve_virtual_serial, DeviceConfig, ServeOptions, SimRig, VirtualSerialServer};

fn sim(extensions: bool) -> VirtualSerialServer {
    let config = ControllerConfig { extensions, ..ControllerConfig::default() };
    let rig = SimRig::new(preset("sp9t-custom").unwrap(), &DeviceConfig::default(), config).unwrap();
    serve_virtual_serial(rig, "127.0.0.1:0", ServeOptions::default()).unwrap()
}

fn endpoint(server: &VirtualSerialServer) -> Endpoint {
    Endpoint::Network(server.local_addr().to_string())
}

fn wait_until(timeout: Duration, mut f: impl FnMut() -> bool) -> bool {
    let end = Instant::now() + timeout;
    while Instant::now() < end {
        if f() {
            return true;
        }
        std::thread::sleep(Duration::from_millis(2));
    }
    false
}

#[test]
fn extended_session_reads_back_state() {
    let server = sim(true);
    let t = preset("sp9t-custom").unwrap();
    let mut s = connect(&endpoint(&server), &t, SessionOptions::default()).unwrap();
    assert_eq!(s.mode(), Mode::Extended);
    assert_eq!(s.state().selected, 0);
    assert_eq!(s.state().source, Source::Queried);

    let st = s.select_port(3).unwrap();
    assert_eq!(st.selected, 3);
    assert_eq!(st.source, Source::Queried);
    assert_eq!(s.get_state().unwrap().selected, 3);
    assert!(wait_until(Duration::from_secs(2), || server.snapshot().unwrap().active_path == Some(3)));
}

#[test]
fn legacy_session_shadows() {
    let server = sim(false);
    let t = preset("sp9t-custom").unwrap();
    let mut s = connect(&endpoint(&server), &t, SessionOptions::default()).unwrap();
    assert_eq!(s.mode(), Mode::Legacy);
    let st = s.get_state().unwrap();
    assert_eq!((st.selected, st.source), (0, Source::Shadow));
    s.select_port(5).unwrap();
    assert_eq!(s.get_state().unwrap().selected, 5);
    assert!(wait_until(Duration::from_secs(2), || server.snapshot().unwrap().active_path == Some(5)));
}

#[test]
fn panel_press_reaches_host() {
    let server = sim(true);
    let t = preset("sp9t-custom").unwrap();
    let mut s = connect(&endpoint(&server), &t, SessionOptions::default()).unwrap();
    server.press_button(8).unwrap();
    let mut seen = None;
    assert!(wait_until(Duration::from_secs(2), || {
        seen = s.poll_events(Duration::from_millis(10)).unwrap();
        seen.is_some()
    }));
    assert_eq!(seen.unwrap().selected, 8);
    server.release_button(8).unwrap();
    assert_eq!(s.get_state().unwrap().selected, 8);
}

#[test]
fn reselect_still_writes_the_byte() {
    let server = sim(false);
    let t = preset("sp9t-custom").unwrap();
    let stream = TcpStream::connect(server.local_addr()).unwrap();
    let (wire, transcript) = TranscriptWire::new(stream);
    let opts = SessionOptions { probe: Probe::Legacy, ..SessionOptions::default() };
    let mut s = Session::attach(Box::new(wire), &t, opts).unwrap();
    s.select_port(2).unwrap();
    s.select_port(2).unwrap();
    assert_eq!(transcript.lock().unwrap().to_device, b"22");
}

#[test]
fn second_host_gets_busy() {
    let server = sim(true);
    let t = preset("sp9t-custom").unwrap();
    let _first = connect(&endpoint(&server), &t, SessionOptions::default()).unwrap();
    let err = connect(&endpoint(&server), &t, SessionOptions::default()).unwrap_err();
    assert!(matches!(err, HostError::Busy), "{err:?}");
}

#[test]
fn link_loss_surfaces_as_error() {
    let server = sim(true);
    let t = preset("sp9t-custom").unwrap();
    let mut s = connect(&endpoint(&server), &t, SessionOptions::default()).unwrap();
    server.shutdown();
    let mut failed = false;
    for _ in 0..20 {
        match s.select_port(1) {
            Err(e) => {
                assert!(e.is_link_loss() || matches!(e, HostError::ReadTimeout), "{e:?}");
                failed = true;
                break;
            }
            Ok(_) => std::thread::sleep(Duration::from_millis(10)),
        }
    }
    assert!(failed);
}

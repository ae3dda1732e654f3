macro_rules! example_test {
    ($module:ident, $file:literal) => {
        mod $module {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", $file));
        }

        #[test]
        fn $module() {
            $module::run_example().expect(concat!($file, " should run"));
        }
    };
}

example_test!(ladder_thresholds, "ladder_thresholds.rs");
example_test!(topology_files, "topology_files.rs");
example_test!(firmware_core, "firmware_core.rs");
example_test!(hil_simulation, "hil_simulation.rs");
example_test!(virtual_serial_port, "virtual_serial_port.rs");
example_test!(http_api, "http_api.rs");
example_test!(legacy_session, "legacy_session.rs");

// Running the firmware core on your own board.
//
// Implement `HardwareBoundary` for the target and call `tick` from the
// main loop. This board just prints what the core asks of it.
//
// ```bash
// cargo run -p memswitch --example firmware_core
// ```

use std::collections::VecDeque;
use std::time::Instant;

use memswitch::core::topology::preset;
use memswitch::core::{build_thresholds, Controller, ControllerConfig, HardwareBoundary, LadderConfig, Level, PixelFrame};

struct PrintingBoard {
    start: Instant,
    adc: VecDeque<u16>,
    rx: VecDeque<u8>,
}

impl HardwareBoundary for PrintingBoard {
    fn read_adc(&mut self) -> u16 {
        self.adc.pop_front().unwrap_or(0)
    }
    fn write_line(&mut self, line: u8, level: Level) {
        println!("  line {line:>2} -> {level:?}");
    }
    fn show_frame(&mut self, frame: &PixelFrame) {
        println!("  leds lit {:?}", frame.lit_indices());
    }
    fn now_ms(&self) -> u64 {
        self.start.elapsed().as_millis() as u64
    }
    fn serial_read(&mut self) -> Option<u8> {
        self.rx.pop_front()
    }
    fn serial_write(&mut self, bytes: &[u8]) {
        println!("  serial <- {:?}", String::from_utf8_lossy(bytes));
    }
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let topology = preset("sp9t-custom").expect("preset exists");
    let table = build_thresholds(&LadderConfig::with_buttons(9))?;
    let button_7 = table.nominal(7);
    let mut core = Controller::new(topology, table, ControllerConfig::extended())?;
    let mut board = PrintingBoard { start: Instant::now(), adc: VecDeque::new(), rx: VecDeque::new() };

    println!("power on");
    core.power_on(&mut board);

    println!("host sends '2'");
    board.rx.push_back(b'2');
    core.tick(&mut board);

    println!("host sends '?'");
    board.rx.push_back(b'?');
    core.tick(&mut board);

    println!("button 7 held for two samples (real 1 ms debounce)");
    board.adc.extend([button_7, button_7]);
    core.tick(&mut board);

    println!("a one-sample glitch is ignored");
    board.adc.extend([button_7, 0]);
    core.tick(&mut board);

    println!("re-selecting port 7 does nothing");
    board.rx.push_back(b'7');
    let actions = core.tick(&mut board);
    println!("  {} actions", actions.len());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}

#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};

use memswitch_core::{HardwareBoundary, Level, PixelFrame};

/// Scripted board: ADC samples and serial bytes are queued up front, every
/// output is recorded.
#[derive(Debug, Default)]
pub struct ScriptedHw {
    pub adc: VecDeque<u16>,
    pub idle_code: u16,
    pub rx: VecDeque<u8>,
    pub tx: Vec<u8>,
    pub writes: Vec<(u8, Level)>,
    pub frames: Vec<PixelFrame>,
    pub clock_ms: u64,
    pub adc_reads: usize,
}

impl ScriptedHw {
    pub fn high_lines(&self) -> BTreeSet<u8> {
        let mut high = BTreeSet::new();
        for &(line, level) in &self.writes {
            match level {
                Level::High => high.insert(line),
                Level::Low => high.remove(&line),
            };
        }
        high
    }

    pub fn hold(&mut self, code: u16, samples: usize) {
        self.adc.extend(std::iter::repeat(code).take(samples));
    }
}

impl HardwareBoundary for ScriptedHw {
    fn read_adc(&mut self) -> u16 {
        self.adc_reads += 1;
        self.adc.pop_front().unwrap_or(self.idle_code)
    }

    fn write_line(&mut self, line: u8, level: Level) {
        self.writes.push((line, level));
    }

    fn show_frame(&mut self, frame: &PixelFrame) {
        self.frames.push(frame.clone());
    }

    fn now_ms(&self) -> u64 {
        self.clock_ms
    }

    fn serial_read(&mut self) -> Option<u8> {
        self.rx.pop_front()
    }

    fn serial_write(&mut self, bytes: &[u8]) {
        self.tx.extend_from_slice(bytes);
    }

    fn delay_ms(&mut self, ms: u32) {
        self.clock_ms += ms as u64;
    }
}

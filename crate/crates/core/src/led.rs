//! Indicator frames for the daisy-chained LED string.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Rgb(pub u8, pub u8, pub u8);

impl Rgb {
    pub const OFF: Rgb = Rgb(0, 0, 0);
    pub const GREEN: Rgb = Rgb(0, 255, 0);

    pub fn is_lit(self) -> bool {
        self != Rgb::OFF
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedColors {
    pub selected: Rgb,
    pub unselected: Rgb,
}

impl Default for LedColors {
    fn default() -> Self {
        Self { selected: Rgb::GREEN, unselected: Rgb::OFF }
    }
}

/// One color per LED, in chain order (index 0 is nearest the data pin).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PixelFrame {
    pub pixels: Vec<Rgb>,
}

impl PixelFrame {
    pub fn off(len: usize) -> Self {
        Self { pixels: vec![Rgb::OFF; len] }
    }

    /// A frame with only `index` lit.
    pub fn single(len: usize, index: usize, colors: LedColors) -> Self {
        let mut pixels = vec![colors.unselected; len];
        pixels[index] = colors.selected;
        Self { pixels }
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn lit_indices(&self) -> Vec<usize> {
        self.pixels
            .iter()
            .enumerate()
            .filter(|(_, p)| p.is_lit())
            .map(|(i, _)| i)
            .collect()
    }

    /// GRB byte stream as clocked out to WS2812-class LEDs.
    pub fn to_grb_bytes(&self) -> Vec<u8> {
        self.pixels.iter().flat_map(|p| [p.1, p.0, p.2]).collect()
    }
}

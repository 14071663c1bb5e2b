//! A fixed two-hidden-layer threshold network recognizing the digit 2 in an
//! 8x8 bitmap: conjunction units detect 3-pixel line segments, disjunction
//! units pool shifted variants of each stroke, and the output unit requires
//! all four strokes.

use crate::error::Result;
use crate::neurons::{mp_fire, ThresholdUnit};

use super::image::Image;

/// Canonical digit-2 fixture. Strokes, top to bottom:
/// a horizontal bar across the top, a short vertical bar down the right,
/// a falling diagonal back to the left, and a horizontal bar along the bottom.
pub const DIGIT2_ROWS: [&str; 8] = [
    ".#####..",
    ".....#..",
    ".....#..",
    "....#...",
    "...#....",
    "..#.....",
    ".######.",
    "........",
];

/// The same glyph with the bottom horizontal stroke deleted.
pub const DIGIT2_MISSING_BOTTOM_ROWS: [&str; 8] = [
    ".#####..",
    ".....#..",
    ".....#..",
    "....#...",
    "...#....",
    "..#.....",
    "........",
    "........",
];

pub fn digit2_image() -> Image {
    Image::from_ascii(&DIGIT2_ROWS).expect("fixture is well-formed")
}

pub fn digit2_missing_bottom_image() -> Image {
    Image::from_ascii(&DIGIT2_MISSING_BOTTOM_ROWS).expect("fixture is well-formed")
}

/// Layer activations of one classification, for tracing.
#[derive(Debug, Clone, PartialEq)]
pub struct Digit2Activations {
    pub simple: Vec<u8>,
    pub complex: Vec<u8>,
    pub output: u8,
}

/// The fixed network: groups of simple cells (one group per stroke type)
/// pooled by one complex cell each, then an output conjunction.
#[derive(Debug, Clone)]
pub struct Digit2Network {
    /// Simple cells over the 64 input pixels, theta = 3.
    simple: Vec<ThresholdUnit>,
    /// Complex cells over their group of simple cells, theta = 1.
    complex: Vec<(ThresholdUnit, Vec<usize>)>,
    /// Output conjunction over all complex cells.
    output: ThresholdUnit,
}

const SIDE: usize = 8;

fn segment_detector(pixels: [(usize, usize); 3]) -> ThresholdUnit {
    let mut weights = vec![0.0; SIDE * SIDE];
    for (r, c) in pixels {
        weights[r * SIDE + c] = 1.0;
    }
    ThresholdUnit::new(weights, 3.0).expect("finite weights")
}

/// Build the network. Simple cells per stroke group:
/// top horizontal (row 0), right vertical (rows 0-2), falling diagonal,
/// bottom horizontal (row 6), each at a few shifted positions.
pub fn mp_digit2_network() -> Digit2Network {
    let groups: Vec<Vec<[(usize, usize); 3]>> = vec![
        // Top horizontal segments.
        vec![
            [(0, 1), (0, 2), (0, 3)],
            [(0, 2), (0, 3), (0, 4)],
            [(0, 3), (0, 4), (0, 5)],
        ],
        // Right vertical segments.
        vec![
            [(0, 4), (1, 4), (2, 4)],
            [(0, 5), (1, 5), (2, 5)],
            [(0, 6), (1, 6), (2, 6)],
        ],
        // Falling diagonal segments.
        vec![
            [(2, 5), (3, 4), (4, 3)],
            [(3, 4), (4, 3), (5, 2)],
            [(4, 3), (5, 2), (6, 1)],
        ],
        // Bottom horizontal segments.
        vec![
            [(6, 1), (6, 2), (6, 3)],
            [(6, 2), (6, 3), (6, 4)],
            [(6, 3), (6, 4), (6, 5)],
            [(6, 4), (6, 5), (6, 6)],
        ],
    ];

    let mut simple = Vec::new();
    let mut complex = Vec::new();
    for group in &groups {
        let members: Vec<usize> = group
            .iter()
            .map(|&pixels| {
                simple.push(segment_detector(pixels));
                simple.len() - 1
            })
            .collect();
        let pool = ThresholdUnit::new(vec![1.0; members.len()], 1.0).expect("finite weights");
        complex.push((pool, members));
    }
    let output =
        ThresholdUnit::new(vec![1.0; complex.len()], complex.len() as f64).expect("finite weights");
    Digit2Network { simple, complex, output }
}

impl Digit2Network {
    /// Classify an 8x8 image: 1 for digit 2, 0 otherwise.
    pub fn classify(&self, img: &Image) -> Result<Digit2Activations> {
        let simple: Vec<u8> = self
            .simple
            .iter()
            .map(|unit| mp_fire(unit, img.pixels()))
            .collect::<Result<_>>()?;
        let complex: Vec<u8> = self
            .complex
            .iter()
            .map(|(pool, members)| {
                let inputs: Vec<f64> = members.iter().map(|&i| f64::from(simple[i])).collect();
                mp_fire(pool, &inputs)
            })
            .collect::<Result<_>>()?;
        let inputs: Vec<f64> = complex.iter().map(|&c| f64::from(c)).collect();
        let output = mp_fire(&self.output, &inputs)?;
        Ok(Digit2Activations { simple, complex, output })
    }
}

//! Grayscale images with pixels in [0, 1], loadable from PGM (P2/P5) and a
//! plain-text matrix format.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl Image {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::argument("image dimensions must be at least 1x1"));
        }
        if pixels.len() != width * height {
            return Err(Error::argument(format!(
                "expected {} pixels for {width}x{height}, got {}",
                width * height,
                pixels.len()
            )));
        }
        if pixels.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::argument("pixel values must lie in [0, 1]"));
        }
        Ok(Image { width, height, pixels })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Image {
            width,
            height,
            pixels: vec![0.0; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * self.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.pixels[row * self.width + col] = value.clamp(0.0, 1.0);
    }

    /// Build from rows of `.#` art; `#` is 1.0, anything else 0.0.
    pub fn from_ascii(rows: &[&str]) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map(|r| r.len()).unwrap_or(0);
        let mut pixels = Vec::with_capacity(width * height);
        for row in rows {
            if row.len() != width {
                return Err(Error::argument("ragged ascii image"));
            }
            pixels.extend(row.chars().map(|c| if c == '#' { 1.0 } else { 0.0 }));
        }
        Image::new(width, height, pixels)
    }

    /// Parse the plain-text matrix format: a `W H MAXVAL` header line, then
    /// `W*H` whitespace-separated values which are divided by `MAXVAL`.
    pub fn from_matrix_text(text: &str) -> Result<Self> {
        let mut tokens = text.split_whitespace();
        let mut next = |what: &str| {
            tokens
                .next()
                .ok_or_else(|| Error::format(format!("matrix image: missing {what}")))
        };
        let width: usize = next("width")?
            .parse()
            .map_err(|_| Error::format("matrix image: bad width"))?;
        let height: usize = next("height")?
            .parse()
            .map_err(|_| Error::format("matrix image: bad height"))?;
        let maxval: f64 = next("maxval")?
            .parse()
            .map_err(|_| Error::format("matrix image: bad maxval"))?;
        if maxval <= 0.0 {
            return Err(Error::format("matrix image: maxval must be positive"));
        }
        let mut pixels = Vec::with_capacity(width * height);
        for _ in 0..width * height {
            let v: f64 = next("pixel value")?
                .parse()
                .map_err(|_| Error::format("matrix image: bad pixel value"))?;
            pixels.push(v / maxval);
        }
        if tokens.next().is_some() {
            return Err(Error::format("matrix image: trailing values"));
        }
        Image::new(width, height, pixels)
    }

    /// Parse PGM, both ASCII (P2) and 8-bit binary (P5).
    pub fn from_pgm(bytes: &[u8]) -> Result<Self> {
        let mut cursor = 0usize;

        fn skip_ws_and_comments(bytes: &[u8], mut i: usize) -> usize {
            loop {
                while i < bytes.len() && bytes[i].is_ascii_whitespace() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'#' {
                    while i < bytes.len() && bytes[i] != b'\n' {
                        i += 1;
                    }
                } else {
                    return i;
                }
            }
        }

        let mut token = |what: &str| -> Result<String> {
            cursor = skip_ws_and_comments(bytes, cursor);
            let start = cursor;
            while cursor < bytes.len() && !bytes[cursor].is_ascii_whitespace() {
                cursor += 1;
            }
            if start == cursor {
                return Err(Error::format(format!("pgm: missing {what}")));
            }
            Ok(String::from_utf8_lossy(&bytes[start..cursor]).into_owned())
        };

        let magic = token("magic")?;
        if magic != "P2" && magic != "P5" {
            return Err(Error::format(format!("pgm: unsupported magic {magic:?}")));
        }
        let width: usize = token("width")?
            .parse()
            .map_err(|_| Error::format("pgm: bad width"))?;
        let height: usize = token("height")?
            .parse()
            .map_err(|_| Error::format("pgm: bad height"))?;
        let maxval: f64 = token("maxval")?
            .parse()
            .map_err(|_| Error::format("pgm: bad maxval"))?;
        if maxval <= 0.0 || maxval > 255.0 {
            return Err(Error::format("pgm: maxval must be in 1..=255"));
        }

        let mut pixels = Vec::with_capacity(width * height);
        if magic == "P2" {
            for _ in 0..width * height {
                let v: f64 = token("pixel")?
                    .parse()
                    .map_err(|_| Error::format("pgm: bad pixel value"))?;
                pixels.push(v / maxval);
            }
        } else {
            // Exactly one whitespace byte separates the header from the data.
            cursor += 1;
            let data = bytes
                .get(cursor..cursor + width * height)
                .ok_or_else(|| Error::format("pgm: truncated binary data"))?;
            pixels.extend(data.iter().map(|&b| f64::from(b) / maxval));
        }
        Image::new(width, height, pixels)
    }

    /// Serialize as ASCII PGM with an 8-bit range.
    pub fn to_pgm_p2(&self) -> String {
        let mut out = format!("P2\n{} {}\n255\n", self.width, self.height);
        for row in 0..self.height {
            let values: Vec<String> = (0..self.width)
                .map(|col| format!("{}", (self.get(row, col) * 255.0).round() as u8))
                .collect();
            out.push_str(&values.join(" "));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pixel_range_enforced_on_load() {
        assert!(Image::new(2, 1, vec![0.0, 1.5]).is_err());
        assert!(Image::new(2, 1, vec![0.0, 1.0]).is_ok());
        assert!(Image::new(0, 1, vec![]).is_err());
    }

    #[test]
    fn matrix_text_round_trip() {
        let img = Image::from_matrix_text("2 2 255\n0 128\n255 64\n").unwrap();
        assert_eq!(img.width(), 2);
        assert!((img.get(0, 1) - 128.0 / 255.0).abs() < 1e-12);
        assert_eq!(img.get(1, 0), 1.0);
        // Unit maxval admits fractional values directly.
        let unit = Image::from_matrix_text("1 2 1\n0.25\n0.75\n").unwrap();
        assert_eq!(unit.get(0, 0), 0.25);
        assert_eq!(unit.get(1, 0), 0.75);
    }

    #[test]
    fn matrix_text_rejects_malformed_input() {
        assert!(Image::from_matrix_text("2 2\n0 0 0 0").is_err());
        assert!(Image::from_matrix_text("2 2 255\n0 0 0").is_err());
        assert!(Image::from_matrix_text("2 2 255\n0 0 0 0 0").is_err());
    }

    #[test]
    fn ascii_pgm_parses_with_comments() {
        let img = Image::from_pgm(b"P2\n# a comment\n2 2\n255\n0 255\n128 64\n").unwrap();
        assert_eq!(img.get(0, 1), 1.0);
    }

    #[test]
    fn binary_pgm_parses() {
        let mut bytes = b"P5\n2 2\n255\n".to_vec();
        bytes.extend_from_slice(&[0, 255, 128, 64]);
        let img = Image::from_pgm(&bytes).unwrap();
        assert_eq!(img.get(0, 1), 1.0);
        assert!((img.get(1, 0) - 128.0 / 255.0).abs() < 1e-12);
    }

    #[test]
    fn pgm_round_trips_through_p2() {
        let img = Image::new(3, 1, vec![0.0, 0.5, 1.0]).unwrap();
        let round = Image::from_pgm(img.to_pgm_p2().as_bytes()).unwrap();
        for (a, b) in img.pixels().iter().zip(round.pixels()) {
            assert!((a - b).abs() < 1.0 / 255.0);
        }
    }

    #[test]
    fn ascii_art_helper() {
        let img = Image::from_ascii(&["#.", ".#"]).unwrap();
        assert_eq!(img.get(0, 0), 1.0);
        assert_eq!(img.get(0, 1), 0.0);
        assert_eq!(img.get(1, 1), 1.0);
    }
}

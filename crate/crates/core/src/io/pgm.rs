//! Binary greyscale PGM (`P5`).

use std::io::Write;

use crate::error::{Error, Result};
use crate::pruning::GrayImage;

/// Cursor over the ASCII header; `#` starts a comment running to the end
/// of the line.
struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    fn skip_space(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while self.bytes.get(self.pos).is_some_and(|&c| c != b'\n') {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_space();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::format(format!("pgm: bad {what} at byte {start}")))
    }
}

pub fn read_pgm(bytes: &[u8]) -> Result<GrayImage> {
    if !bytes.starts_with(b"P5") {
        return Err(Error::format("pgm: missing P5 magic"));
    }
    let mut h = Header { bytes, pos: 2 };
    if !bytes
        .get(2)
        .is_some_and(|b| b.is_ascii_whitespace() || *b == b'#')
    {
        return Err(Error::format("pgm: missing P5 magic"));
    }
    let width = h.number("width")?;
    let height = h.number("height")?;
    let maxval = h.number("maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(Error::format(format!(
            "pgm: maxval {maxval} not in 1..=255"
        )));
    }
    if !bytes.get(h.pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(Error::format(
            "pgm: header must end with one whitespace byte",
        ));
    }
    let data = &bytes[h.pos + 1..];
    let expected = width
        .checked_mul(height)
        .ok_or_else(|| Error::format("pgm: dimensions overflow"))?;
    if data.len() < expected {
        return Err(Error::format(format!(
            "pgm: truncated payload ({} of {expected} bytes)",
            data.len()
        )));
    }
    if data.len() > expected {
        return Err(Error::format(format!(
            "pgm: {} trailing bytes after payload",
            data.len() - expected
        )));
    }
    if let Some(&v) = data.iter().find(|&&v| v as usize > maxval) {
        return Err(Error::format(format!(
            "pgm: sample {v} exceeds maxval {maxval}"
        )));
    }
    GrayImage::new(width, height, data.to_vec()).map_err(|e| Error::format(format!("pgm: {e}")))
}

pub fn write_pgm<W: Write>(img: &GrayImage, mut sink: W) -> Result<()> {
    write!(sink, "P5\n{} {}\n255\n", img.width(), img.height())?;
    sink.write_all(img.pixels())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn checker_decodes() {
        let mut bytes = b"P5 2 2 255\n".to_vec();
        bytes.extend([0, 255, 255, 0]);
        let img = read_pgm(&bytes).unwrap();
        assert_eq!((img.width(), img.height()), (2, 2));
        assert_eq!(img.pixels(), &[0, 255, 255, 0]);
    }

    #[test]
    fn comments_are_skipped() {
        let mut plain = b"P5\n2 2\n255\n".to_vec();
        plain.extend([1, 2, 3, 4]);
        let mut commented = b"P5\n# made by hand\n2 # width\n2\n255\n".to_vec();
        commented.extend([1, 2, 3, 4]);
        assert_eq!(read_pgm(&plain).unwrap(), read_pgm(&commented).unwrap());
    }

    #[test]
    fn malformed_inputs() {
        let mut truncated = b"P5 2 2 255\n".to_vec();
        truncated.extend([0, 1, 2]);
        assert!(matches!(read_pgm(&truncated), Err(Error::Format(_))));
        assert!(matches!(
            read_pgm(b"P2 1 1 255\n\x00"),
            Err(Error::Format(_))
        ));
        assert!(matches!(
            read_pgm(b"P5 1 1 65535\n\x00\x00"),
            Err(Error::Format(_))
        ));
        assert!(matches!(
            read_pgm(b"P5 1 1 100\n\xff"),
            Err(Error::Format(_))
        ));
    }

    proptest! {
        #[test]
        fn round_trip(w in 1usize..20, h in 1usize..20, seed in any::<u64>()) {
            let pixels: Vec<u8> = (0..w * h).map(|i| (seed.wrapping_mul(i as u64 + 1) >> 7) as u8).collect();
            let img = GrayImage::new(w, h, pixels).unwrap();
            let mut buf = Vec::new();
            write_pgm(&img, &mut buf).unwrap();
            prop_assert_eq!(read_pgm(&buf).unwrap(), img);
        }
    }
}

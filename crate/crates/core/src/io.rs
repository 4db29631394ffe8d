//! PGM (P2/P5) and grayscale PFM (`Pf`) reading and writing.
//!
//! The exact header grammar accepted here is documented in `docs/formats.md`.

use std::fs;
use std::path::Path;

use crate::error::{Error, FormatError, Result};
use crate::image::Image;

/// Output encodings supported by [`write_image`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageFormat {
    /// Binary P5, maxval 255.
    Pgm8,
    /// Little-endian grayscale PFM (`Pf`, scale `-1`).
    Pfm,
}

impl ImageFormat {
    /// Picks a format from the file extension (`.pfm` or anything else -> PGM).
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("pfm") => ImageFormat::Pfm,
            _ => ImageFormat::Pgm8,
        }
    }
}

pub fn read_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    decode(&bytes).map_err(|e| match e {
        DecodeError::Format(source) => Error::Format {
            path: path.to_path_buf(),
            source,
        },
        DecodeError::Image(e) => e,
    })
}

pub fn write_image(img: &Image, path: impl AsRef<Path>, format: ImageFormat) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode(img, format);
    fs::write(path, bytes).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Encodes an image into the bytes [`write_image`] would store.
pub fn encode(img: &Image, format: ImageFormat) -> Vec<u8> {
    match format {
        ImageFormat::Pgm8 => {
            let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
            out.extend(img.data().iter().map(|&v| quantize_u8(v)));
            out
        }
        ImageFormat::Pfm => {
            let mut out = format!("Pf\n{} {}\n-1.0\n", img.width(), img.height()).into_bytes();
            out.reserve(4 * img.len());
            // PFM stores rows bottom to top.
            for y in (0..img.height()).rev() {
                for &v in img.row(y) {
                    out.extend_from_slice(&(v as f32).to_le_bytes());
                }
            }
            out
        }
    }
}

/// `round_half_up(clamp(v, 0, 1) * 255)`.
#[inline]
pub fn quantize_u8(v: f64) -> u8 {
    let c = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
    (c * 255.0 + 0.5).floor() as u8
}

enum DecodeError {
    Format(FormatError),
    Image(Error),
}

impl From<FormatError> for DecodeError {
    fn from(e: FormatError) -> Self {
        DecodeError::Format(e)
    }
}

fn decode(bytes: &[u8]) -> std::result::Result<Image, DecodeError> {
    if bytes.len() < 2 {
        return Err(FormatError::MalformedHeader("file shorter than the magic number".into()).into());
    }
    let magic = &bytes[..2];
    let mut header = HeaderReader { bytes, pos: 2 };
    match magic {
        b"P2" | b"P5" => {
            let width = header.positive("width")?;
            let height = header.positive("height")?;
            let maxval = header.positive("maxval")?;
            if maxval > 65535 {
                return Err(FormatError::MalformedHeader(format!("maxval {maxval} exceeds 65535")).into());
            }
            let n = width * height;
            let scale = 1.0 / maxval as f64;
            let raw = if magic == b"P5" {
                header.single_whitespace()?;
                decode_p5(&bytes[header.pos..], n, maxval)?
            } else {
                decode_p2(&mut header, n, maxval)?
            };
            let data = raw.into_iter().map(|v| v as f64 * scale).collect();
            Image::new(width, height, data).map_err(DecodeError::Image)
        }
        b"Pf" => {
            let width = header.positive("width")?;
            let height = header.positive("height")?;
            let scale = header.real("scale")?;
            if scale == 0.0 || !scale.is_finite() {
                return Err(FormatError::MalformedHeader(format!("invalid PFM scale {scale}")).into());
            }
            header.single_whitespace()?;
            let payload = &bytes[header.pos..];
            let expected = 4 * width * height;
            if payload.len() < expected {
                return Err(FormatError::Truncated {
                    expected,
                    found: payload.len(),
                }
                .into());
            }
            let little = scale < 0.0;
            let mut data = vec![0.0; width * height];
            for (i, chunk) in payload[..expected].chunks_exact(4).enumerate() {
                let b = [chunk[0], chunk[1], chunk[2], chunk[3]];
                let v = if little {
                    f32::from_le_bytes(b)
                } else {
                    f32::from_be_bytes(b)
                };
                if !v.is_finite() {
                    return Err(FormatError::MalformedPayload(format!("non-finite sample at index {i}")).into());
                }
                let (row, col) = (i / width, i % width);
                data[(height - 1 - row) * width + col] = v as f64;
            }
            Image::new(width, height, data).map_err(DecodeError::Image)
        }
        other => Err(FormatError::UnsupportedMagic(String::from_utf8_lossy(other).into_owned()).into()),
    }
}

fn decode_p5(payload: &[u8], n: usize, maxval: usize) -> std::result::Result<Vec<u32>, FormatError> {
    let wide = maxval > 255;
    let expected = if wide { 2 * n } else { n };
    if payload.len() < expected {
        return Err(FormatError::Truncated {
            expected,
            found: payload.len(),
        });
    }
    let values: Vec<u32> = if wide {
        payload[..expected]
            .chunks_exact(2)
            .map(|c| u32::from(u16::from_be_bytes([c[0], c[1]])))
            .collect()
    } else {
        payload[..n].iter().map(|&b| u32::from(b)).collect()
    };
    check_range(&values, maxval)?;
    Ok(values)
}

fn decode_p2(header: &mut HeaderReader<'_>, n: usize, maxval: usize) -> std::result::Result<Vec<u32>, FormatError> {
    let mut values = Vec::with_capacity(n);
    while values.len() < n {
        match header.token() {
            Some(tok) => {
                let v: u32 = tok
                    .parse()
                    .map_err(|_| FormatError::MalformedPayload(format!("invalid sample {tok:?}")))?;
                values.push(v);
            }
            None => {
                return Err(FormatError::Truncated {
                    expected: n,
                    found: values.len(),
                })
            }
        }
    }
    check_range(&values, maxval)?;
    Ok(values)
}

fn check_range(values: &[u32], maxval: usize) -> std::result::Result<(), FormatError> {
    match values.iter().position(|&v| v as usize > maxval) {
        Some(i) => Err(FormatError::MalformedPayload(format!(
            "sample {} at index {i} exceeds maxval {maxval}",
            values[i]
        ))),
        None => Ok(()),
    }
}

/// Whitespace/comment-aware tokenizer over the header bytes.
struct HeaderReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderReader<'a> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            let c = self.bytes[self.pos];
            if c == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else if c.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> Option<&'a str> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() && self.bytes[self.pos] != b'#'
        {
            self.pos += 1;
        }
        if start == self.pos {
            None
        } else {
            std::str::from_utf8(&self.bytes[start..self.pos]).ok()
        }
    }

    fn positive(&mut self, what: &str) -> std::result::Result<usize, FormatError> {
        let tok = self
            .token()
            .ok_or_else(|| FormatError::MalformedHeader(format!("missing {what}")))?;
        match tok.parse::<usize>() {
            Ok(v) if v > 0 => Ok(v),
            _ => Err(FormatError::MalformedHeader(format!("invalid {what} {tok:?}"))),
        }
    }

    fn real(&mut self, what: &str) -> std::result::Result<f64, FormatError> {
        let tok = self
            .token()
            .ok_or_else(|| FormatError::MalformedHeader(format!("missing {what}")))?;
        tok.parse::<f64>()
            .map_err(|_| FormatError::MalformedHeader(format!("invalid {what} {tok:?}")))
    }

    /// Exactly one whitespace byte separates the header from a binary payload.
    fn single_whitespace(&mut self) -> std::result::Result<(), FormatError> {
        match self.bytes.get(self.pos) {
            Some(c) if c.is_ascii_whitespace() => {
                self.pos += 1;
                Ok(())
            }
            Some(_) => Err(FormatError::MalformedHeader("expected whitespace after header".into())),
            None => Err(FormatError::Truncated { expected: 1, found: 0 }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decode_ok(bytes: &[u8]) -> Image {
        match decode(bytes) {
            Ok(img) => img,
            Err(DecodeError::Format(e)) => panic!("format error {e}"),
            Err(DecodeError::Image(e)) => panic!("image error {e}"),
        }
    }

    fn decode_err(bytes: &[u8]) -> FormatError {
        match decode(bytes) {
            Err(DecodeError::Format(e)) => e,
            _ => panic!("expected a format error"),
        }
    }

    #[test]
    fn p2_maps_by_maxval() {
        let img = decode_ok(b"P2\n# comment\n2 2\n255\n0 255\n255 0\n");
        assert_eq!((img.width(), img.height()), (2, 2));
        assert_eq!(img.data(), &[0.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn p5_constant() {
        let mut bytes = b"P5 3 2 255\n".to_vec();
        bytes.extend([128u8; 6]);
        let img = decode_ok(&bytes);
        assert!(img.data().iter().all(|&v| v == 128.0 / 255.0));
    }

    #[test]
    fn p5_sixteen_bit_is_big_endian() {
        let mut bytes = b"P5\n2 1\n65535\n".to_vec();
        bytes.extend([0xff, 0xff, 0x80, 0x00]);
        let img = decode_ok(&bytes);
        assert_eq!(img.get(0, 0), 1.0);
        assert_eq!(img.get(1, 0), 32768.0 / 65535.0);
    }

    #[test]
    fn distinct_errors() {
        assert!(matches!(
            decode_err(b"P6\n1 1\n255\n\0\0\0"),
            FormatError::UnsupportedMagic(_)
        ));
        assert!(matches!(
            decode_err(b"PF\n1 1\n-1\n0000"),
            FormatError::UnsupportedMagic(_)
        ));
        assert!(matches!(decode_err(b"P5\n2 x\n255\n"), FormatError::MalformedHeader(_)));
        assert!(matches!(
            decode_err(b"P5\n2 2\n70000\n"),
            FormatError::MalformedHeader(_)
        ));
        assert!(matches!(
            decode_err(b"P5\n2 2\n255\n\x01\x02"),
            FormatError::Truncated { expected: 4, found: 2 }
        ));
        assert!(matches!(
            decode_err(b"P2\n2 2\n255\n1 2 3"),
            FormatError::Truncated { expected: 4, found: 3 }
        ));
        assert!(matches!(
            decode_err(b"P2\n1 1\n10\n11"),
            FormatError::MalformedPayload(_)
        ));
        assert!(matches!(
            decode_err(b"Pf\n1 1\n-1.0\n\0\0"),
            FormatError::Truncated { .. }
        ));
    }

    #[test]
    fn pgm8_quantization() {
        assert_eq!(quantize_u8(0.5), 128);
        assert_eq!(quantize_u8(1.0), 255);
        assert_eq!(quantize_u8(-0.2), 0);
        assert_eq!(quantize_u8(3.0), 255);
        let bytes = encode(&Image::filled(3, 2, 0.5), ImageFormat::Pgm8);
        let header = b"P5\n3 2\n255\n";
        assert_eq!(&bytes[..header.len()], header);
        assert!(bytes[header.len()..].iter().all(|&b| b == 128));
    }

    #[test]
    fn pfm_rows_are_bottom_up() {
        let img = Image::new(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let bytes = encode(&img, ImageFormat::Pfm);
        let header = b"Pf\n2 2\n-1.0\n";
        let payload = &bytes[header.len()..];
        assert_eq!(f32::from_le_bytes(payload[0..4].try_into().unwrap()), 3.0);
        assert_eq!(decode_ok(&bytes), img);
    }

    #[test]
    fn big_endian_pfm() {
        let mut bytes = b"Pf\n1 1\n1.0\n".to_vec();
        bytes.extend(0.25f32.to_be_bytes());
        assert_eq!(decode_ok(&bytes).get(0, 0), 0.25);
    }
}

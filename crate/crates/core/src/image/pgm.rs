//! PGM (P2 ASCII / P5 binary) reading and P5 writing.
//!
//! Reading accepts maxval 1..=255 and `#` comments anywhere in the header.
//! Writing always emits P5 with maxval 255 and no comments.

use std::fs;
use std::path::Path;

use super::ImageBuffer;
use crate::error::{Error, Result};

/// Loads a grayscale image. PGM is always available; PNG only with the
/// `png` feature.
pub fn load_image(path: impl AsRef<Path>) -> Result<ImageBuffer> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    if bytes.starts_with(b"P2") || bytes.starts_with(b"P5") {
        return decode_pgm(&bytes, path);
    }
    #[cfg(feature = "png")]
    if bytes.starts_with(b"\x89PNG") {
        return super::png_io::decode_png(&bytes, path);
    }
    Err(Error::UnsupportedFormat {
        path: path.to_path_buf(),
        reason: match bytes.get(..2) {
            Some(m) if m[0] == b'P' => format!("netpbm variant {:?}", String::from_utf8_lossy(m)),
            _ => "not a PGM file".to_string(),
        },
    })
}

/// Writes `img` as binary PGM. With the `png` feature, a `.png` extension
/// selects 8-bit grayscale PNG instead.
pub fn save_image(img: &ImageBuffer, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    #[cfg(feature = "png")]
    if path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("png"))
    {
        return super::png_io::save_png(img, path);
    }
    fs::write(path, encode_pgm(img)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Maps an intensity to an 8-bit sample, rounding half away from zero.
#[inline]
pub fn quantize(v: f64) -> u8 {
    (v * 255.0).round().clamp(0.0, 255.0) as u8
}

pub fn encode_pgm(img: &ImageBuffer) -> Vec<u8> {
    let header = format!("P5\n{} {}\n255\n", img.width(), img.height());
    let mut out = Vec::with_capacity(header.len() + img.len());
    out.extend_from_slice(header.as_bytes());
    out.extend(img.data().iter().map(|&v| quantize(v)));
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Cursor<'a> {
    fn header_err(&self, reason: impl Into<String>) -> Error {
        Error::MalformedHeader {
            path: self.path.to_path_buf(),
            offset: self.pos,
            reason: reason.into(),
        }
    }

    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    /// Reads an unsigned decimal token. Returns `None` at end of input.
    fn read_number(&mut self) -> Option<std::result::Result<usize, String>> {
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(|b| b.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return self
                .bytes
                .get(self.pos)
                .map(|&b| Err(format!("unexpected byte 0x{b:02x}")));
        }
        if let Some(&b) = self.bytes.get(self.pos) {
            if !b.is_ascii_whitespace() && b != b'#' {
                return Some(Err(format!("unexpected byte 0x{b:02x} after number")));
            }
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap_or("");
        Some(text.parse().map_err(|_| format!("number {text} too large")))
    }

    fn header_field(&mut self, name: &str) -> Result<usize> {
        self.skip_whitespace_and_comments();
        match self.read_number() {
            Some(Ok(v)) => Ok(v),
            Some(Err(e)) => Err(self.header_err(format!("{name}: {e}"))),
            None => Err(self.header_err(format!("missing {name}"))),
        }
    }
}

/// Decodes PGM bytes; `path` is used only for error messages.
pub fn decode_pgm(bytes: &[u8], path: &Path) -> Result<ImageBuffer> {
    let mut cur = Cursor {
        bytes,
        pos: 0,
        path,
    };
    let binary = match bytes.get(..2) {
        Some(b"P5") => true,
        Some(b"P2") => false,
        _ => {
            return Err(Error::UnsupportedFormat {
                path: path.to_path_buf(),
                reason: "expected magic P2 or P5".to_string(),
            })
        }
    };
    cur.pos = 2;
    let width = cur.header_field("width")?;
    let height = cur.header_field("height")?;
    let maxval_offset = cur.pos;
    let maxval = cur.header_field("maxval")?;
    if width == 0 || height == 0 {
        return Err(cur.header_err(format!("zero dimension {width}x{height}")));
    }
    if maxval == 0 {
        return Err(Error::MalformedHeader {
            path: path.to_path_buf(),
            offset: maxval_offset,
            reason: "maxval must be positive".to_string(),
        });
    }
    if maxval > 255 {
        return Err(Error::UnsupportedFormat {
            path: path.to_path_buf(),
            reason: format!("maxval {maxval} (only 8-bit depth is supported)"),
        });
    }
    let count = width
        .checked_mul(height)
        .ok_or_else(|| cur.header_err("image size overflows"))?;
    let scale = maxval as f64;

    let mut data = Vec::with_capacity(count);
    if binary {
        // exactly one whitespace byte separates maxval from the raster
        match bytes.get(cur.pos) {
            Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
            _ => return Err(cur.header_err("missing whitespace after maxval")),
        }
        let raster = &bytes[cur.pos..];
        if raster.len() < count {
            return Err(Error::TruncatedPixelData {
                path: path.to_path_buf(),
                offset: bytes.len(),
                expected: count,
                got: raster.len(),
            });
        }
        for (i, &b) in raster[..count].iter().enumerate() {
            if b as usize > maxval {
                return Err(Error::BadSample {
                    path: path.to_path_buf(),
                    offset: cur.pos + i,
                    reason: format!("sample {b} exceeds maxval {maxval}"),
                });
            }
            data.push(b as f64 / scale);
        }
    } else {
        while data.len() < count {
            cur.skip_whitespace_and_comments();
            let offset = cur.pos;
            match cur.read_number() {
                None => {
                    return Err(Error::TruncatedPixelData {
                        path: path.to_path_buf(),
                        offset,
                        expected: count,
                        got: data.len(),
                    })
                }
                Some(Err(reason)) => {
                    return Err(Error::BadSample {
                        path: path.to_path_buf(),
                        offset,
                        reason,
                    })
                }
                Some(Ok(v)) if v > maxval => {
                    return Err(Error::BadSample {
                        path: path.to_path_buf(),
                        offset,
                        reason: format!("sample {v} exceeds maxval {maxval}"),
                    })
                }
                Some(Ok(v)) => data.push(v as f64 / scale),
            }
        }
    }
    Ok(ImageBuffer::from_raw(width, height, data))
}

//! 8-bit grayscale PNG support (feature `png`).

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use super::{quantize, ImageBuffer};
use crate::error::{Error, Result};

fn unsupported(path: &Path, reason: impl Into<String>) -> Error {
    Error::UnsupportedFormat {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

pub(crate) fn decode_png(bytes: &[u8], path: &Path) -> Result<ImageBuffer> {
    let decoder = png::Decoder::new(std::io::Cursor::new(bytes));
    let mut reader = decoder
        .read_info()
        .map_err(|e| unsupported(path, format!("png: {e}")))?;
    let info = reader.info();
    if info.color_type != png::ColorType::Grayscale || info.bit_depth != png::BitDepth::Eight {
        return Err(unsupported(
            path,
            format!(
                "png color type {:?} depth {:?} (only 8-bit grayscale)",
                info.color_type, info.bit_depth
            ),
        ));
    }
    let (w, h) = (info.width as usize, info.height as usize);
    let mut buf = vec![0u8; reader.output_buffer_size().unwrap_or(w * h)];
    let frame = reader
        .next_frame(&mut buf)
        .map_err(|e| unsupported(path, format!("png: {e}")))?;
    let stride = frame.line_size;
    let mut data = Vec::with_capacity(w * h);
    for y in 0..h {
        data.extend(
            buf[y * stride..y * stride + w]
                .iter()
                .map(|&b| b as f64 / 255.0),
        );
    }
    Ok(ImageBuffer::from_raw(w, h, data))
}

pub(crate) fn save_png(img: &ImageBuffer, path: &Path) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(io_err)?;
    let mut encoder = png::Encoder::new(
        BufWriter::new(file),
        img.width() as u32,
        img.height() as u32,
    );
    encoder.set_color(png::ColorType::Grayscale);
    encoder.set_depth(png::BitDepth::Eight);
    let samples: Vec<u8> = img.data().iter().map(|&v| quantize(v)).collect();
    encoder
        .write_header()
        .and_then(|mut w| w.write_image_data(&samples))
        .map_err(|e| unsupported(path, format!("png: {e}")))
}

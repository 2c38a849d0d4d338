//! Grayscale raster type plus file I/O, noise injection and synthetic
//! test images.

mod noise;
mod pgm;
#[cfg(feature = "png")]
mod png_io;
mod synth;

pub use noise::{add_gaussian_noise, NoiseSpec};
pub use pgm::{decode_pgm, encode_pgm, load_image, quantize, save_image};
pub use synth::{make_synthetic, SyntheticKind, SyntheticSpec};

use crate::error::{Error, Result};

/// A `width x height` grayscale image with row-major intensities in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageBuffer {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl ImageBuffer {
    /// Builds an image, validating the size and the `[0, 1]` range of every sample.
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParameter(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(Error::SizeMismatch {
                what: "image data",
                expected: width * height,
                got: data.len(),
            });
        }
        if let Some((i, v)) = data
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(Error::InvalidParameter(format!(
                "intensity {v} at index {i} is outside [0, 1]"
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    /// Internal constructor for operations that guarantee the invariants.
    pub(crate) fn from_raw(width: usize, height: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        debug_assert!(data.iter().all(|v| (0.0..=1.0).contains(v)));
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    pub fn same_shape(&self, other: &ImageBuffer) -> Result<()> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::DimensionMismatch {
                left_width: self.width,
                left_height: self.height,
                right_width: other.width,
                right_height: other.height,
            });
        }
        Ok(())
    }

    /// Rotates by 90 degrees counter-clockwise: pixel `(x, y)` moves to
    /// `(y, width - 1 - x)`.
    pub fn rot90(&self) -> ImageBuffer {
        ImageBuffer::from_raw(
            self.height,
            self.width,
            rot90_grid(&self.data, self.width, self.height),
        )
    }

    /// Mirrors left-right.
    pub fn flip_horizontal(&self) -> ImageBuffer {
        ImageBuffer::from_raw(
            self.width,
            self.height,
            flip_horizontal_grid(&self.data, self.width, self.height),
        )
    }
}

/// Counter-clockwise rotation of a row-major grid; the result is `height x width`.
pub fn rot90_grid<T: Copy>(data: &[T], width: usize, height: usize) -> Vec<T> {
    let (nw, nh) = (height, width);
    let mut out = Vec::with_capacity(data.len());
    for ny in 0..nh {
        for nx in 0..nw {
            // inverse of (x, y) -> (y, width - 1 - x)
            let x = width - 1 - ny;
            let y = nx;
            out.push(data[y * width + x]);
        }
    }
    out
}

pub fn flip_horizontal_grid<T: Copy>(data: &[T], width: usize, height: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(data.len());
    for y in 0..height {
        for x in 0..width {
            out.push(data[y * width + (width - 1 - x)]);
        }
    }
    out
}

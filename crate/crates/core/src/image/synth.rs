use serde::{Deserialize, Serialize};

use super::ImageBuffer;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SyntheticKind {
    Step,
    Disk,
    Blob,
}

impl std::str::FromStr for SyntheticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "step" => Ok(Self::Step),
            "disk" => Ok(Self::Disk),
            "blob" => Ok(Self::Blob),
            other => Err(Error::InvalidParameter(format!(
                "unknown synthetic kind {other:?} (expected step, disk or blob)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub kind: SyntheticKind,
    pub width: usize,
    pub height: usize,
    pub low: f64,
    pub high: f64,
}

impl SyntheticSpec {
    pub const DEFAULT_LOW: f64 = 0.2;
    pub const DEFAULT_HIGH: f64 = 0.8;

    pub fn new(kind: SyntheticKind, width: usize, height: usize) -> Self {
        Self {
            kind,
            width,
            height,
            low: Self::DEFAULT_LOW,
            high: Self::DEFAULT_HIGH,
        }
    }

    pub fn with_levels(mut self, low: f64, high: f64) -> Self {
        self.low = low;
        self.high = high;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidParameter(format!(
                "synthetic image dimensions must be positive, got {}x{}",
                self.width, self.height
            )));
        }
        if !(0.0 <= self.low && self.low < self.high && self.high <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "synthetic levels must satisfy 0 <= low < high <= 1, got low={} high={}",
                self.low, self.high
            )));
        }
        Ok(())
    }
}

/// Renders a two-level test image.
///
/// * `step`: columns `< ceil(width / 2)` at `low`, the rest at `high`.
/// * `disk`: a disk of radius `min(width, height) / 4` (integer division)
///   centred at `((width - 1) / 2, (height - 1) / 2)`; a pixel is inside when
///   its centre lies at distance `< radius`.
/// * `blob`: union of a "palm" disk of radius `m / 4` centred at
///   `(0.5 w, 0.58 h)` and an overlapping "finger" disk of radius `m / 6`
///   centred at `(0.62 w, 0.32 h)`, where `m = min(width, height)`.
pub fn make_synthetic(spec: &SyntheticSpec) -> Result<ImageBuffer> {
    spec.validate()?;
    let (w, h) = (spec.width, spec.height);
    let m = w.min(h) as f64;
    let inside: Box<dyn Fn(usize, usize) -> bool> = match spec.kind {
        SyntheticKind::Step => {
            let split = w.div_ceil(2);
            Box::new(move |x, _| x >= split)
        }
        SyntheticKind::Disk => {
            let r = (w.min(h) / 4) as f64;
            let (cx, cy) = ((w as f64 - 1.0) / 2.0, (h as f64 - 1.0) / 2.0);
            Box::new(move |x, y| in_disk(x, y, cx, cy, r))
        }
        SyntheticKind::Blob => {
            let (w, h) = (w as f64, h as f64);
            let palm = (0.5 * w, 0.58 * h, m / 4.0);
            let finger = (0.62 * w, 0.32 * h, m / 6.0);
            Box::new(move |x, y| {
                in_disk(x, y, palm.0, palm.1, palm.2) || in_disk(x, y, finger.0, finger.1, finger.2)
            })
        }
    };
    let mut data = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            data.push(if inside(x, y) { spec.high } else { spec.low });
        }
    }
    Ok(ImageBuffer::from_raw(w, h, data))
}

fn in_disk(x: usize, y: usize, cx: f64, cy: f64, r: f64) -> bool {
    let (dx, dy) = (x as f64 - cx, y as f64 - cy);
    dx * dx + dy * dy < r * r
}

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::ImageBuffer;
use crate::error::{Error, Result};

/// Additive white Gaussian noise, reproducible from `seed`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub sigma: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(sigma: f64, seed: u64) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "noise sigma must be finite and >= 0, got {sigma}"
            )));
        }
        Ok(Self { sigma, seed })
    }

    /// The raw (unclamped) noise samples for an image of `len` pixels.
    ///
    /// Samples come from `ChaCha8Rng::seed_from_u64(seed)` fed through
    /// `rand_distr::StandardNormal` and scaled by `sigma`, one draw per pixel
    /// in row-major order. The stream is stable for a given `rand_chacha` /
    /// `rand_distr` release.
    pub fn samples(&self, len: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..len)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                self.sigma * z
            })
            .collect()
    }
}

/// Adds clamped Gaussian noise. Clamping to `[0, 1]` biases the noise near
/// the range ends; at the contrasts used here (0.2 / 0.8, sigma <= 0.2) the
/// effect is small.
pub fn add_gaussian_noise(img: &ImageBuffer, spec: &NoiseSpec) -> Result<ImageBuffer> {
    let spec = NoiseSpec::new(spec.sigma, spec.seed)?;
    if spec.sigma == 0.0 {
        return Ok(img.clone());
    }
    let noise = spec.samples(img.len());
    let data = img
        .data()
        .iter()
        .zip(&noise)
        .map(|(&v, &n)| (v + n).clamp(0.0, 1.0))
        .collect();
    Ok(ImageBuffer::from_raw(img.width(), img.height(), data))
}

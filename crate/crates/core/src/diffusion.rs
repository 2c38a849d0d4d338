//! Explicit-Euler diffusion on the 4-connected pixel lattice.
//!
//! Every scheme here is an instance of
//!
//! ```text
//! u'[s] = u[s] + tau * sum_{p in N4(s)} w(s, p) * (u[p] - u[s])
//! ```
//!
//! with symmetric edge weights `w` in `[0, 1]` and no flux across the image
//! border. For `tau <= 0.25` the update is a convex combination of the
//! stencil values, so intensity is conserved and the discrete maximum
//! principle holds. The four flux terms are summed in sorted order, which
//! makes each step commute bit-exactly with lattice rotations and flips.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::ImageBuffer;

/// Largest stable explicit time step for the 4-neighbour stencil.
pub const MAX_TAU: f64 = 0.25;
pub const DEFAULT_TAU: f64 = 0.2;
pub const DEFAULT_KAPPA: f64 = 0.05;

/// Below this many pixels a step runs on the calling thread.
const PAR_THRESHOLD: usize = 64 * 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Conductance {
    /// `1 / (1 + (s / kappa)^2)`
    #[default]
    Pm1,
    /// `exp(-(s / kappa)^2)`
    Pm2,
}

impl Conductance {
    pub fn as_str(self) -> &'static str {
        match self {
            Conductance::Pm1 => "pm1",
            Conductance::Pm2 => "pm2",
        }
    }
}

impl std::str::FromStr for Conductance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pm1" => Ok(Self::Pm1),
            "pm2" => Ok(Self::Pm2),
            other => Err(Error::InvalidParameter(format!(
                "unknown conductance {other:?} (expected pm1 or pm2)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffusionParams {
    pub tau: f64,
    pub iters: usize,
    pub kappa: f64,
    pub g_type: Conductance,
}

impl Default for DiffusionParams {
    fn default() -> Self {
        Self {
            tau: DEFAULT_TAU,
            iters: 20,
            kappa: DEFAULT_KAPPA,
            g_type: Conductance::Pm1,
        }
    }
}

impl DiffusionParams {
    pub fn validate(&self) -> Result<()> {
        check_tau(self.tau)?;
        check_kappa(self.kappa)
    }
}

pub fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau <= MAX_TAU {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "tau must lie in (0, {MAX_TAU}], got {tau}"
        )))
    }
}

fn check_kappa(kappa: f64) -> Result<()> {
    if kappa > 0.0 && kappa.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "kappa must be finite and > 0, got {kappa}"
        )))
    }
}

/// Edge flux weight for a gradient magnitude; lies in `(0, 1]` with `g(0) = 1`.
pub fn conductance(grad_mag: f64, kappa: f64, g_type: Conductance) -> f64 {
    let r = grad_mag / kappa;
    match g_type {
        Conductance::Pm1 => 1.0 / (1.0 + r * r),
        Conductance::Pm2 => (-(r * r)).exp(),
    }
}

/// Neighbour directions, in the order used by [`diffusion_step`]'s weight callback.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dir {
    Left,
    Right,
    Up,
    Down,
}

/// One explicit step with caller-supplied edge weights.
///
/// `weight(x, y, dir, u_s, u_p)` must be symmetric: the weight seen from `s`
/// towards `p` equals the weight seen from `p` towards `s`, and lie in `[0, 1]`.
pub fn diffusion_step<F>(img: &ImageBuffer, tau: f64, weight: F) -> Result<ImageBuffer>
where
    F: Fn(usize, usize, Dir, f64, f64) -> f64 + Sync,
{
    check_tau(tau)?;
    let (w, h) = (img.width(), img.height());
    let src = img.data();
    let mut out = vec![0.0; src.len()];

    let row = |y: usize, dst: &mut [f64]| {
        for (x, cell) in dst.iter_mut().enumerate() {
            let s = y * w + x;
            let us = src[s];
            let mut flux = [0.0f64; 4];
            let mut lo = us;
            let mut hi = us;
            let mut push = |slot: usize, dir: Dir, up: f64| {
                let k = weight(x, y, dir, us, up);
                if k != 0.0 {
                    flux[slot] = k * (up - us);
                    lo = lo.min(up);
                    hi = hi.max(up);
                }
            };
            if x > 0 {
                push(0, Dir::Left, src[s - 1]);
            }
            if x + 1 < w {
                push(1, Dir::Right, src[s + 1]);
            }
            if y > 0 {
                push(2, Dir::Up, src[s - w]);
            }
            if y + 1 < h {
                push(3, Dir::Down, src[s + w]);
            }
            *cell = (us + tau * sorted_sum4(flux)).clamp(lo, hi);
        }
    };

    if src.len() >= PAR_THRESHOLD {
        out.par_chunks_mut(w)
            .enumerate()
            .for_each(|(y, dst)| row(y, dst));
    } else {
        out.chunks_mut(w)
            .enumerate()
            .for_each(|(y, dst)| row(y, dst));
    }
    Ok(ImageBuffer::from_raw(w, h, out))
}

/// Order-independent sum of four terms (sorted ascending, then accumulated).
#[inline]
fn sorted_sum4(mut v: [f64; 4]) -> f64 {
    // 5-comparator sorting network
    let mut cswap = |i: usize, j: usize| {
        if v[j] < v[i] {
            v.swap(i, j);
        }
    };
    cswap(0, 1);
    cswap(2, 3);
    cswap(0, 2);
    cswap(1, 3);
    cswap(1, 2);
    ((v[0] + v[1]) + v[2]) + v[3]
}

pub fn isotropic_step(img: &ImageBuffer, tau: f64) -> Result<ImageBuffer> {
    diffusion_step(img, tau, |_, _, _, _, _| 1.0)
}

/// Linear (heat equation) smoothing: `params.iters` isotropic steps.
pub fn isotropic_filter(img: &ImageBuffer, params: &DiffusionParams) -> Result<ImageBuffer> {
    check_tau(params.tau)?;
    let mut cur = img.clone();
    for _ in 0..params.iters {
        cur = isotropic_step(&cur, params.tau)?;
    }
    Ok(cur)
}

/// Perona-Malik step; the conductance of each edge is evaluated from `|u_p - u_s|`.
pub fn anisotropic_step(
    img: &ImageBuffer,
    tau: f64,
    kappa: f64,
    g_type: Conductance,
) -> Result<ImageBuffer> {
    check_kappa(kappa)?;
    diffusion_step(img, tau, |_, _, _, us, up| {
        conductance((up - us).abs(), kappa, g_type)
    })
}

pub fn anisotropic_filter(img: &ImageBuffer, params: &DiffusionParams) -> Result<ImageBuffer> {
    params.validate()?;
    let mut cur = img.clone();
    for _ in 0..params.iters {
        cur = anisotropic_step(&cur, params.tau, params.kappa, params.g_type)?;
    }
    Ok(cur)
}

/// `sum over undirected 4-neighbour edges of (u_p - u_s)^2`.
pub fn dirichlet_energy(img: &ImageBuffer) -> f64 {
    let (w, h) = (img.width(), img.height());
    let d = img.data();
    let mut e = 0.0;
    for y in 0..h {
        for x in 0..w {
            let s = y * w + x;
            if x + 1 < w {
                e += (d[s + 1] - d[s]).powi(2);
            }
            if y + 1 < h {
                e += (d[s + w] - d[s]).powi(2);
            }
        }
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::{make_synthetic, SyntheticKind, SyntheticSpec};

    fn img(w: usize, h: usize, data: &[f64]) -> ImageBuffer {
        ImageBuffer::new(w, h, data.to_vec()).unwrap()
    }

    fn lcg_image(w: usize, h: usize, seed: u64) -> ImageBuffer {
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        let data = (0..w * h)
            .map(|_| {
                s = s
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                (s >> 11) as f64 / (1u64 << 53) as f64
            })
            .collect();
        ImageBuffer::new(w, h, data).unwrap()
    }

    #[test]
    fn tau_bounds() {
        let i = img(2, 1, &[0.0, 1.0]);
        assert!(isotropic_step(&i, 0.0).is_err());
        assert!(isotropic_step(&i, 0.26).is_err());
        assert!(isotropic_step(&i, f64::NAN).is_err());
        assert!(isotropic_step(&i, 0.25).is_ok());
        assert!(anisotropic_step(&i, 0.2, 0.0, Conductance::Pm1).is_err());
    }

    #[test]
    fn constant_image_is_fixed_point() {
        let c = ImageBuffer::filled(5, 4, 0.37).unwrap();
        assert_eq!(isotropic_step(&c, 0.25).unwrap(), c);
        assert_eq!(
            anisotropic_step(&c, 0.25, 0.05, Conductance::Pm2).unwrap(),
            c
        );
    }

    #[test]
    fn isotropic_three_pixel_example() {
        let out = isotropic_step(&img(3, 1, &[0.0, 1.0, 0.0]), 0.25).unwrap();
        assert_eq!(out.data(), &[0.25, 0.5, 0.25]);
    }

    #[test]
    fn anisotropic_two_pixel_example() {
        let out = anisotropic_step(&img(2, 1, &[0.0, 1.0]), 0.25, 1.0, Conductance::Pm1).unwrap();
        assert_eq!(out.data(), &[0.125, 0.875]);
    }

    #[test]
    fn conductance_values() {
        for g in [Conductance::Pm1, Conductance::Pm2] {
            assert_eq!(conductance(0.0, 0.3, g), 1.0);
        }
        assert_eq!(conductance(0.05, 0.05, Conductance::Pm1), 0.5);
        assert!((conductance(0.05, 0.05, Conductance::Pm2) - (-1.0f64).exp()).abs() < 1e-15);
        let mut prev = 1.0;
        for i in 1..100 {
            let g = conductance(i as f64 * 0.01, 0.05, Conductance::Pm1);
            assert!(g <= prev && g > 0.0);
            prev = g;
        }
    }

    #[test]
    fn iters_zero_is_identity() {
        let i = lcg_image(6, 5, 3);
        let p = DiffusionParams {
            iters: 0,
            ..Default::default()
        };
        assert_eq!(isotropic_filter(&i, &p).unwrap(), i);
        assert_eq!(anisotropic_filter(&i, &p).unwrap(), i);
    }

    #[test]
    fn dihedral_commutation_is_exact() {
        let i = lcg_image(12, 12, 11);
        let p = DiffusionParams {
            iters: 7,
            ..Default::default()
        };
        for f in [isotropic_filter, anisotropic_filter] {
            assert_eq!(f(&i.rot90(), &p).unwrap(), f(&i, &p).unwrap().rot90());
            assert_eq!(
                f(&i.flip_horizontal(), &p).unwrap(),
                f(&i, &p).unwrap().flip_horizontal()
            );
        }
    }

    #[test]
    fn isotropic_step_never_raises_dirichlet_energy() {
        let mut cur = lcg_image(16, 9, 5);
        for _ in 0..30 {
            let next = isotropic_step(&cur, 0.25).unwrap();
            assert!(dirichlet_energy(&next) <= dirichlet_energy(&cur) * (1.0 + 1e-12));
            cur = next;
        }
    }

    #[test]
    fn anisotropic_preserves_step_edge_better() {
        let step = make_synthetic(&SyntheticSpec::new(SyntheticKind::Step, 32, 32)).unwrap();
        let p = DiffusionParams::default();
        let iso = isotropic_filter(&step, &p).unwrap();
        let aniso = anisotropic_filter(&step, &p).unwrap();
        let jump = |i: &ImageBuffer| i.get(16, 10) - i.get(15, 10);
        assert!(
            jump(&aniso) > jump(&iso),
            "{} vs {}",
            jump(&aniso),
            jump(&iso)
        );
    }
}

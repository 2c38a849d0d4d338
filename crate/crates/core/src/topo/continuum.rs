//! Point-wise (per-pixel) topological indicator and the segmentation built on it.

use super::segment::{merge_small_regions, SegmentationMap, UnionFind};
use super::{DerivativeField, DerivativeMode};
use crate::error::{Error, Result};
use crate::image::ImageBuffer;

pub const DEFAULT_THRESHOLD: f64 = -0.003;

/// Per-pixel `-(Gx^2 + Gy^2)`, with central differences in the interior and
/// one-sided differences on the border. A dimension of length one
/// contributes zero.
pub fn continuum_td_field(img: &ImageBuffer) -> DerivativeField {
    let (w, h) = (img.width(), img.height());
    let u = img.data();
    let diff = |n: usize, i: usize, at: &dyn Fn(usize) -> f64| -> f64 {
        if n < 2 {
            0.0
        } else if i == 0 {
            at(1) - at(0)
        } else if i == n - 1 {
            at(n - 1) - at(n - 2)
        } else {
            (at(i + 1) - at(i - 1)) / 2.0
        }
    };
    let mut values = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let gx = diff(w, x, &|i| u[y * w + i]);
            let gy = diff(h, y, &|j| u[j * w + x]);
            values.push(-(gx * gx + gy * gy));
        }
    }
    DerivativeField {
        mode: DerivativeMode::Continuum,
        width: w,
        height: h,
        values,
    }
}

/// Segments by thresholding the point-wise indicator.
///
/// Pixels with indicator `< threshold` are boundary pixels. The remaining
/// pixels are grouped into 4-connected components; boundary pixels are then
/// absorbed wave by wave, each joining the adjacent labelled region whose
/// seed mean is closest to its own intensity (ties: lower label). Finally
/// regions below `min_region_size` are merged as in crack segmentation.
pub fn continuum_td_segment(
    img: &ImageBuffer,
    threshold: f64,
    min_region_size: usize,
) -> Result<SegmentationMap> {
    if threshold.is_nan() || threshold >= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "continuum threshold must be negative, got {threshold}"
        )));
    }
    if min_region_size == 0 {
        return Err(Error::InvalidParameter(
            "min_region_size must be >= 1".to_string(),
        ));
    }
    let (w, h) = (img.width(), img.height());
    let u = img.data();
    let field = continuum_td_field(img);
    let boundary: Vec<bool> = field.values.iter().map(|&d| d < threshold).collect();

    let mut uf = UnionFind::new(w * h);
    for y in 0..h {
        for x in 0..w {
            let s = y * w + x;
            if boundary[s] {
                continue;
            }
            if x + 1 < w && !boundary[s + 1] {
                uf.union(s, s + 1);
            }
            if y + 1 < h && !boundary[s + w] {
                uf.union(s, s + w);
            }
        }
    }

    if boundary.iter().all(|&b| b) {
        // no seeds: the whole (connected) lattice is one region
        let seg = SegmentationMap::from_keys(w, h, &vec![0; w * h])?;
        return Ok(seg);
    }

    const UNLABELLED: usize = usize::MAX;
    let roots: Vec<usize> = (0..w * h)
        .map(|i| if boundary[i] { UNLABELLED } else { uf.find(i) })
        .collect();
    // dense seed ids in first-pixel order
    let mut dense = vec![UNLABELLED; w * h];
    let mut seed_sum: Vec<f64> = Vec::new();
    let mut seed_count: Vec<usize> = Vec::new();
    let mut label = vec![UNLABELLED; w * h];
    for i in 0..w * h {
        let r = roots[i];
        if r == UNLABELLED {
            continue;
        }
        if dense[r] == UNLABELLED {
            dense[r] = seed_sum.len();
            seed_sum.push(0.0);
            seed_count.push(0);
        }
        let l = dense[r];
        label[i] = l;
        seed_sum[l] += u[i];
        seed_count[l] += 1;
    }
    let seed_mean: Vec<f64> = seed_sum
        .iter()
        .zip(&seed_count)
        .map(|(s, &c)| s / c as f64)
        .collect();

    let mut pending: Vec<usize> = (0..w * h).filter(|&i| label[i] == UNLABELLED).collect();
    while !pending.is_empty() {
        let mut assigned = Vec::new();
        let mut rest = Vec::new();
        for &i in &pending {
            let (x, y) = (i % w, i / w);
            let mut best: Option<(f64, usize)> = None;
            let mut consider = |j: usize| {
                let l = label[j];
                if l == UNLABELLED {
                    return;
                }
                let d = (seed_mean[l] - u[i]).abs();
                let better = match best {
                    None => true,
                    Some((bd, bl)) => d < bd || (d == bd && l < bl),
                };
                if better {
                    best = Some((d, l));
                }
            };
            if x > 0 {
                consider(i - 1);
            }
            if x + 1 < w {
                consider(i + 1);
            }
            if y > 0 {
                consider(i - w);
            }
            if y + 1 < h {
                consider(i + w);
            }
            match best {
                Some((_, l)) => assigned.push((i, l)),
                None => rest.push(i),
            }
        }
        debug_assert!(!assigned.is_empty());
        for (i, l) in assigned {
            label[i] = l;
        }
        pending = rest;
    }

    let seg = SegmentationMap::from_keys(w, h, &label)?;
    Ok(merge_small_regions(&seg, Some(img), min_region_size))
}

//! Objective quality measures and run traces.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::ImageBuffer;
use crate::topo::SegmentationMap;

/// Mean squared error over all pixels.
pub fn mse(a: &ImageBuffer, b: &ImageBuffer) -> Result<f64> {
    a.same_shape(b)?;
    let sum: f64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok(sum / a.len() as f64)
}

/// PSNR in decibels, `+inf` for identical images.
pub fn psnr(a: &ImageBuffer, b: &ImageBuffer, max_val: f64) -> Result<f64> {
    if max_val.is_nan() || max_val <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "max_val must be > 0, got {max_val}"
        )));
    }
    Ok(psnr_from_mse(mse(a, b)?, max_val))
}

pub fn psnr_from_mse(mse: f64, max_val: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (max_val * max_val / mse).log10()
    }
}

pub fn region_count(seg: &SegmentationMap) -> usize {
    seg.region_count()
}

/// Pixels with at least one 4-neighbour carrying a different label.
pub fn boundary_pixels(seg: &SegmentationMap) -> Vec<bool> {
    let (w, h) = (seg.width(), seg.height());
    let l = seg.labels();
    let mut out = vec![false; w * h];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if x + 1 < w && l[i] != l[i + 1] {
                out[i] = true;
                out[i + 1] = true;
            }
            if y + 1 < h && l[i] != l[i + w] {
                out[i] = true;
                out[i + w] = true;
            }
        }
    }
    out
}

/// Fraction of `from` pixels having a `to` pixel within Chebyshev distance `tol`.
fn matched_fraction(from: &[bool], to: &[bool], w: usize, h: usize, tol: usize) -> f64 {
    let mut total = 0usize;
    let mut hit = 0usize;
    for y in 0..h {
        for x in 0..w {
            if !from[y * w + x] {
                continue;
            }
            total += 1;
            let (y0, y1) = (y.saturating_sub(tol), (y + tol).min(h - 1));
            let (x0, x1) = (x.saturating_sub(tol), (x + tol).min(w - 1));
            if (y0..=y1).any(|yy| (x0..=x1).any(|xx| to[yy * w + xx])) {
                hit += 1;
            }
        }
    }
    hit as f64 / total as f64
}

/// Boundary F1 score between two segmentations with a pixel tolerance.
///
/// 1 when both boundaries are empty, 0 when exactly one is.
pub fn boundary_f1(pred: &SegmentationMap, truth: &SegmentationMap, tol: usize) -> Result<f64> {
    if pred.width() != truth.width() || pred.height() != truth.height() {
        return Err(Error::DimensionMismatch {
            left_width: pred.width(),
            left_height: pred.height(),
            right_width: truth.width(),
            right_height: truth.height(),
        });
    }
    let (w, h) = (pred.width(), pred.height());
    let bp = boundary_pixels(pred);
    let bt = boundary_pixels(truth);
    let (np, nt) = (bp.iter().any(|&b| b), bt.iter().any(|&b| b));
    match (np, nt) {
        (false, false) => return Ok(1.0),
        (false, true) | (true, false) => return Ok(0.0),
        _ => {}
    }
    let precision = matched_fraction(&bp, &bt, w, h, tol);
    let recall = matched_fraction(&bt, &bp, w, h, tol);
    if precision + recall == 0.0 {
        return Ok(0.0);
    }
    Ok(2.0 * precision * recall / (precision + recall))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub cost: f64,
    pub cumulative_cracks: usize,
    pub mse: f64,
}

/// Per-outer-iteration history of a restoration run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub records: Vec<TraceRecord>,
}

impl IterationTrace {
    pub fn push(&mut self, record: TraceRecord) {
        debug_assert!(self
            .records
            .last()
            .is_none_or(|r| r.iteration < record.iteration
                && r.cumulative_cracks <= record.cumulative_cracks));
        self.records.push(record);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// CSV with header `iteration,cost,cumulative_cracks,mse`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,cost,cumulative_cracks,mse\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.iteration, r.cost, r.cumulative_cracks, r.mse
            ));
        }
        out
    }
}

/// Summary numbers of one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub mse: f64,
    pub psnr_db: f64,
    pub cracks_total: usize,
    pub regions: usize,
    pub iterations_run: usize,
    pub wall_time_ms: u64,
}

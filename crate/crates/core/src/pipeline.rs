//! Noise -> optional prefilter -> segmentation runs, with the paired
//! "segment-only" / "restore-then-segment" comparison.

use std::time::Instant;

use crate::diffusion::{anisotropic_filter, isotropic_filter, DiffusionParams};
use crate::error::{Error, Result};
use crate::image::{add_gaussian_noise, ImageBuffer, NoiseSpec};
use crate::metrics::{boundary_f1, mse, psnr_from_mse, IterationTrace};
use crate::report::ReportRow;
use crate::topo::{
    continuum_td_segment, discrete_td_restore, extract_segmentation, CrackSet, SegmentationMap,
    TopoParams, DEFAULT_THRESHOLD,
};

pub const STAGE_SEGMENT_ONLY: &str = "segment-only";
pub const STAGE_RESTORE_THEN_SEGMENT: &str = "restore-then-segment";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Prefilter {
    None,
    Isotropic,
    Anisotropic,
}

impl Prefilter {
    pub fn as_str(self) -> &'static str {
        match self {
            Prefilter::None => "none",
            Prefilter::Isotropic => "isotropic",
            Prefilter::Anisotropic => "anisotropic",
        }
    }

    pub fn apply(self, img: &ImageBuffer, params: &DiffusionParams) -> Result<ImageBuffer> {
        match self {
            Prefilter::None => Ok(img.clone()),
            Prefilter::Isotropic => isotropic_filter(img, params),
            Prefilter::Anisotropic => anisotropic_filter(img, params),
        }
    }
}

impl std::str::FromStr for Prefilter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Self::None),
            "isotropic" => Ok(Self::Isotropic),
            "anisotropic" => Ok(Self::Anisotropic),
            other => Err(Error::InvalidParameter(format!(
                "unknown filter {other:?} (expected none, isotropic or anisotropic)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegMethod {
    Discrete,
    Continuum,
}

impl SegMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            SegMethod::Discrete => "discrete",
            SegMethod::Continuum => "continuum",
        }
    }
}

impl std::str::FromStr for SegMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "discrete" => Ok(Self::Discrete),
            "continuum" => Ok(Self::Continuum),
            other => Err(Error::InvalidParameter(format!(
                "unknown segmentation method {other:?} (expected discrete or continuum)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentParams {
    pub method: SegMethod,
    pub topo: TopoParams,
    /// Indicator cutoff for the continuum method; must be negative.
    pub threshold: f64,
}

impl Default for SegmentParams {
    fn default() -> Self {
        Self {
            method: SegMethod::Discrete,
            topo: TopoParams::default(),
            threshold: DEFAULT_THRESHOLD,
        }
    }
}

/// Output of one segmentation run.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentOutcome {
    pub segmentation: SegmentationMap,
    /// The restored image for the discrete method, the input otherwise.
    pub image: ImageBuffer,
    pub cracks: Option<CrackSet>,
    pub trace: Option<IterationTrace>,
}

impl SegmentOutcome {
    pub fn iterations_run(&self) -> usize {
        self.trace.as_ref().map_or(0, IterationTrace::len)
    }

    pub fn cracks_total(&self) -> usize {
        self.cracks.as_ref().map_or(0, CrackSet::len)
    }
}

pub fn segment(img: &ImageBuffer, params: &SegmentParams) -> Result<SegmentOutcome> {
    match params.method {
        SegMethod::Discrete => {
            let r = discrete_td_restore(img, &params.topo)?;
            let segmentation =
                extract_segmentation(&r.field, params.topo.min_region_size, Some(&r.image))?;
            Ok(SegmentOutcome {
                segmentation,
                cracks: Some(r.field.crack_set()),
                trace: Some(r.trace),
                image: r.image,
            })
        }
        SegMethod::Continuum => {
            if params.topo.min_region_size == 0 {
                return Err(Error::InvalidParameter(
                    "min_region_size must be >= 1".to_string(),
                ));
            }
            let segmentation =
                continuum_td_segment(img, params.threshold, params.topo.min_region_size)?;
            Ok(SegmentOutcome {
                segmentation,
                image: img.clone(),
                cracks: None,
                trace: None,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub noise: NoiseSpec,
    pub prefilter: Prefilter,
    pub diffusion: DiffusionParams,
    pub segment: SegmentParams,
    /// Also run the unfiltered baseline on the same noisy image.
    pub compare: bool,
    /// Chebyshev tolerance for boundary F1, in pixels.
    pub f1_tolerance: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            noise: NoiseSpec {
                sigma: 0.1,
                seed: 42,
            },
            prefilter: Prefilter::Isotropic,
            diffusion: DiffusionParams::default(),
            segment: SegmentParams::default(),
            compare: false,
            f1_tolerance: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageOutcome {
    pub stage: &'static str,
    pub prefilter: Prefilter,
    /// Image handed to the segmenter (noisy or prefiltered).
    pub filtered: ImageBuffer,
    pub outcome: SegmentOutcome,
    pub row: ReportRow,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutcome {
    pub noisy: ImageBuffer,
    pub stages: Vec<StageOutcome>,
}

impl PipelineOutcome {
    pub fn rows(&self) -> Vec<ReportRow> {
        self.stages.iter().map(|s| s.row.clone()).collect()
    }
}

fn run_stage(
    noisy: &ImageBuffer,
    clean: &ImageBuffer,
    truth: &SegmentationMap,
    prefilter: Prefilter,
    cfg: &PipelineConfig,
) -> Result<StageOutcome> {
    let start = Instant::now();
    let filtered = prefilter.apply(noisy, &cfg.diffusion)?;
    let outcome = segment(&filtered, &cfg.segment)?;
    let err = mse(&outcome.image, clean)?;
    let f1 = boundary_f1(&outcome.segmentation, truth, cfg.f1_tolerance)?;
    let stage = match prefilter {
        Prefilter::None => STAGE_SEGMENT_ONLY,
        _ => STAGE_RESTORE_THEN_SEGMENT,
    };
    let row = ReportRow {
        stage: stage.to_string(),
        method: format!("{}+{}", prefilter.as_str(), cfg.segment.method.as_str()),
        iteration: outcome.iterations_run(),
        mse: Some(err),
        psnr_db: Some(psnr_from_mse(err, 1.0)),
        cracks_total: outcome.cracks_total(),
        regions: Some(outcome.segmentation.region_count()),
        boundary_f1: Some(f1),
        wall_time_ms: start.elapsed().as_millis() as u64,
    };
    Ok(StageOutcome {
        stage,
        prefilter,
        filtered,
        outcome,
        row,
    })
}

/// Adds noise to `clean` and segments it, scoring against `truth`.
///
/// With `compare`, the unfiltered baseline runs first on the same noisy
/// image, followed by the configured prefilter.
pub fn run_pipeline(
    clean: &ImageBuffer,
    truth: &SegmentationMap,
    cfg: &PipelineConfig,
) -> Result<PipelineOutcome> {
    cfg.diffusion.validate()?;
    if truth.width() != clean.width() || truth.height() != clean.height() {
        return Err(Error::DimensionMismatch {
            left_width: clean.width(),
            left_height: clean.height(),
            right_width: truth.width(),
            right_height: truth.height(),
        });
    }
    let noisy = add_gaussian_noise(clean, &cfg.noise)?;
    let mut order = Vec::new();
    if cfg.compare && cfg.prefilter != Prefilter::None {
        order.push(Prefilter::None);
    }
    order.push(cfg.prefilter);
    let stages = order
        .into_iter()
        .map(|p| run_stage(&noisy, clean, truth, p, cfg))
        .collect::<Result<_>>()?;
    Ok(PipelineOutcome { noisy, stages })
}

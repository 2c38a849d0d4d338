//! Grayscale restoration and segmentation with diffusion filters and the
//! discrete topological derivative.
//!
//! * [`image`]: the [`ImageBuffer`] raster, PGM I/O, noise and synthetic images.
//! * [`diffusion`]: isotropic and Perona-Malik explicit diffusion.
//! * [`topo`]: crack insertion driven by the edge topological derivative,
//!   crack-aware diffusion, and segmentation extraction.
//! * [`metrics`]: MSE, PSNR, boundary F1 and iteration traces.
//! * [`report`]: CSV / JSON report rows.
//! * [`pipeline`]: noise, prefilter and segmentation runs end to end.

pub mod diffusion;
pub mod error;
pub mod image;
pub mod metrics;
pub mod pipeline;
pub mod report;
pub mod topo;

pub use diffusion::{Conductance, DiffusionParams};
pub use error::{Error, Result};
pub use image::{ImageBuffer, NoiseSpec, SyntheticKind, SyntheticSpec};
pub use metrics::{IterationTrace, MetricsReport, TraceRecord};
pub use pipeline::{PipelineConfig, Prefilter, SegMethod, SegmentParams};
pub use report::{ReportFormat, ReportRow};
pub use topo::{
    CrackSet, DerivativeField, DerivativeMode, DiffusivityField, EdgeLattice, SegmentationMap,
    TopoParams,
};

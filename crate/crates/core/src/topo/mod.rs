//! Discrete topological derivative over inter-pixel edges, greedy crack
//! insertion, crack-aware diffusion, and the segmentations built on them.
//!
//! The cost of an image `u` under a conductivity field `k` is
//! `sum_e k_e * (u_p - u_s)^2` over the undirected 4-neighbour edges
//! `e = (s, p)`. The topological derivative of an edge is the exact change in
//! that cost when the edge is toggled between intact (`k = 1`) and cracked
//! (`k = 0`).

mod continuum;
mod derivative;
mod field;
mod lattice;
mod restore;
mod segment;

pub use continuum::{continuum_td_field, continuum_td_segment, DEFAULT_THRESHOLD};
pub use derivative::{
    all_derivatives, cost_functional, edge_topological_derivative, DerivativeField, DerivativeMode,
};
pub use field::{CrackSet, DiffusivityField, K_CRACK, K_ON};
pub use lattice::EdgeLattice;
pub use restore::{
    diffuse_with_cracks, discrete_td_restore, insert_cracks, Restoration, TopoParams,
    DEFAULT_MIN_DERIVATIVE,
};
pub use segment::{
    extract_segmentation, label_components, merge_small_regions, segmentation_from_levels,
    SegmentationMap,
};

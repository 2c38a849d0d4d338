//! Region labelling from crack fields, small-region cleanup and label I/O.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{DiffusivityField, EdgeLattice};
use crate::error::{Error, Result};
use crate::image::ImageBuffer;

/// Per-pixel region labels `0..regions`, numbered by first occurrence in
/// row-major order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentationMap {
    width: usize,
    height: usize,
    labels: Vec<usize>,
    regions: usize,
}

impl SegmentationMap {
    /// Builds a map from arbitrary per-pixel keys; equal keys share a region.
    /// Labels are renumbered in first-pixel row-major order.
    pub fn from_keys(width: usize, height: usize, keys: &[usize]) -> Result<Self> {
        if keys.len() != width * height {
            return Err(Error::SizeMismatch {
                what: "label grid",
                expected: width * height,
                got: keys.len(),
            });
        }
        let mut remap = std::collections::HashMap::new();
        let labels = keys
            .iter()
            .map(|k| {
                let next = remap.len();
                *remap.entry(*k).or_insert(next)
            })
            .collect();
        Ok(Self {
            width,
            height,
            labels,
            regions: remap.len(),
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    #[inline]
    pub fn label(&self, x: usize, y: usize) -> usize {
        self.labels[y * self.width + x]
    }

    pub fn region_count(&self) -> usize {
        self.regions
    }

    pub fn region_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.regions];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    pub fn rot90(&self) -> Self {
        let keys = crate::image::rot90_grid(&self.labels, self.width, self.height);
        Self::from_keys(self.height, self.width, &keys).expect("rotation preserves size")
    }

    pub fn flip_horizontal(&self) -> Self {
        let keys = crate::image::flip_horizontal_grid(&self.labels, self.width, self.height);
        Self::from_keys(self.width, self.height, &keys).expect("flip preserves size")
    }

    /// Lossless text form: one line per row, labels separated by single spaces.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.labels.len() * 3);
        for row in self.labels.chunks(self.width) {
            for (i, l) in row.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                let _ = write!(out, "{l}");
            }
            out.push('\n');
        }
        out
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        let mut width = None;
        let mut keys = Vec::new();
        let mut height = 0;
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let row: Vec<usize> = line
                .split_whitespace()
                .map(|t| t.parse())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| {
                    Error::InvalidParameter(format!(
                        "label grid line {}: not an integer row",
                        n + 1
                    ))
                })?;
            match width {
                None => width = Some(row.len()),
                Some(w) if w != row.len() => {
                    return Err(Error::InvalidParameter(format!(
                        "label grid line {} has {} entries, expected {w}",
                        n + 1,
                        row.len()
                    )))
                }
                _ => {}
            }
            keys.extend(row);
            height += 1;
        }
        let width =
            width.ok_or_else(|| Error::InvalidParameter("label grid is empty".to_string()))?;
        Self::from_keys(width, height, &keys)
    }

    /// Lossy view for display: label `l` maps to intensity `l / (regions - 1)`.
    pub fn to_image(&self) -> ImageBuffer {
        let denom = self.regions.saturating_sub(1).max(1) as f64;
        let data = self.labels.iter().map(|&l| l as f64 / denom).collect();
        ImageBuffer::from_raw(self.width, self.height, data)
    }
}

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub(crate) struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
    }
}

/// Connected components of the pixel graph whose edges are the intact edges
/// of `kf`. No merging.
pub fn label_components(kf: &DiffusivityField) -> SegmentationMap {
    let l = kf.lattice();
    let mut uf = UnionFind::new(l.pixel_count());
    for e in 0..l.edge_count() {
        if !kf.is_cracked(e) {
            let (s, p) = l.endpoints(e);
            uf.union(s, p);
        }
    }
    let roots: Vec<usize> = (0..l.pixel_count()).map(|i| uf.find(i)).collect();
    SegmentationMap::from_keys(l.width(), l.height(), &roots).expect("sizes agree")
}

/// Regions from a crack field, followed by small-region merging.
///
/// Regions smaller than `min_region_size` are merged into the adjacent region
/// with the closest mean intensity of `image`. Without an image the largest
/// adjacent region is chosen instead.
pub fn extract_segmentation(
    kf: &DiffusivityField,
    min_region_size: usize,
    image: Option<&ImageBuffer>,
) -> Result<SegmentationMap> {
    if let Some(img) = image {
        super::derivative::check_dims(img, kf)?;
    }
    let seg = label_components(kf);
    Ok(merge_small_regions(&seg, image, min_region_size))
}

/// Truth labels for a piecewise-constant image: 4-connected runs of equal
/// intensity.
pub fn segmentation_from_levels(img: &ImageBuffer) -> SegmentationMap {
    let l = EdgeLattice::new(img.width(), img.height());
    let mut kf = DiffusivityField::all_on(l);
    for e in 0..l.edge_count() {
        let (s, p) = l.endpoints(e);
        if img.data()[s] != img.data()[p] {
            kf.crack(e);
        }
    }
    label_components(&kf)
}

struct Region {
    sum: f64,
    count: usize,
    adjacent: BTreeSet<usize>,
}

impl Region {
    fn mean(&self) -> f64 {
        self.sum / self.count as f64
    }
}

/// Repeatedly merges the smallest region below `min_size` (ties: lower
/// label) into its adjacent region with the closest mean (ties: lower label)
/// until no small region remains or a single region is left.
pub fn merge_small_regions(
    seg: &SegmentationMap,
    image: Option<&ImageBuffer>,
    min_size: usize,
) -> SegmentationMap {
    if min_size <= 1 || seg.regions <= 1 {
        return seg.clone();
    }
    let (w, h) = (seg.width, seg.height);
    let mut regions: Vec<Region> = (0..seg.regions)
        .map(|_| Region {
            sum: 0.0,
            count: 0,
            adjacent: BTreeSet::new(),
        })
        .collect();
    for (i, &lab) in seg.labels.iter().enumerate() {
        regions[lab].count += 1;
        regions[lab].sum += image.map_or(0.0, |img| img.data()[i]);
    }
    for y in 0..h {
        for x in 0..w {
            let a = seg.labels[y * w + x];
            let mut link = |b: usize| {
                if a != b {
                    regions[a].adjacent.insert(b);
                    regions[b].adjacent.insert(a);
                }
            };
            if x + 1 < w {
                link(seg.labels[y * w + x + 1]);
            }
            if y + 1 < h {
                link(seg.labels[(y + 1) * w + x]);
            }
        }
    }

    let mut alive = seg.regions;
    let mut target: Vec<usize> = (0..seg.regions).collect();
    let mut small: BTreeSet<(usize, usize)> = regions
        .iter()
        .enumerate()
        .filter(|(_, r)| r.count < min_size)
        .map(|(i, r)| (r.count, i))
        .collect();

    while alive > 1 {
        let Some((_, r)) = small.pop_first() else {
            break;
        };
        let mean = regions[r].mean();
        let pick = regions[r].adjacent.iter().copied().min_by(|&a, &b| {
            let key = |n: usize| match image {
                Some(_) => (regions[n].mean() - mean).abs(),
                None => -(regions[n].count as f64),
            };
            key(a).total_cmp(&key(b)).then(a.cmp(&b))
        });
        let Some(n) = pick else {
            // isolated: nothing to merge into
            continue;
        };
        let absorbed = std::mem::take(&mut regions[r].adjacent);
        for &a in &absorbed {
            regions[a].adjacent.remove(&r);
            if a != n {
                regions[a].adjacent.insert(n);
                regions[n].adjacent.insert(a);
            }
        }
        let was_small = regions[n].count < min_size;
        if was_small {
            small.remove(&(regions[n].count, n));
        }
        regions[n].sum += regions[r].sum;
        regions[n].count += regions[r].count;
        regions[r].count = 0;
        if regions[n].count < min_size {
            small.insert((regions[n].count, n));
        }
        target[r] = n;
        alive -= 1;
    }

    // follow merge chains
    let resolve = |mut l: usize| {
        while target[l] != l {
            l = target[l];
        }
        l
    };
    let keys: Vec<usize> = seg.labels.iter().map(|&l| resolve(l)).collect();
    SegmentationMap::from_keys(w, h, &keys).expect("sizes agree")
}

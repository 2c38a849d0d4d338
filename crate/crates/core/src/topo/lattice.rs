use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Undirected 4-neighbour edges of a `width x height` pixel grid.
///
/// Edge indices enumerate all horizontal edges `(x, y)-(x + 1, y)` in
/// row-major order, followed by all vertical edges `(x, y)-(x, y + 1)` in
/// row-major order. Endpoints are returned as `(s, p)` with `s < p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeLattice {
    width: usize,
    height: usize,
}

impl EdgeLattice {
    pub fn new(width: usize, height: usize) -> Self {
        Self { width, height }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    pub fn horizontal_count(&self) -> usize {
        self.height * self.width.saturating_sub(1)
    }

    pub fn edge_count(&self) -> usize {
        self.horizontal_count() + self.width * self.height.saturating_sub(1)
    }

    /// Edge between `(x, y)` and `(x + 1, y)`.
    #[inline]
    pub fn horizontal(&self, x: usize, y: usize) -> usize {
        debug_assert!(x + 1 < self.width && y < self.height);
        y * (self.width - 1) + x
    }

    /// Edge between `(x, y)` and `(x, y + 1)`.
    #[inline]
    pub fn vertical(&self, x: usize, y: usize) -> usize {
        debug_assert!(x < self.width && y + 1 < self.height);
        self.horizontal_count() + y * self.width + x
    }

    /// Pixel indices `(s, p)`, `s < p`, joined by `edge`.
    #[inline]
    pub fn endpoints(&self, edge: usize) -> (usize, usize) {
        let hc = self.horizontal_count();
        if edge < hc {
            let (y, x) = (edge / (self.width - 1), edge % (self.width - 1));
            let s = y * self.width + x;
            (s, s + 1)
        } else {
            let s = edge - hc;
            (s, s + self.width)
        }
    }

    pub fn check_edge(&self, edge: usize) -> Result<()> {
        if edge < self.edge_count() {
            Ok(())
        } else {
            Err(Error::EdgeOutOfRange {
                index: edge,
                count: self.edge_count(),
            })
        }
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.edge_count()).map(|e| self.endpoints(e))
    }
}

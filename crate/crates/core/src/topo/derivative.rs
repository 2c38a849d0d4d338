use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{DiffusivityField, EdgeLattice};
use crate::error::{Error, Result};
use crate::image::ImageBuffer;

const PAR_THRESHOLD: usize = 64 * 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DerivativeMode {
    /// One value per lattice edge.
    Discrete,
    /// One value per pixel.
    Continuum,
}

/// Topological derivative values, per edge or per pixel depending on `mode`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativeField {
    pub mode: DerivativeMode,
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
}

impl DerivativeField {
    pub fn expected_len(&self) -> usize {
        match self.mode {
            DerivativeMode::Discrete => EdgeLattice::new(self.width, self.height).edge_count(),
            DerivativeMode::Continuum => self.width * self.height,
        }
    }
}

pub(crate) fn check_dims(img: &ImageBuffer, kf: &DiffusivityField) -> Result<()> {
    let l = kf.lattice();
    if img.width() != l.width() || img.height() != l.height() {
        return Err(Error::DimensionMismatch {
            left_width: img.width(),
            left_height: img.height(),
            right_width: l.width(),
            right_height: l.height(),
        });
    }
    Ok(())
}

#[inline]
fn edge_delta_sq(data: &[f64], lattice: &EdgeLattice, edge: usize) -> f64 {
    let (s, p) = lattice.endpoints(edge);
    let d = data[p] - data[s];
    d * d
}

/// Weighted Dirichlet cost: sum over undirected edges of `k_e * (u_p - u_s)^2`,
/// each edge counted once.
pub fn cost_functional(img: &ImageBuffer, kf: &DiffusivityField) -> Result<f64> {
    check_dims(img, kf)?;
    let l = kf.lattice();
    Ok((0..l.edge_count())
        .map(|e| kf.k(e) * edge_delta_sq(img.data(), l, e))
        .sum())
}

/// Cost change from toggling one edge: `(k_toggled - k_current) * (u_p - u_s)^2`.
///
/// Negative (or zero) for an intact edge, non-negative for a cracked one.
pub fn edge_topological_derivative(
    img: &ImageBuffer,
    kf: &DiffusivityField,
    edge: usize,
) -> Result<f64> {
    check_dims(img, kf)?;
    kf.lattice().check_edge(edge)?;
    Ok(edge_derivative_unchecked(img.data(), kf, edge))
}

#[inline]
fn edge_derivative_unchecked(data: &[f64], kf: &DiffusivityField, edge: usize) -> f64 {
    (kf.toggled_k(edge) - kf.k(edge)) * edge_delta_sq(data, kf.lattice(), edge)
}

/// Topological derivative of every edge in one pass.
pub fn all_derivatives(img: &ImageBuffer, kf: &DiffusivityField) -> Result<DerivativeField> {
    check_dims(img, kf)?;
    let n = kf.lattice().edge_count();
    let data = img.data();
    let values = if n >= PAR_THRESHOLD {
        (0..n)
            .into_par_iter()
            .map(|e| edge_derivative_unchecked(data, kf, e))
            .collect()
    } else {
        (0..n)
            .map(|e| edge_derivative_unchecked(data, kf, e))
            .collect()
    };
    Ok(DerivativeField {
        mode: DerivativeMode::Discrete,
        width: img.width(),
        height: img.height(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::{make_synthetic, SyntheticKind, SyntheticSpec};

    fn img(w: usize, h: usize, data: &[f64]) -> ImageBuffer {
        ImageBuffer::new(w, h, data.to_vec()).unwrap()
    }

    #[test]
    fn cost_examples() {
        let c = ImageBuffer::filled(4, 3, 0.7).unwrap();
        let kf = DiffusivityField::all_on(EdgeLattice::new(4, 3));
        assert_eq!(cost_functional(&c, &kf).unwrap(), 0.0);

        let two = img(2, 1, &[0.0, 1.0]);
        let kf = DiffusivityField::all_on(EdgeLattice::new(2, 1));
        assert_eq!(cost_functional(&two, &kf).unwrap(), 1.0);

        let sq = img(2, 2, &[0.0, 1.0, 0.0, 1.0]);
        let kf = DiffusivityField::all_on(EdgeLattice::new(2, 2));
        assert_eq!(cost_functional(&sq, &kf).unwrap(), 2.0);
    }

    #[test]
    fn derivative_signs() {
        let two = img(2, 1, &[0.0, 1.0]);
        let mut kf = DiffusivityField::all_on(EdgeLattice::new(2, 1));
        assert_eq!(edge_topological_derivative(&two, &kf, 0).unwrap(), -1.0);
        kf.crack(0);
        assert_eq!(edge_topological_derivative(&two, &kf, 0).unwrap(), 1.0);
        assert!(edge_topological_derivative(&two, &kf, 1).is_err());

        let flat = ImageBuffer::filled(3, 3, 0.4).unwrap();
        let kf = DiffusivityField::all_on(EdgeLattice::new(3, 3));
        let d = all_derivatives(&flat, &kf).unwrap();
        assert_eq!(d.values.len(), d.expected_len());
        assert!(d.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn dimension_mismatch() {
        let i = ImageBuffer::filled(3, 3, 0.4).unwrap();
        let kf = DiffusivityField::all_on(EdgeLattice::new(3, 2));
        assert!(matches!(
            cost_functional(&i, &kf),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(all_derivatives(&i, &kf).is_err());
    }

    #[test]
    fn step_boundary_edges_are_most_negative() {
        let step = make_synthetic(&SyntheticSpec::new(SyntheticKind::Step, 6, 5)).unwrap();
        let l = EdgeLattice::new(6, 5);
        let d = all_derivatives(&step, &DiffusivityField::all_on(l)).unwrap();
        let min = d.values.iter().cloned().fold(f64::INFINITY, f64::min);
        let argmins: Vec<usize> = (0..l.edge_count())
            .filter(|&e| d.values[e] == min)
            .collect();
        let crossing: Vec<usize> = (0..5).map(|y| l.horizontal(2, y)).collect();
        assert_eq!(argmins, crossing);
    }
}

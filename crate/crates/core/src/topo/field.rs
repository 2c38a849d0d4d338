use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::EdgeLattice;
use crate::error::{Error, Result};

/// Conductivity of an intact edge.
pub const K_ON: f64 = 1.0;
/// Conductivity of a cracked edge.
pub const K_CRACK: f64 = 0.0;

/// Per-edge conductivity; every edge is either intact ([`K_ON`]) or cracked
/// ([`K_CRACK`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffusivityField {
    lattice: EdgeLattice,
    k: Vec<f64>,
    cracked: usize,
}

impl DiffusivityField {
    pub fn all_on(lattice: EdgeLattice) -> Self {
        Self {
            lattice,
            k: vec![K_ON; lattice.edge_count()],
            cracked: 0,
        }
    }

    pub fn all_cracked(lattice: EdgeLattice) -> Self {
        Self {
            lattice,
            k: vec![K_CRACK; lattice.edge_count()],
            cracked: lattice.edge_count(),
        }
    }

    pub fn from_cracks(lattice: EdgeLattice, cracks: &CrackSet) -> Result<Self> {
        let mut field = Self::all_on(lattice);
        for &e in cracks.iter() {
            lattice.check_edge(e)?;
            field.crack(e);
        }
        Ok(field)
    }

    pub fn lattice(&self) -> &EdgeLattice {
        &self.lattice
    }

    #[inline]
    pub fn k(&self, edge: usize) -> f64 {
        self.k[edge]
    }

    pub fn values(&self) -> &[f64] {
        &self.k
    }

    #[inline]
    pub fn is_cracked(&self, edge: usize) -> bool {
        self.k[edge] == K_CRACK
    }

    pub fn cracked_count(&self) -> usize {
        self.cracked
    }

    /// Cracks `edge`; returns false if it was already cracked.
    pub fn crack(&mut self, edge: usize) -> bool {
        if self.is_cracked(edge) {
            return false;
        }
        self.k[edge] = K_CRACK;
        self.cracked += 1;
        true
    }

    /// The conductivity `edge` would have after toggling its state.
    #[inline]
    pub fn toggled_k(&self, edge: usize) -> f64 {
        if self.is_cracked(edge) {
            K_ON
        } else {
            K_CRACK
        }
    }

    pub fn toggled(&self, edge: usize) -> Self {
        let mut out = self.clone();
        if out.is_cracked(edge) {
            out.k[edge] = K_ON;
            out.cracked -= 1;
        } else {
            out.crack(edge);
        }
        out
    }

    pub fn crack_set(&self) -> CrackSet {
        CrackSet::from_iter((0..self.k.len()).filter(|&e| self.is_cracked(e)))
    }
}

/// A set of edge indices, kept in ascending order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrackSet {
    cracked: BTreeSet<usize>,
}

impl CrackSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, edge: usize) -> bool {
        self.cracked.insert(edge)
    }

    pub fn contains(&self, edge: usize) -> bool {
        self.cracked.contains(&edge)
    }

    pub fn len(&self) -> usize {
        self.cracked.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cracked.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &usize> {
        self.cracked.iter()
    }

    /// One edge index per line, ascending.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.cracked {
            let _ = writeln!(out, "{e}");
        }
        out
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        let mut set = Self::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let e = line.parse().map_err(|_| {
                Error::InvalidParameter(format!("crack list line {}: {line:?}", n + 1))
            })?;
            set.insert(e);
        }
        Ok(set)
    }
}

impl FromIterator<usize> for CrackSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        Self {
            cracked: iter.into_iter().collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crack_bookkeeping() {
        let l = EdgeLattice::new(3, 3);
        let mut f = DiffusivityField::all_on(l);
        assert!(f.crack(4));
        assert!(!f.crack(4));
        assert_eq!(f.cracked_count(), 1);
        assert_eq!(f.toggled(4).cracked_count(), 0);
        assert_eq!(f.toggled(5).cracked_count(), 2);
        assert!(f.values().iter().all(|&k| k == K_ON || k == K_CRACK));
        assert_eq!(f.crack_set().iter().copied().collect::<Vec<_>>(), vec![4]);
    }

    #[test]
    fn text_roundtrip_is_sorted() {
        let set = CrackSet::from_iter([9, 2, 5]);
        assert_eq!(set.to_text(), "2\n5\n9\n");
        assert_eq!(CrackSet::parse_text(&set.to_text()).unwrap(), set);
        assert!(CrackSet::parse_text("1\nx\n").is_err());
        let l = EdgeLattice::new(2, 2);
        assert!(DiffusivityField::from_cracks(l, &CrackSet::from_iter([4])).is_err());
    }
}

//! Bin grids and plain histograms shared by the energy- and frequency-space
//! measures.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct BinGrid {
    edges: Vec<f64>,
}

impl BinGrid {
    pub fn from_edges(edges: Vec<f64>) -> Result<Self> {
        if edges.len() < 2 {
            return Err(Error::InvalidBins("need at least two edges".into()));
        }
        if edges.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidBins("edges must be finite".into()));
        }
        if edges.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidBins("edges must be strictly increasing".into()));
        }
        Ok(Self { edges })
    }

    /// `count` equal bins covering [lo, hi].
    pub fn uniform(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if count == 0 || !(hi > lo) {
            return Err(Error::InvalidBins("uniform grid needs count ≥ 1 and hi > lo".into()));
        }
        let w = (hi - lo) / count as f64;
        let mut edges: Vec<f64> = (0..=count).map(|i| lo + w * i as f64).collect();
        edges[count] = hi;
        Self::from_edges(edges)
    }

    /// `2·half_count + 1` bins of width `width` centred on zero; the outer
    /// edges sit at ±(half_count + ½)·width. Negative edges are exact
    /// negations of the positive ones.
    pub fn centered(width: f64, half_count: usize) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::InvalidBins("width must be positive".into()));
        }
        let positive: Vec<f64> = (0..=half_count)
            .map(|j| (j as f64 + 0.5) * width)
            .collect();
        let mut edges: Vec<f64> = positive.iter().rev().map(|e| -e).collect();
        edges.extend_from_slice(&positive);
        Self::from_edges(edges)
    }

    /// Default frequency grid for a box with `site_count` sites and spectral
    /// bounds `bounds`: width (E₊−E₋)/⌈2√|Λ|⌉, reaching past ±(E₊−E₋).
    pub fn default_frequency(bounds: (f64, f64), site_count: usize) -> Result<Self> {
        let m = default_bin_count(site_count);
        let diameter = bounds.1 - bounds.0;
        Self::centered(diameter / m as f64, m)
    }

    /// Default energy grid: 2·⌈√|Λ|⌉ uniform bins over [E₋, E₊].
    pub fn default_energy(bounds: (f64, f64), site_count: usize) -> Result<Self> {
        let m = 2 * Float::ceil(Float::sqrt(site_count as f64)) as usize;
        Self::uniform(bounds.0, bounds.1, m)
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn lo(&self) -> f64 {
        self.edges[0]
    }

    pub fn hi(&self) -> f64 {
        self.edges[self.edges.len() - 1]
    }

    pub fn left(&self, i: usize) -> f64 {
        self.edges[i]
    }

    pub fn right(&self, i: usize) -> f64 {
        self.edges[i + 1]
    }

    pub fn center(&self, i: usize) -> f64 {
        0.5 * (self.edges[i] + self.edges[i + 1])
    }

    pub fn width(&self, i: usize) -> f64 {
        self.edges[i + 1] - self.edges[i]
    }

    /// Bin containing `x`: bins are [eᵢ, eᵢ₊₁) except the last, which is closed.
    pub fn locate(&self, x: f64) -> Option<usize> {
        if !(x >= self.lo() && x <= self.hi()) {
            return None;
        }
        let i = self.edges.partition_point(|&e| e <= x);
        Some(i.saturating_sub(1).min(self.len() - 1))
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.edges.len();
        (0..n).all(|i| self.edges[i] == -self.edges[n - 1 - i])
    }

    /// Mirror-consistent lookup for symmetric grids: `locate_even(−x)` is
    /// always the mirror bin of `locate_even(x)`.
    pub fn locate_even(&self, x: f64) -> Option<usize> {
        debug_assert!(self.is_symmetric());
        let n = self.len();
        // positive half-line uses (eᵢ, eᵢ₊₁] so that the central bin of an
        // odd grid is hit for x = 0 from either side
        let a = x.abs();
        if a > self.hi() {
            return None;
        }
        let i = self.edges.partition_point(|&e| e < a);
        let i = i.saturating_sub(1).min(n - 1);
        if x < 0.0 {
            Some(n - 1 - i)
        } else {
            Some(i)
        }
    }

    pub fn mirror(&self, i: usize) -> usize {
        self.len() - 1 - i
    }
}

/// ⌈2√|Λ|⌉.
pub fn default_bin_count(site_count: usize) -> usize {
    Float::ceil(2.0 * Float::sqrt(site_count as f64)) as usize
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub grid: BinGrid,
    pub mass: Vec<f64>,
}

impl Histogram {
    pub fn zeros(grid: BinGrid) -> Self {
        let mass = vec![0.0; grid.len()];
        Self { grid, mass }
    }

    pub fn total(&self) -> f64 {
        self.mass.iter().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centered_grid_is_symmetric_and_odd() {
        let g = BinGrid::centered(0.5, 3).unwrap();
        assert_eq!(g.len(), 7);
        assert!(g.is_symmetric());
        assert_eq!(g.center(3), 0.0);
        assert_eq!(g.hi(), 1.75);
    }

    #[test]
    fn locate_even_mirrors_exactly() {
        let g = BinGrid::centered(0.3, 5).unwrap();
        for &x in &[0.0, 0.15, 0.45, 1.0, 1.65, 0.3 * 2.5] {
            let p = g.locate_even(x).unwrap();
            let m = g.locate_even(-x).unwrap();
            if x == 0.0 {
                assert_eq!(p, 5);
            }
            assert_eq!(m, g.mirror(p));
            assert!(g.left(p) <= x && x <= g.right(p));
        }
        assert_eq!(g.locate_even(10.0), None);
    }

    #[test]
    fn locate_half_open() {
        let g = BinGrid::uniform(0.0, 1.0, 4).unwrap();
        assert_eq!(g.locate(0.0), Some(0));
        assert_eq!(g.locate(0.25), Some(1));
        assert_eq!(g.locate(1.0), Some(3));
        assert_eq!(g.locate(1.0 + 1e-12), None);
        assert_eq!(g.locate(-1e-12), None);
    }

    #[test]
    fn default_frequency_reaches_diameter() {
        let g = BinGrid::default_frequency((-3.0, 3.0), 16).unwrap();
        assert_eq!(g.len(), 17);
        assert!(g.hi() >= 6.0);
        assert!((g.width(0) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(BinGrid::from_edges(alloc::vec![0.0]).is_err());
        assert!(BinGrid::from_edges(alloc::vec![0.0, 0.0]).is_err());
        assert!(BinGrid::from_edges(alloc::vec![0.0, f64::NAN]).is_err());
    }
}

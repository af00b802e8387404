//! Finite boxes Λ_L ⊂ Z^d and the lattice operators acting on ℓ²(Λ_L).
//!
//! Sites are indexed by `site = x_0 + L·x_1 + L²·x_2 + …`, with `x_0` the
//! first coordinate (the field direction) and every `x_i ∈ {0, …, L−1}`.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Boundary {
    Periodic,
    Dirichlet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LatticeSpec {
    dimension: usize,
    linear_size: usize,
    boundary: Boundary,
}

impl LatticeSpec {
    pub fn new(dimension: usize, linear_size: usize, boundary: Boundary) -> Result<Self> {
        if dimension == 0 {
            return Err(invalid("lattice.dimension", "must be at least 1"));
        }
        if linear_size < 2 {
            return Err(invalid(
                "lattice.linear_size",
                "must be at least 2 (nearest-neighbour stencil is degenerate)",
            ));
        }
        linear_size
            .checked_pow(dimension as u32)
            .ok_or_else(|| invalid("lattice.linear_size", "site count overflows usize"))?;
        Ok(Self {
            dimension,
            linear_size,
            boundary,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn linear_size(&self) -> usize {
        self.linear_size
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    /// |Λ| = L^d.
    pub fn site_count(&self) -> usize {
        self.linear_size.pow(self.dimension as u32)
    }

    /// Coordinate of `site` along `axis`.
    pub fn coordinate(&self, site: usize, axis: usize) -> usize {
        (site / self.linear_size.pow(axis as u32)) % self.linear_size
    }

    pub fn coordinates(&self, site: usize) -> Vec<usize> {
        (0..self.dimension).map(|a| self.coordinate(site, a)).collect()
    }

    pub fn site(&self, coords: &[usize]) -> usize {
        debug_assert_eq!(coords.len(), self.dimension);
        coords
            .iter()
            .rev()
            .fold(0, |acc, &c| acc * self.linear_size + c)
    }

    /// Neighbour of `site` one step along `axis` in direction `forward`;
    /// `None` when the step leaves a Dirichlet box.
    pub fn neighbor(&self, site: usize, axis: usize, forward: bool) -> Option<usize> {
        let l = self.linear_size;
        let stride = l.pow(axis as u32);
        let c = self.coordinate(site, axis);
        let next = match (forward, self.boundary) {
            (true, _) if c + 1 < l => c + 1,
            (false, _) if c > 0 => c - 1,
            (true, Boundary::Periodic) => 0,
            (false, Boundary::Periodic) => l - 1,
            (_, Boundary::Dirichlet) => return None,
        };
        Some(site - c * stride + next * stride)
    }
}

/// Which scalar multiplies the stored real matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// Operator = matrix.
    Real,
    /// Operator = i · matrix.
    Imaginary,
}

/// Dense |Λ|×|Λ| operator whose entries are either all real or all purely
/// imaginary, stored as a real matrix plus a phase.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeOperator {
    phase: Phase,
    matrix: DMatrix<f64>,
}

impl LatticeOperator {
    pub fn real(matrix: DMatrix<f64>) -> Self {
        Self {
            phase: Phase::Real,
            matrix,
        }
    }

    pub fn imaginary(matrix: DMatrix<f64>) -> Self {
        Self {
            phase: Phase::Imaginary,
            matrix,
        }
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    /// The real matrix `M` with operator = `M` or `i·M`.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        let v = self.matrix[(row, col)];
        match self.phase {
            Phase::Real => Complex64::new(v, 0.0),
            Phase::Imaginary => Complex64::new(0.0, v),
        }
    }

    pub fn to_complex(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.dim(), self.dim(), |r, c| self.entry(r, c))
    }

    /// max |A − A†| over all entries.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let sign = match self.phase {
            Phase::Real => 1.0,
            Phase::Imaginary => -1.0,
        };
        let mut worst = 0.0f64;
        for r in 0..n {
            for c in r..n {
                let d = (self.matrix[(r, c)] - sign * self.matrix[(c, r)]).abs();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn is_hermitian(&self) -> bool {
        self.matrix.is_square() && self.hermiticity_defect() == 0.0
    }

    /// Max absolute row sum; an upper bound on ‖A‖.
    pub fn row_sum_norm(&self) -> f64 {
        self.matrix
            .row_iter()
            .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// Matrix of −Δ, the nearest-neighbour stencil with coefficient −1.
pub fn build_laplacian(spec: &LatticeSpec) -> LatticeOperator {
    let mut m = DMatrix::zeros(spec.site_count(), spec.site_count());
    for axis in 0..spec.dimension() {
        add_axis_bonds(spec, axis, &mut m);
    }
    LatticeOperator::real(m)
}

/// The part of the −Δ matrix made of bonds along `axis`. For `axis = 0`
/// this is the double commutator [X₁, [X₁, −Δ]] on a Dirichlet box.
pub fn build_axis_hopping(spec: &LatticeSpec, axis: usize) -> LatticeOperator {
    let mut m = DMatrix::zeros(spec.site_count(), spec.site_count());
    add_axis_bonds(spec, axis, &mut m);
    LatticeOperator::real(m)
}

fn add_axis_bonds(spec: &LatticeSpec, axis: usize, m: &mut DMatrix<f64>) {
    for site in 0..spec.site_count() {
        for forward in [true, false] {
            if let Some(nb) = spec.neighbor(site, axis, forward) {
                m[(site, nb)] -= 1.0;
            }
        }
    }
}

/// Velocity operator Ẋ₁ = i[−Δ, X₁] in hopping form,
/// (Ẋ₁φ)(x) = −i(φ(x+ê₁) − φ(x−ê₁)), truncated or wrapped like the box.
pub fn build_velocity(spec: &LatticeSpec) -> LatticeOperator {
    let mut m = DMatrix::zeros(spec.site_count(), spec.site_count());
    for site in 0..spec.site_count() {
        if let Some(nb) = spec.neighbor(site, 0, true) {
            m[(site, nb)] -= 1.0;
        }
        if let Some(nb) = spec.neighbor(site, 0, false) {
            m[(site, nb)] += 1.0;
        }
    }
    LatticeOperator::imaginary(m)
}

/// Position operator X₁, diagonal with the first coordinate centred on the
/// box midpoint: entries in {−(L−1)/2, …, (L−1)/2}.
pub fn build_position(spec: &LatticeSpec) -> Result<LatticeOperator> {
    if spec.boundary() != Boundary::Dirichlet {
        return Err(Error::DirichletRequired("position operator X₁"));
    }
    let centre = (spec.linear_size() as f64 - 1.0) / 2.0;
    let diag: Vec<f64> = (0..spec.site_count())
        .map(|s| spec.coordinate(s, 0) as f64 - centre)
        .collect();
    Ok(LatticeOperator::real(DMatrix::from_diagonal(
        &nalgebra::DVector::from_vec(diag),
    )))
}

/// Plane-wave eigenvalues −2 Σᵢ cos(2π jᵢ / L) of the periodic −Δ, sorted.
pub fn periodic_laplacian_spectrum(spec: &LatticeSpec) -> Vec<f64> {
    use num_traits::Float;
    let l = spec.linear_size();
    let mut out = vec![0.0; spec.site_count()];
    for (s, e) in out.iter_mut().enumerate() {
        *e = (0..spec.dimension())
            .map(|a| {
                let k = 2.0 * core::f64::consts::PI * spec.coordinate(s, a) as f64 / l as f64;
                -2.0 * Float::cos(k)
            })
            .sum();
    }
    out.sort_by(f64::total_cmp);
    out
}

//! Hamiltonian assembly, dense eigendecomposition, density of states and the
//! Wegner bound.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_traits::Float;

use crate::bins::BinGrid;
use crate::disorder::{DisorderSpec, PotentialField};
use crate::error::{invalid, Error, Result};
use crate::lattice::{build_laplacian, LatticeOperator, LatticeSpec, Phase};
use crate::stats::mean_stderr;

/// H = (−Δ) + diag(λV_ω).
pub fn build_hamiltonian(lattice: &LatticeSpec, potential: &PotentialField) -> Result<LatticeOperator> {
    let n = lattice.site_count();
    if potential.len() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            found: potential.len(),
        });
    }
    let mut m = build_laplacian(lattice).matrix().clone();
    for (i, v) in potential.values().iter().enumerate() {
        m[(i, i)] += v;
    }
    Ok(LatticeOperator::real(m))
}

/// Full eigensystem of one Hamiltonian realization.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralData {
    energies: Vec<f64>,
    eigenvectors: DMatrix<f64>,
    bounds: (f64, f64),
}

impl SpectralData {
    /// Ascending eigenvalues.
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Orthonormal eigenvectors as columns, in the order of [`Self::energies`].
    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn site_count(&self) -> usize {
        self.energies.len()
    }

    /// Interval [E₋, E₊] known to contain the spectrum.
    pub fn bounds(&self) -> (f64, f64) {
        self.bounds
    }

    /// Replace the containment interval, e.g. with the model bounds of
    /// [`crate::disorder::spectral_bounds`]. Fails if an eigenvalue falls
    /// outside it by more than rounding.
    pub fn with_bounds(mut self, bounds: (f64, f64)) -> Result<Self> {
        let slack = 1e-12 * (bounds.1 - bounds.0).abs().max(1.0);
        let lo = self.energies.first().copied().unwrap_or(bounds.0);
        let hi = self.energies.last().copied().unwrap_or(bounds.1);
        if lo < bounds.0 - slack || hi > bounds.1 + slack {
            return Err(invalid(
                "spectral.bounds",
                alloc::format!("spectrum [{lo}, {hi}] not inside [{}, {}]", bounds.0, bounds.1),
            ));
        }
        self.bounds = bounds;
        Ok(self)
    }

    /// Degeneracy threshold ε_deg = 1e−10·(E₊ − E₋).
    pub fn degeneracy_threshold(&self) -> f64 {
        DEGENERACY_RELATIVE * (self.bounds.1 - self.bounds.0)
    }

    /// max_n ‖H vₙ − Eₙ vₙ‖.
    pub fn max_residual(&self, h: &LatticeOperator) -> f64 {
        let hv = h.matrix() * &self.eigenvectors;
        let mut worst = 0.0f64;
        for (n, &e) in self.energies.iter().enumerate() {
            let r = hv.column(n) - self.eigenvectors.column(n) * e;
            worst = worst.max(r.norm());
        }
        worst
    }

    /// ‖VᵀV − I‖_max.
    pub fn orthonormality_defect(&self) -> f64 {
        let g = self.eigenvectors.transpose() * &self.eigenvectors;
        let n = g.nrows();
        let mut worst = 0.0f64;
        for r in 0..n {
            for c in 0..n {
                let target = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((g[(r, c)] - target).abs());
            }
        }
        worst
    }

    /// Matrix of g(H) in the site basis, V·diag(g(Eₙ))·Vᵀ.
    pub fn apply_function(&self, g: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let mut scaled = self.eigenvectors.clone();
        for (n, &e) in self.energies.iter().enumerate() {
            let w = g(e);
            scaled.column_mut(n).scale_mut(w);
        }
        scaled * self.eigenvectors.transpose()
    }

    /// Diagonal of Vᵀ·A·V for a real operator A.
    pub fn diagonal_in_eigenbasis(&self, a: &DMatrix<f64>) -> Vec<f64> {
        let av = a * &self.eigenvectors;
        (0..self.site_count())
            .map(|n| self.eigenvectors.column(n).dot(&av.column(n)))
            .collect()
    }
}

pub const DEGENERACY_RELATIVE: f64 = 1e-10;

const HERMITIAN_TOLERANCE: f64 = 1e-14;

/// Dense symmetric eigendecomposition with ascending energies and
/// eigenvectors normalised so their first non-negligible component is
/// positive. The containment interval defaults to the Gershgorin interval
/// of `h`.
pub fn eigendecompose(h: &LatticeOperator) -> Result<SpectralData> {
    if h.phase() != Phase::Real {
        return Err(invalid("hamiltonian", "must be real symmetric"));
    }
    let m = h.matrix();
    if !m.is_square() {
        return Err(Error::SizeMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    let scale = h.row_sum_norm().max(1.0);
    let defect = h.hermiticity_defect();
    if defect > HERMITIAN_TOLERANCE * scale {
        return Err(Error::NotHermitian { deviation: defect });
    }
    let n = m.nrows();
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, 0).ok_or(Error::EigenNoConvergence)?;
    let (values, vectors) = jacobi_refine(m, eig.eigenvectors, scale)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let energies: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    if energies.iter().any(|e| !e.is_finite()) {
        return Err(Error::EigenNoConvergence);
    }
    let mut vecs = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        let mut v: DVector<f64> = vectors.column(i).into_owned();
        if let Some(first) = v.iter().copied().find(|x| x.abs() > 1e-10) {
            if first < 0.0 {
                v.neg_mut();
            }
        }
        vecs.set_column(col, &v);
    }

    let bounds = gershgorin(m);
    Ok(SpectralData {
        energies,
        eigenvectors: vecs,
        bounds,
    })
}

/// Cyclic Jacobi sweeps on VᵀMV. The QR solver occasionally stops with
/// residuals ~1e−9; starting from its nearly diagonal output, Jacobi
/// converges quadratically to residuals at rounding level.
fn jacobi_refine(m: &DMatrix<f64>, mut v: DMatrix<f64>, scale: f64) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = m.nrows();
    let mut a = v.transpose() * m * &v;
    let floor = 1e-3 * f64::EPSILON * scale;
    for _ in 0..30 {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if Float::abs(apq) <= floor {
                    continue;
                }
                rotated = true;
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = Float::signum(theta) / (Float::abs(theta) + Float::sqrt(theta * theta + 1.0));
                let c = 1.0 / Float::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
        if !rotated {
            return Ok(((0..n).map(|i| a[(i, i)]).collect(), v));
        }
    }
    Err(Error::EigenNoConvergence)
}

fn gershgorin(m: &DMatrix<f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for r in 0..m.nrows() {
        let radius: f64 = (0..m.ncols()).filter(|&c| c != r).map(|c| m[(r, c)].abs()).sum();
        lo = lo.min(m[(r, r)] - radius);
        hi = hi.max(m[(r, r)] + radius);
    }
    (lo, hi)
}

/// Disorder-averaged density of states on a fixed energy grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DosHistogram {
    pub grid: BinGrid,
    /// Mean mass per bin; each realization contributes total mass 1.
    pub mass: Vec<f64>,
    /// Standard error of the mean per bin (zero for a single realization).
    pub stderr: Vec<f64>,
    pub realizations: usize,
}

impl DosHistogram {
    pub fn density(&self, i: usize) -> f64 {
        self.mass[i] / self.grid.width(i)
    }

    pub fn density_stderr(&self, i: usize) -> f64 {
        self.stderr[i] / self.grid.width(i)
    }

    pub fn total(&self) -> f64 {
        self.mass.iter().sum()
    }
}

/// Normalised eigenvalue counting measure of each realization, averaged
/// over the batch.
pub fn dos_histogram(batch: &[SpectralData], grid: &BinGrid) -> Result<DosHistogram> {
    if batch.is_empty() {
        return Err(invalid("dos.batch", "empty batch"));
    }
    let nb = grid.len();
    let mut per_bin: Vec<Vec<f64>> = vec![Vec::with_capacity(batch.len()); nb];
    for sd in batch {
        let (lo, hi) = sd.bounds();
        if grid.lo() > lo || grid.hi() < hi {
            return Err(Error::InvalidBins(alloc::format!(
                "energy grid [{}, {}] does not cover spectral bounds [{lo}, {hi}]",
                grid.lo(),
                grid.hi()
            )));
        }
        let w = 1.0 / sd.site_count() as f64;
        let mut counts = vec![0.0; nb];
        for &e in sd.energies() {
            let i = grid
                .locate(e)
                .ok_or_else(|| Error::InvalidBins(alloc::format!("eigenvalue {e} outside grid")))?;
            counts[i] += w;
        }
        for (acc, c) in per_bin.iter_mut().zip(counts) {
            acc.push(c);
        }
    }
    let (mass, stderr) = per_bin
        .iter()
        .map(|xs| {
            let (m, s) = mean_stderr(xs);
            (m, if s.is_nan() { 0.0 } else { s })
        })
        .unzip();
    Ok(DosHistogram {
        grid: grid.clone(),
        mass,
        stderr,
        realizations: batch.len(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct WegnerReport {
    /// ‖ρ‖_∞ / λ.
    pub bound: f64,
    /// min over bins of (bound + k·stderr − density); negative means violated.
    pub worst_margin: f64,
    pub worst_bin: usize,
    pub max_density: f64,
    pub holds: bool,
}

/// Checks the averaged DOS density against ‖ρ‖_∞/λ, allowing `sigmas`
/// standard errors per bin.
pub fn wegner_check(dos: &DosHistogram, spec: &DisorderSpec, sigmas: f64) -> Result<WegnerReport> {
    if spec.lambda <= 0.0 {
        return Err(invalid("disorder.lambda", "Wegner bound is vacuous at λ = 0"));
    }
    let bound = spec.distribution.density_sup() / spec.lambda;
    let mut worst_margin = f64::INFINITY;
    let mut worst_bin = 0;
    let mut max_density = 0.0f64;
    for i in 0..dos.grid.len() {
        let d = dos.density(i);
        max_density = max_density.max(d);
        let margin = bound + sigmas * dos.density_stderr(i) - d;
        if margin < worst_margin {
            worst_margin = margin;
            worst_bin = i;
        }
    }
    Ok(WegnerReport {
        bound,
        worst_margin,
        worst_bin,
        max_density,
        holds: worst_margin >= 0.0,
    })
}

/// Free-lattice DOS density in d = 1, 1/(π√(4 − E²)) on (−2, 2).
pub fn free_chain_dos_density(e: f64) -> f64 {
    if e.abs() >= 2.0 {
        0.0
    } else {
        1.0 / (core::f64::consts::PI * Float::sqrt(4.0 - e * e))
    }
}

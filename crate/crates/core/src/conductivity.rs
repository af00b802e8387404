//! Finite-volume conductivity measure Σ_μ^T, its atom/Γ decomposition, the
//! auxiliary measures Υ and Ψ, and the identities and bounds they satisfy.
//!
//! Everything is evaluated in the eigenbasis of one realization H = Σ Eₙ|n⟩⟨n|.
//! With D = VᵀẊ₁V the velocity in that basis, the trace per unit volume
//! becomes (1/|Λ|)·Tr and
//!
//! ```text
//! Σ(B) = (π/|Λ|) Σ_{(n,m): Eₙ−Eₘ ∈ B} |Dₙₘ|² · w(Eₙ, Eₘ)
//! ```
//!
//! where `w` is [`pair_weight`]. Pairs closer than the degeneracy threshold
//! are the kernel of the Liouvillian and make up the atom at ν = 0; all other
//! pairs form Γ and are binned on a symmetric frequency grid. Each unordered
//! pair is added to a bin and its mirror with the same value, so evenness is
//! exact.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::Float;

use crate::bins::{BinGrid, Histogram};
use crate::error::{invalid, Error, Result};
use crate::lattice::{build_axis_hopping, Boundary, LatticeOperator, LatticeSpec, Phase};
use crate::quadrature::{integrate, QuadratureSpec};
use crate::spectral::SpectralData;
use crate::thermo::{c_mu_t, fermi, neg_derivative, pair_weight, SechConvention, ThermoParams};

use core::f64::consts::PI;

/// Velocity matrix elements and transition frequencies of one realization:
/// the finite-volume eigen-decomposition of the Liouvillian.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSpectrum {
    energies: Vec<f64>,
    /// Real matrix R with D = R (real velocity) or D = i·R.
    elements: DMatrix<f64>,
    phase: Phase,
    bounds: (f64, f64),
    eps_deg: f64,
}

/// Transforms the velocity into the eigenbasis: D = Vᵀ·Ẋ₁·V.
pub fn pair_spectrum(sd: &SpectralData, velocity: &LatticeOperator) -> Result<PairSpectrum> {
    let n = sd.site_count();
    if velocity.dim() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            found: velocity.dim(),
        });
    }
    let v = sd.eigenvectors();
    let elements = v.transpose() * (velocity.matrix() * v);
    Ok(PairSpectrum {
        energies: sd.energies().to_vec(),
        elements,
        phase: velocity.phase(),
        bounds: sd.bounds(),
        eps_deg: sd.degeneracy_threshold(),
    })
}

impl PairSpectrum {
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn site_count(&self) -> usize {
        self.energies.len()
    }

    pub fn bounds(&self) -> (f64, f64) {
        self.bounds
    }

    pub fn degeneracy_threshold(&self) -> f64 {
        self.eps_deg
    }

    /// ν_{nm} = Eₙ − Eₘ.
    pub fn frequency(&self, n: usize, m: usize) -> f64 {
        self.energies[n] - self.energies[m]
    }

    pub fn element(&self, n: usize, m: usize) -> Complex64 {
        let r = self.elements[(n, m)];
        match self.phase {
            Phase::Real => Complex64::new(r, 0.0),
            Phase::Imaginary => Complex64::new(0.0, r),
        }
    }

    /// |D_{nm}|².
    pub fn weight_sq(&self, n: usize, m: usize) -> f64 {
        let r = self.elements[(n, m)];
        r * r
    }

    pub fn is_degenerate(&self, n: usize, m: usize) -> bool {
        Float::abs(self.frequency(n, m)) <= self.eps_deg
    }

    /// E_max − E_min of this realization.
    pub fn max_frequency(&self) -> f64 {
        match (self.energies.first(), self.energies.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }

    /// Default frequency grid for this realization's box and bounds.
    pub fn default_grid(&self) -> Result<BinGrid> {
        BinGrid::default_frequency(self.bounds, self.site_count())
    }
}

/// A finite positive even measure on frequency space: Γ on a symmetric bin
/// grid plus the atom at ν = 0 stored separately.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureHistogram {
    pub grid: BinGrid,
    pub mass: Vec<f64>,
    pub atom: f64,
    /// Per-bin standard error (ensemble means only).
    pub stderr: Option<Vec<f64>>,
    pub atom_stderr: Option<f64>,
    pub realizations: usize,
}

impl MeasureHistogram {
    pub fn zeros(grid: BinGrid) -> Self {
        let mass = vec![0.0; grid.len()];
        Self {
            grid,
            mass,
            atom: 0.0,
            stderr: None,
            atom_stderr: None,
            realizations: 1,
        }
    }

    /// Γ(R), the mass off the atom.
    pub fn gamma_total(&self) -> f64 {
        self.mass.iter().sum()
    }

    /// Σ(R) = atom + Γ(R).
    pub fn total(&self) -> f64 {
        self.atom + self.gamma_total()
    }

    /// Smallest bin mass or atom; negative means positivity failed.
    pub fn min_mass(&self) -> f64 {
        self.mass.iter().copied().fold(self.atom, f64::min)
    }

    /// max over bins of |m(B) − m(−B)| / max(m(B), m(−B)).
    pub fn evenness_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.mass.len() {
            let a = self.mass[i];
            let b = self.mass[self.grid.mirror(i)];
            let scale = Float::abs(a).max(Float::abs(b));
            if scale > 0.0 {
                worst = worst.max(Float::abs(a - b) / scale);
            }
        }
        worst
    }

    /// Total mass in bins lying entirely outside [−radius, radius].
    pub fn mass_outside(&self, radius: f64) -> f64 {
        (0..self.mass.len())
            .filter(|&i| self.grid.left(i) >= radius || self.grid.right(i) <= -radius)
            .map(|i| Float::abs(self.mass[i]))
            .sum()
    }

    /// Mass of the atom plus the central bin containing ν = 0: the weight
    /// seen at zero frequency at the grid's resolution.
    pub fn zero_cell_mass(&self) -> f64 {
        let central = self.grid.locate_even(0.0).map(|i| self.mass[i]).unwrap_or(0.0);
        self.atom + central
    }
}

/// Atom at ν = 0 for T = 0, where (−f)' is a distribution.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum ZeroTemperatureAtom {
    /// Degenerate pairs carry no weight.
    Omit,
    /// ψ(μ) δ₀ with ψ estimated by Gaussian smoothing of the Ψ point masses
    /// at bandwidth 4× the default DOS bin width.
    #[default]
    SmoothedPsi,
    SmoothedPsiWithBandwidth(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MeasureOptions {
    pub zero_temperature_atom: ZeroTemperatureAtom,
}

/// Accumulates `weight(n, m)·|D_{nm}|²` over all ordered pairs, binning
/// nondegenerate pairs at ν_{nm} and summing degenerate ones into the atom.
/// `weight` must be symmetric in (n, m). No prefactor is applied.
pub fn accumulate_pairs<F>(ps: &PairSpectrum, grid: &BinGrid, mut weight: F) -> Result<(Vec<f64>, f64)>
where
    F: FnMut(usize, usize, bool) -> f64,
{
    if !grid.is_symmetric() {
        return Err(Error::InvalidBins("frequency grid must be symmetric about 0".into()));
    }
    let n = ps.site_count();
    let mut bins = vec![0.0; grid.len()];
    let mut atom = 0.0;
    for a in 0..n {
        atom += weight(a, a, true) * ps.weight_sq(a, a);
        for b in (a + 1)..n {
            let d2 = ps.weight_sq(a, b);
            let degenerate = ps.is_degenerate(a, b);
            let w = weight(a, b, degenerate) * d2;
            if degenerate {
                atom += 2.0 * w;
                continue;
            }
            let nu = ps.frequency(a, b);
            let i = grid.locate_even(nu).ok_or_else(|| {
                Error::InvalidBins(alloc::format!(
                    "pair frequency {nu} beyond grid radius {}",
                    grid.hi()
                ))
            })?;
            bins[i] += w;
            bins[grid.mirror(i)] += w;
        }
    }
    Ok((bins, atom))
}

fn check_zero_temperature_level(ps: &PairSpectrum, p: &ThermoParams) -> Result<()> {
    if let Some(&e) = ps
        .energies()
        .iter()
        .find(|&&e| Float::abs(e - p.fermi_level) <= ps.degeneracy_threshold())
    {
        return Err(Error::FermiLevelOnEigenvalue {
            mu: p.fermi_level,
            energy: e,
        });
    }
    Ok(())
}

/// Σ_μ^T of one realization on `grid`.
pub fn conductivity_measure(
    ps: &PairSpectrum,
    p: &ThermoParams,
    grid: &BinGrid,
    options: &MeasureOptions,
) -> Result<MeasureHistogram> {
    if p.is_zero_temperature() {
        check_zero_temperature_level(ps, p)?;
    }
    let eps = ps.degeneracy_threshold();
    let energies = ps.energies();
    let (bins, atom) = accumulate_pairs(ps, grid, |a, b, _| pair_weight(energies[a], energies[b], p, eps))?;
    let scale = PI / ps.site_count() as f64;
    let atom = if p.is_zero_temperature() {
        match options.zero_temperature_atom {
            ZeroTemperatureAtom::Omit => 0.0,
            ZeroTemperatureAtom::SmoothedPsi => psi_density(ps, p.fermi_level, default_psi_bandwidth(ps)),
            ZeroTemperatureAtom::SmoothedPsiWithBandwidth(h) => psi_density(ps, p.fermi_level, h),
        }
    } else {
        scale * atom
    };
    Ok(MeasureHistogram {
        grid: grid.clone(),
        mass: bins.into_iter().map(|m| scale * m).collect(),
        atom,
        stderr: None,
        atom_stderr: None,
        realizations: 1,
    })
}

/// Σ(R) summed directly over pairs, without binning.
pub fn conductivity_total(ps: &PairSpectrum, p: &ThermoParams) -> f64 {
    let eps = ps.degeneracy_threshold();
    let e = ps.energies();
    let n = ps.site_count();
    let mut sum = 0.0;
    for a in 0..n {
        for b in 0..n {
            sum += ps.weight_sq(a, b) * pair_weight(e[a], e[b], p, eps);
        }
    }
    PI * sum / n as f64
}

/// Υ(B) = (1/|Λ|) Σ_{nondegenerate (n,m), ν∈B} |D_{nm}|²; temperature free.
pub fn upsilon_measure(ps: &PairSpectrum, grid: &BinGrid) -> Result<MeasureHistogram> {
    let (bins, _) = accumulate_pairs(ps, grid, |_, _, degenerate| if degenerate { 0.0 } else { 1.0 })?;
    let scale = 1.0 / ps.site_count() as f64;
    Ok(MeasureHistogram {
        grid: grid.clone(),
        mass: bins.into_iter().map(|m| scale * m).collect(),
        atom: 0.0,
        stderr: None,
        atom_stderr: None,
        realizations: 1,
    })
}

/// Ψ as point masses (energy, mass): (π/|Λ|)|D_{nm}|² for every degenerate
/// ordered pair, located at the pair's mean energy.
pub fn psi_point_masses(ps: &PairSpectrum) -> Vec<(f64, f64)> {
    let n = ps.site_count();
    let scale = PI / n as f64;
    let e = ps.energies();
    let mut out = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if ps.is_degenerate(a, b) {
                let w = ps.weight_sq(a, b);
                if w != 0.0 {
                    out.push((0.5 * (e[a] + e[b]), scale * w));
                }
            }
        }
    }
    out
}

/// Ψ binned on an energy grid.
pub fn psi_diagonal(ps: &PairSpectrum, energy_grid: &BinGrid) -> Result<Histogram> {
    let mut h = Histogram::zeros(energy_grid.clone());
    for (e, w) in psi_point_masses(ps) {
        let i = energy_grid
            .locate(e)
            .ok_or_else(|| Error::InvalidBins(alloc::format!("energy {e} outside Ψ grid")))?;
        h.mass[i] += w;
    }
    Ok(h)
}

/// Ψ(R).
pub fn psi_total(ps: &PairSpectrum) -> f64 {
    psi_point_masses(ps).iter().map(|(_, w)| w).sum()
}

/// Gaussian-kernel estimate of the density ψ of Ψ at `energy`.
pub fn psi_density(ps: &PairSpectrum, energy: f64, bandwidth: f64) -> f64 {
    let norm = 1.0 / (bandwidth * Float::sqrt(2.0 * PI));
    psi_point_masses(ps)
        .iter()
        .map(|&(e, w)| {
            let z = (e - energy) / bandwidth;
            w * norm * Float::exp(-0.5 * z * z)
        })
        .sum()
}

/// 4× the default DOS bin width, (E₊−E₋)/(2⌈√|Λ|⌉).
pub fn default_psi_bandwidth(ps: &PairSpectrum) -> f64 {
    let (lo, hi) = ps.bounds();
    let bins = 2.0 * Float::ceil(Float::sqrt(ps.site_count() as f64));
    4.0 * (hi - lo) / bins
}

/// Two sides of the sum rule Σ(R) = −π·𝒯(K₁ f(H)) for one periodic
/// realization, with K₁ the x₁-bond part of the −Δ matrix (equal to
/// [X₁,[X₁,H]] wherever X₁ is defined).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SumRuleTerms {
    pub lhs: f64,
    pub rhs: f64,
}

pub fn sum_rule_terms(
    lattice: &LatticeSpec,
    sd: &SpectralData,
    ps: &PairSpectrum,
    p: &ThermoParams,
    options: &MeasureOptions,
) -> Result<SumRuleTerms> {
    if lattice.boundary() != Boundary::Periodic {
        return Err(Error::PeriodicRequired("sum rule"));
    }
    if lattice.site_count() != sd.site_count() {
        return Err(Error::SizeMismatch {
            expected: lattice.site_count(),
            found: sd.site_count(),
        });
    }
    let lhs = if p.is_zero_temperature() {
        let grid = ps.default_grid()?;
        conductivity_measure(ps, p, &grid, options)?.total()
    } else {
        conductivity_total(ps, p)
    };
    let k1 = build_axis_hopping(lattice, 0);
    let diag = sd.diagonal_in_eigenbasis(k1.matrix());
    let trace: f64 = sd
        .energies()
        .iter()
        .zip(&diag)
        .map(|(&e, &k)| fermi(e, p) * k)
        .sum();
    Ok(SumRuleTerms {
        lhs,
        rhs: -PI * trace / sd.site_count() as f64,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SandwichReport {
    pub c_mu_t: f64,
    /// min over bins of Γ(B) − (π/4T)·C·Υ(B).
    pub lower_margin: f64,
    /// min over bins of (π/4T)·Υ(B) − Γ(B).
    pub upper_margin: f64,
    pub tolerance: f64,
    pub violations: usize,
    pub holds: bool,
}

/// (π/4T)·C_μ^T·Υ(B) ≤ Γ(B) ≤ (π/4T)·Υ(B) on every bin, to
/// 1e−10·(π/4T)·Υ(R).
pub fn sandwich_check(
    sigma: &MeasureHistogram,
    upsilon: &MeasureHistogram,
    p: &ThermoParams,
    bounds: (f64, f64),
    convention: SechConvention,
) -> Result<SandwichReport> {
    if p.is_zero_temperature() {
        return Err(Error::ZeroTemperature("sandwich bounds"));
    }
    if sigma.grid != upsilon.grid {
        return Err(Error::InvalidBins("Σ and Υ must share a grid".into()));
    }
    let c = c_mu_t(p, bounds, convention)?;
    let k = PI / (4.0 * p.temperature);
    let tolerance = 1e-10 * k * upsilon.gamma_total();
    let mut lower_margin = f64::INFINITY;
    let mut upper_margin = f64::INFINITY;
    let mut violations = 0;
    for (g, u) in sigma.mass.iter().zip(&upsilon.mass) {
        let lo = g - k * c * u;
        let hi = k * u - g;
        lower_margin = lower_margin.min(lo);
        upper_margin = upper_margin.min(hi);
        if lo < -tolerance || hi < -tolerance {
            violations += 1;
        }
    }
    Ok(SandwichReport {
        c_mu_t: c,
        lower_margin,
        upper_margin,
        tolerance,
        violations,
        holds: violations == 0,
    })
}

/// Σ(R) ≤ (π/4T)(Υ(R) + Ψ(R)) for one realization; returns the slack
/// (bound − Σ(R)).
pub fn high_temperature_slack(sigma_total: f64, upsilon_total: f64, psi_total: f64, p: &ThermoParams) -> Result<f64> {
    if p.is_zero_temperature() {
        return Err(Error::ZeroTemperature("high-temperature bound"));
    }
    Ok(PI / (4.0 * p.temperature) * (upsilon_total + psi_total) - sigma_total)
}

/// Γ binned at T = 0 with Fermi level `level` (no atom, no prefactor check).
pub fn zero_temperature_gamma(ps: &PairSpectrum, level: f64, grid: &BinGrid) -> Result<Vec<f64>> {
    let e = ps.energies();
    let scale = PI / ps.site_count() as f64;
    let (bins, _) = accumulate_pairs(ps, grid, |a, b, degenerate| {
        if degenerate {
            return 0.0;
        }
        let occ_a = if e[a] <= level { 1.0 } else { 0.0 };
        let occ_b = if e[b] <= level { 1.0 } else { 0.0 };
        (occ_b - occ_a) / (e[a] - e[b])
    })?;
    Ok(bins.into_iter().map(|m| scale * m).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvolutionReport {
    pub direct: Vec<f64>,
    pub convolved: Vec<f64>,
    /// max over bins of |direct − convolved| / max(|direct|, |convolved|).
    pub max_relative_gap: f64,
    pub worst_bin: usize,
}

/// Compares Γ_μ^T(B) with ∫ dE (−f_μ^T)'(E)·Γ_E^0(B), the latter by adaptive
/// quadrature with the T = 0 measure re-binned at every node. The integrand
/// jumps at eigenvalues, so the energy axis is split there.
pub fn convolution_check(
    ps: &PairSpectrum,
    p: &ThermoParams,
    grid: &BinGrid,
    quadrature: &QuadratureSpec,
) -> Result<ConvolutionReport> {
    if p.is_zero_temperature() {
        return Err(Error::ZeroTemperature("convolution identity"));
    }
    let direct = conductivity_measure(ps, p, grid, &MeasureOptions::default())?.mass;
    let eps = ps.degeneracy_threshold();
    let mut breaks: Vec<f64> = Vec::new();
    for &e in ps.energies() {
        if breaks.last().map_or(true, |&last| e - last > eps) {
            breaks.push(e);
        }
    }
    let mut convolved = vec![0.0; grid.len()];
    let mut failure = None;
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let r = integrate(
            |energy, out: &mut [f64]| match zero_temperature_gamma(ps, energy, grid) {
                Ok(bins) => {
                    let weight = neg_derivative(energy, p);
                    for (o, m) in out.iter_mut().zip(bins) {
                        *o = weight * m;
                    }
                }
                Err(e) => {
                    failure = Some(e);
                    out.iter_mut().for_each(|o| *o = 0.0);
                }
            },
            a,
            b,
            grid.len(),
            quadrature,
        )?;
        if let Some(e) = failure.take() {
            return Err(e);
        }
        for (c, v) in convolved.iter_mut().zip(r.value) {
            *c += v;
        }
    }
    let mut max_relative_gap = 0.0f64;
    let mut worst_bin = 0;
    for (i, (d, c)) in direct.iter().zip(&convolved).enumerate() {
        let scale = Float::abs(*d).max(Float::abs(*c));
        if scale > 0.0 {
            let g = Float::abs(d - c) / scale;
            if g > max_relative_gap {
                max_relative_gap = g;
                worst_bin = i;
            }
        }
    }
    Ok(ConvolutionReport {
        direct,
        convolved,
        max_relative_gap,
        worst_bin,
    })
}

/// σ_μ^T(η, ν) = −(i/π) ∫ Σ(dλ) / (λ + ν − iη), with bins evaluated at
/// their centres and the atom at 0.
pub fn complex_conductivity(sigma: &MeasureHistogram, eta: f64, nu_grid: &[f64]) -> Result<Vec<Complex64>> {
    if !(eta > 0.0) {
        return Err(invalid("eta", "must be positive"));
    }
    let pref = Complex64::new(0.0, -1.0 / PI);
    Ok(nu_grid
        .iter()
        .map(|&nu| {
            let mut s = Complex64::new(sigma.atom, 0.0) / Complex64::new(nu, -eta);
            for (i, &m) in sigma.mass.iter().enumerate() {
                if m != 0.0 {
                    s += m / Complex64::new(sigma.grid.center(i) + nu, -eta);
                }
            }
            pref * s
        })
        .collect())
}

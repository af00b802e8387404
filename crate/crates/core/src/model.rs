//! One disorder realization carried through the whole pipeline.

use num_traits::Float;

use crate::conductivity::{pair_spectrum, PairSpectrum};
use crate::disorder::{sample_potential, spectral_bounds, DisorderSpec, PotentialField};
use crate::error::Result;
use crate::lattice::{build_position, build_velocity, LatticeOperator, LatticeSpec};
use crate::spectral::{build_hamiltonian, eigendecompose, SpectralData};

#[derive(Debug, Clone)]
pub struct Realization {
    pub lattice: LatticeSpec,
    pub disorder: DisorderSpec,
    pub potential: PotentialField,
    pub hamiltonian: LatticeOperator,
    pub velocity: LatticeOperator,
    pub spectral: SpectralData,
    pub pairs: PairSpectrum,
}

impl Realization {
    /// Samples V, builds H, diagonalizes it and transforms Ẋ₁. Bounds are the
    /// model's [E₋, E₊], so bins agree across realizations.
    pub fn sample(lattice: &LatticeSpec, disorder: &DisorderSpec) -> Result<Self> {
        let potential = sample_potential(disorder, lattice)?;
        let hamiltonian = build_hamiltonian(lattice, &potential)?;
        let velocity = build_velocity(lattice);
        let spectral = eigendecompose(&hamiltonian)?.with_bounds(spectral_bounds(disorder, lattice))?;
        let pairs = pair_spectrum(&spectral, &velocity)?;
        Ok(Self {
            lattice: lattice.clone(),
            disorder: disorder.clone(),
            potential,
            hamiltonian,
            velocity,
            spectral,
            pairs,
        })
    }

    pub fn position(&self) -> Result<LatticeOperator> {
        build_position(&self.lattice)
    }

    /// max |D_{nm} − i(Eₙ−Eₘ)X_{nm}| / max |D_{nm}| in the eigenbasis
    /// (Dirichlet only).
    pub fn velocity_position_defect(&self) -> Result<f64> {
        let x = self.position()?;
        let v = self.spectral.eigenvectors();
        let xt = v.transpose() * (x.matrix() * v);
        let e = self.spectral.energies();
        let n = e.len();
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for a in 0..n {
            for b in 0..n {
                let d = self.pairs.element(a, b);
                let predicted = num_complex::Complex64::new(0.0, (e[a] - e[b]) * xt[(a, b)]);
                worst = worst.max((d - predicted).norm());
                scale = scale.max(d.norm());
            }
        }
        Ok(if scale > 0.0 { worst / scale } else { Float::abs(worst) })
    }
}

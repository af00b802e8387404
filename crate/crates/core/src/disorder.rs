//! I.i.d. single-site potentials λ·V_ω(x) with counter-based seeded streams.
//!
//! The value at `site` of realization `index` under master `seed` is a pure
//! function of the triple: ChaCha8 keyed by `seed`, stream `index`, word
//! position `2·site`. Realizations can therefore be drawn in any order and
//! on any thread.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{invalid, Result};
use crate::lattice::LatticeSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SiteDistribution {
    Uniform { v_minus: f64, v_plus: f64 },
}

impl SiteDistribution {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SiteDistribution::Uniform { v_minus, v_plus } => {
                if !(v_minus.is_finite() && v_plus.is_finite()) {
                    return Err(invalid("disorder.distribution", "support must be finite"));
                }
                if v_minus >= v_plus {
                    return Err(invalid(
                        "disorder.distribution",
                        "v_minus < v_plus required (nondegenerate law)",
                    ));
                }
                Ok(())
            }
        }
    }

    /// Compact support [v₋, v₊].
    pub fn support(&self) -> (f64, f64) {
        match *self {
            SiteDistribution::Uniform { v_minus, v_plus } => (v_minus, v_plus),
        }
    }

    /// ‖ρ‖_∞ of the single-site density.
    pub fn density_sup(&self) -> f64 {
        match *self {
            SiteDistribution::Uniform { v_minus, v_plus } => 1.0 / (v_plus - v_minus),
        }
    }

    pub fn cdf(&self, v: f64) -> f64 {
        match *self {
            SiteDistribution::Uniform { v_minus, v_plus } => {
                ((v - v_minus) / (v_plus - v_minus)).clamp(0.0, 1.0)
            }
        }
    }

    fn quantile(&self, u: f64) -> f64 {
        match *self {
            SiteDistribution::Uniform { v_minus, v_plus } => v_minus + (v_plus - v_minus) * u,
        }
    }
}

impl Default for SiteDistribution {
    fn default() -> Self {
        SiteDistribution::Uniform {
            v_minus: -1.0,
            v_plus: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisorderSpec {
    pub distribution: SiteDistribution,
    pub lambda: f64,
    pub seed: u64,
    pub realization_index: u64,
}

impl DisorderSpec {
    pub fn new(distribution: SiteDistribution, lambda: f64, seed: u64) -> Result<Self> {
        let spec = Self {
            distribution,
            lambda,
            seed,
            realization_index: 0,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        self.distribution.validate()?;
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(invalid("disorder.lambda", "must be a finite nonnegative number"));
        }
        Ok(())
    }

    pub fn with_index(mut self, realization_index: u64) -> Self {
        self.realization_index = realization_index;
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }
}

/// λ·V_ω(x) for every site of the box.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialField {
    values: Vec<f64>,
}

impl PotentialField {
    pub fn from_values(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            values: alloc::vec![0.0; n],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.values.windows(2).all(|w| w[0] == w[1])
    }
}

/// Uniform variate in [0, 1) from the stream at `site`.
#[cfg(test)]
fn unit_variate(seed: u64, index: u64, site: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng.set_word_pos(2 * site as u128);
    // 53 random mantissa bits
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

pub fn sample_potential(spec: &DisorderSpec, lattice: &LatticeSpec) -> Result<PotentialField> {
    spec.validate()?;
    let n = lattice.site_count();
    if spec.lambda == 0.0 {
        return Ok(PotentialField::zeros(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(spec.realization_index);
    rng.set_word_pos(0);
    let values = (0..n)
        .map(|_| {
            let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
            spec.lambda * spec.distribution.quantile(u)
        })
        .collect();
    Ok(PotentialField { values })
}

/// [E₋, E₊] = [−2d + λv₋, 2d + λv₊], containing every finite-volume spectrum.
pub fn spectral_bounds(spec: &DisorderSpec, lattice: &LatticeSpec) -> (f64, f64) {
    let (vm, vp) = spec.distribution.support();
    let d = lattice.dimension() as f64;
    (-2.0 * d + spec.lambda * vm, 2.0 * d + spec.lambda * vp)
}

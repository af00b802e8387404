//! Time-domain versus measure-route absorbed energy on one Dirichlet
//! realization.

use acsigma_core::bins::BinGrid;
use acsigma_core::conductivity::{conductivity_measure, upsilon_measure, MeasureOptions};
use acsigma_core::disorder::DisorderSpec;
use acsigma_core::lattice::{Boundary, LatticeSpec};
use acsigma_core::response::{
    absorbed_energy_lower_bound, absorbed_energy_lr, absorbed_energy_pairs, linear_response_extract,
    propagate_liouville, ExtractionSpec, FieldPulse, ResponseTrace,
};
use acsigma_core::thermo::{SechConvention, ThermoParams};
use acsigma_core::Realization;
use serde::Serialize;

use crate::error::LabError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlphaRun {
    pub alpha: f64,
    pub w_current: f64,
    pub w_energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AbsorptionReport {
    pub w_lin: f64,
    pub w_lin_stderr: f64,
    /// Resolution of the time-domain route: max(3·stderr, fit floor).
    pub w_lin_noise: f64,
    pub w_lr: f64,
    /// Measure route evaluated at every transition frequency, no bins.
    pub w_pairs: f64,
    /// |W_lin − W_lr| / W_lr; absent when W_lr vanishes.
    pub relative_gap: Option<f64>,
    pub scaling_ratio: f64,
    pub route_gap: f64,
    pub fit_residual: f64,
    pub lower_bound: Option<f64>,
    /// W_lr = 0: the pulse has no spectral weight on the measure's support.
    pub off_support: bool,
    pub runs: Vec<AlphaRun>,
}

pub struct AbsorptionInputs<'a> {
    pub lattice: &'a LatticeSpec,
    pub disorder: &'a DisorderSpec,
    pub thermo: &'a ThermoParams,
    pub pulse: &'a FieldPulse,
    pub alphas: &'a [f64],
    pub extraction: &'a ExtractionSpec,
    pub frequency_width: f64,
}

/// Runs both routes on realization `disorder.realization_index`. Returns the
/// report and the trace of the smallest-α run.
pub fn absorb(inputs: &AbsorptionInputs) -> Result<(AbsorptionReport, ResponseTrace), LabError> {
    if inputs.lattice.boundary() != Boundary::Dirichlet {
        return Err(LabError::Precondition(
            "the time-domain route needs lattice.boundary = \"dirichlet\" (X₁ is undefined on a torus)".into(),
        ));
    }
    let r = Realization::sample(inputs.lattice, inputs.disorder)?;
    let x = r.position()?;
    let p = inputs.thermo;
    let lr = linear_response_extract(&r.hamiltonian, &x, inputs.pulse, p, inputs.alphas, inputs.extraction)?;

    let (lo, hi) = r.spectral.bounds();
    let half = ((hi - lo) / inputs.frequency_width).ceil() as usize;
    let grid = BinGrid::centered(inputs.frequency_width, half)?;
    let sigma = conductivity_measure(&r.pairs, p, &grid, &MeasureOptions::default())?;
    let w_lr = absorbed_energy_lr(&sigma, inputs.pulse);
    let w_pairs = absorbed_energy_pairs(&r.pairs, p, inputs.pulse);
    let lower_bound = if p.is_zero_temperature() {
        None
    } else {
        let u = upsilon_measure(&r.pairs, &grid)?;
        Some(absorbed_energy_lower_bound(&u, inputs.pulse, p, r.spectral.bounds(), SechConvention::HalfArgument)?)
    };
    let alpha_min = *inputs.alphas.last().expect("extraction checked the alpha set");
    let trace = propagate_liouville(&r.hamiltonian, &x, inputs.pulse, alpha_min, p, &inputs.extraction.time)?;

    let report = AbsorptionReport {
        w_lin: lr.w_lin,
        w_lin_stderr: lr.w_lin_stderr,
        w_lin_noise: (3.0 * lr.w_lin_stderr).max(inputs.extraction.absolute_floor),
        w_lr,
        w_pairs,
        relative_gap: (w_lr > 0.0).then(|| (lr.w_lin - w_lr).abs() / w_lr),
        scaling_ratio: lr.scaling_ratio,
        route_gap: lr.route_gap,
        fit_residual: lr.fit_residual,
        lower_bound,
        off_support: w_lr == 0.0,
        runs: lr
            .samples
            .iter()
            .map(|s| AlphaRun {
                alpha: s.alpha,
                w_current: s.energy.current,
                w_energy: s.energy.energy,
            })
            .collect(),
    };
    Ok((report, trace))
}
